// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails. Pass criterion numbers as
// arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "cli.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "reshare/analysis.hpp"
#include "reshare/ingest.hpp"
#include "reshare/metrics.hpp"
#include "reshare/reconstruct.hpp"
#include "reshare/rng.hpp"
#include "reshare/stats.hpp"
#include "reshare/synth.hpp"

namespace fs = std::filesystem;
using namespace reshare;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string setting_name(const Setting& s) {
  if (s.method != Method::Pdi) return std::string(to_string(s.method));
  return "g" + fmt("%g", s.params.gamma) + "/a" + fmt("%g", s.params.alpha);
}

// Hand-built cascades: (user, seconds offset, followers) per event.
struct HandEvent {
  const char* user;
  std::int64_t t;
  std::int64_t followers;
};

std::vector<Cascade> oracle_suite() {
  const std::vector<std::vector<HandEvent>> raw = {
      {{"a", 0, 300}, {"b", 1, 100}},
      {{"a", 0, 300}, {"b", 1, 100}, {"c", 2, 50}},
      {{"a", 0, 0}, {"b", 5, 0}, {"c", 9, 0}, {"d", 12, 0}},
      {{"a", 0, 10}, {"b", 0, 10}, {"c", 0, 10}, {"d", 0, 10}, {"e", 0, 10}},
      {{"a", 0, 1000000}, {"b", 3600, 2}, {"c", 3700, 5}, {"d", 86400, 40}},
      {{"a", 0, 5}, {"b", 1, 5000}, {"c", 2, 5}, {"d", 3, 5}, {"e", 4, 5}, {"f", 5, 5}},
      {{"a", 0, 12}, {"b", 100, 0}, {"c", 101, 0}, {"d", 10000, 7}, {"e", 10001, 0}},
      {{"a", 0, 1}, {"b", 2, 1}, {"c", 4, 1}, {"d", 8, 1}, {"e", 16, 1}, {"f", 32, 1}},
      {{"a", 0, 50}, {"b", 1, 60}, {"c", 1, 70}, {"d", 2, 80}},
      {{"a", 0, 200}, {"b", 30, 20}, {"c", 31, 2000}, {"d", 5000, 1}, {"e", 5001, 1}},
      {{"a", 0, 7}, {"b", 0, 0}, {"c", 1, 3}},
      {{"a", 0, 1500}, {"b", 600, 300}, {"c", 1200, 60}, {"d", 1800, 12}, {"e", 2400, 3},
       {"f", 3000, 0}},
      {{"a", 0, 40}, {"b", 1000000, 40}, {"c", 1000001, 40}},
      {{"a", 0, 9}, {"b", 2, 90}, {"c", 3, 900}, {"d", 4, 9000}},
      {{"a", 0, 100}, {"x", 10, 0}, {"a", 20, 300}, {"y", 25, 50}},
      {{"a", 0, 3}, {"b", 7, 11}, {"c", 7, 13}, {"d", 7, 17}, {"e", 50, 19}},
      {{"a", 0, 0}, {"b", 1, 1}},
      {{"a", 0, 64}, {"b", 1, 32}, {"c", 3, 16}, {"d", 7, 8}, {"e", 15, 4}, {"f", 31, 2}},
      {{"a", 0, 250000}, {"b", 45, 120}, {"c", 46, 80000}, {"d", 900, 0}, {"e", 43200, 33}},
      {{"a", 0, 2}, {"b", 1, 3}, {"c", 100000, 5}, {"d", 100001, 7}, {"e", 100002, 11},
       {"f", 100003, 13}},
  };
  std::vector<Cascade> out;
  for (std::size_t c = 0; c < raw.size(); ++c) {
    Cascade cas;
    cas.cascade_id = "hand" + std::to_string(c);
    for (std::size_t i = 0; i < raw[c].size(); ++i) {
      const auto& e = raw[c][i];
      // Users are local to a cascade so profiles reflect only this cascade.
      cas.events.push_back({cas.cascade_id + "-" + std::to_string(i),
                            cas.cascade_id + "/" + e.user, 1'600'000'000 + e.t, e.followers});
    }
    out.push_back(std::move(cas));
  }
  return out;
}

// Mean follower count per user, computed independently of the library.
std::vector<double> oracle_followers(const Cascade& c) {
  std::map<std::string, std::pair<double, double>> acc;
  for (const auto& e : c.events) {
    acc[e.user_id].first += static_cast<double>(e.followers);
    acc[e.user_id].second += 1.0;
  }
  std::vector<double> f;
  for (const auto& e : c.events) f.push_back(acc[e.user_id].first / acc[e.user_id].second);
  return f;
}

std::vector<std::int64_t> times_of(const Cascade& c) {
  std::vector<std::int64_t> t;
  for (const auto& e : c.events) t.push_back(e.t);
  return t;
}

Outcome edge_marginals() {
  const auto start = Clock::now();
  const auto suite = oracle_suite();
  const auto profiles = compute_user_profiles(suite);
  constexpr std::uint32_t kRealizations = 100000;
  double worst = 0.0;
  std::string worst_at;
  std::vector<Xoshiro256> streams(kRealizations);
  for (const auto& setting : default_pdi_grid())
    for (const auto& c : suite) {
      const auto followers = event_followers(c, profiles);
      for (std::uint32_t r = 0; r < kRealizations; ++r)
        streams[r] = make_stream(2024, c.cascade_id, r);
      const auto trees = pdi_reconstruct_many(c, followers, setting.params, streams);
      const auto t = times_of(c);
      const auto f = oracle_followers(c);
      for (std::size_t i = 1; i < c.size(); ++i) {
        std::vector<double> freq(i, 0.0);
        for (const auto& tree : trees) freq[tree.parent_of(i)] += 1.0;
        const auto p = oracle::pdi_probs(t, f, i, setting.params.gamma, setting.params.alpha,
                                         setting.params.delta_min);
        for (std::size_t j = 0; j < i; ++j) {
          const double err = std::fabs(freq[j] / kRealizations - p[j]);
          if (err > worst) {
            worst = err;
            worst_at = c.cascade_id + " " + setting_name(setting) + " edge " +
                       std::to_string(j) + "->" + std::to_string(i);
          }
        }
      }
    }
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = worst < 0.01 && secs < 60.0;
  o.detail = "max |freq - p| = " + fmt("%.5f", worst) + " (" + worst_at + "), " +
             fmt("%.1f", secs) + " s";
  return o;
}

CascadeTree random_tree(Xoshiro256& rng, std::size_t n) {
  CascadeTree t{"t", std::vector<std::uint32_t>(n - 1), 0};
  // Mix shapes: uniform attachment, chain-biased and star-biased trees.
  const auto shape = rng.below(3);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    std::uint32_t p = static_cast<std::uint32_t>(rng.below(k + 1));
    if (shape == 1 && rng.uniform() < 0.8) p = static_cast<std::uint32_t>(k);
    if (shape == 2 && rng.uniform() < 0.8) p = 0;
    t.parents[k] = p;
  }
  return t;
}

Outcome metric_oracle() {
  auto rng = make_stream(7, "acceptance-trees", 0);
  std::size_t mismatches = 0;
  double worst_sv = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto tree = random_tree(rng, 2 + rng.below(49));
    const auto want = oracle::bfs_shape(tree.parents);
    if (depth(tree) != want.depth || max_breadth(tree) != want.max_breadth) ++mismatches;
    worst_sv = std::max(worst_sv, std::fabs(structural_virality(tree) - want.structural_virality));
  }
  Outcome o;
  o.pass = mismatches == 0 && worst_sv <= 1e-9;
  o.detail = std::to_string(mismatches) + " integer mismatches, max SV error " +
             fmt("%.3g", worst_sv);
  return o;
}

Outcome stats_oracle() {
  auto rng = make_stream(8, "acceptance-stats", 0);
  double worst_rho = 0, worst_jac = 0, worst_ks = 0, worst_ccdf = 0;
  std::size_t bonf_bad = 0, ccdf_shape_bad = 0, spearman_done = 0;
  while (spearman_done < 200) {
    const auto n = 2 + rng.below(80);
    std::vector<double> x(n), y(n);
    const auto levels = 2 + rng.below(30);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(levels));
      y[i] = rng.uniform() < 0.5 ? static_cast<double>(rng.below(levels)) : rng.normal();
    }
    const auto rx = oracle::average_ranks(x), ry = oracle::average_ranks(y);
    if (*std::max_element(rx.begin(), rx.end()) == *std::min_element(rx.begin(), rx.end()) ||
        *std::max_element(ry.begin(), ry.end()) == *std::min_element(ry.begin(), ry.end()))
      continue;
    worst_rho = std::max(worst_rho, std::fabs(spearman_rho(x, y).rho - oracle::spearman(x, y)));
    ++spearman_done;
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::set<std::string> a, b;
    const auto universe = 1 + rng.below(60);
    for (std::size_t i = 0; i < universe; ++i) {
      const auto id = "n" + std::to_string(i);
      if (rng.uniform() < 0.4) a.insert(id);
      if (rng.uniform() < 0.4) b.insert(id);
    }
    if (a.empty() && b.empty()) a.insert("n0");
    worst_jac = std::max(worst_jac, std::fabs(jaccard_sets(a, b) - oracle::jaccard(a, b)));
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(1 + rng.below(120)), b(1 + rng.below(120));
    const bool discrete = trial % 2 == 0;
    for (auto& v : a) v = discrete ? static_cast<double>(rng.below(15)) : rng.normal();
    for (auto& v : b) v = discrete ? static_cast<double>(rng.below(18)) : 0.3 + rng.normal();
    worst_ks = std::max(worst_ks, std::fabs(ks_statistic(a, b) - oracle::ks_statistic(a, b)));

    const auto c = ccdf(a);
    const auto want = oracle::ccdf(a);
    if (c.size() != want.size()) {
      ++ccdf_shape_bad;
    } else {
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i].x != want[i].first) ++ccdf_shape_bad;
        worst_ccdf = std::max(worst_ccdf, std::fabs(c[i].survival - want[i].second));
      }
    }
  }
  for (int trial = 0; trial < 200; ++trial) {
    const double p = trial < 10 ? trial / 9.0 : rng.uniform() * (rng.uniform() < 0.5 ? 0.05 : 1);
    const std::size_t m = 1 + rng.below(100);
    if (bonferroni(p, m) != oracle::bonferroni(p, m)) ++bonf_bad;
  }
  Outcome o;
  o.pass = worst_rho <= 1e-9 && worst_jac <= 1e-9 && worst_ks <= 1e-9 && worst_ccdf <= 1e-9 &&
           bonf_bad == 0 && ccdf_shape_bad == 0;
  o.detail = "spearman " + fmt("%.2g", worst_rho) + ", jaccard " + fmt("%.2g", worst_jac) +
             ", ks " + fmt("%.2g", worst_ks) + ", ccdf " + fmt("%.2g", worst_ccdf) +
             ", bonferroni mismatches " + std::to_string(bonf_bad);
  return o;
}

std::vector<std::vector<double>> all_distributions(const Cascade& c, const PdiParams& params) {
  const auto profiles = compute_user_profiles({c});
  std::vector<std::vector<double>> out;
  for (std::size_t i = 1; i < c.size(); ++i)
    out.push_back(pdi_parent_distribution(c, i, profiles, params).probs);
  return out;
}

Outcome invariances() {
  const auto suite = oracle_suite();
  std::size_t checks = 0;
  std::vector<std::string> broken;
  auto expect = [&](bool ok, const std::string& what) {
    ++checks;
    if (!ok && broken.size() < 5) broken.push_back(what);
  };
  for (const auto& c : suite)
    for (const auto& s : default_pdi_grid()) {
      const auto base = all_distributions(c, s.params);
      for (std::int64_t scale : {2, 3, 10, 1000}) {
        Cascade scaled = c;
        for (auto& e : scaled.events) e.followers *= scale;
        expect(all_distributions(scaled, s.params) == base,
               c.cascade_id + " follower scale " + std::to_string(scale));
      }
      for (std::int64_t shift : {-1'000'000'000LL, 1LL, 86'400LL * 365 * 30}) {
        Cascade shifted = c;
        for (auto& e : shifted.events) e.t += shift;
        expect(all_distributions(shifted, s.params) == base,
               c.cascade_id + " time shift " + std::to_string(shift));
      }
    }
  for (const auto& c : suite) {
    const auto ref = all_distributions(c, {1.0, 1.1, 1.0});
    for (double alpha : {2.0, 3.0})
      expect(all_distributions(c, {1.0, alpha, 1.0}) == ref,
             c.cascade_id + " gamma=1 alpha " + fmt("%g", alpha));
    for (double alpha : {1.1, 2.0, 3.0}) {
      const auto base = all_distributions(c, {0.0, alpha, 1.0});
      // Reverse and rotate the follower counts across events.
      for (int perm = 0; perm < 2; ++perm) {
        Cascade p = c;
        std::vector<std::int64_t> f;
        for (const auto& e : c.events) f.push_back(e.followers);
        if (perm == 0)
          std::reverse(f.begin(), f.end());
        else
          std::rotate(f.begin(), f.begin() + 1, f.end());
        for (std::size_t i = 0; i < f.size(); ++i) p.events[i].followers = f[i];
        expect(all_distributions(p, {0.0, alpha, 1.0}) == base,
               c.cascade_id + " gamma=0 permutation " + std::to_string(perm));
      }
    }
  }
  Outcome o;
  o.pass = broken.empty();
  o.detail = std::to_string(checks) + " bitwise comparisons";
  for (const auto& b : broken) o.detail += "; broken: " + b;
  return o;
}

// Shared synthetic corpus for the structure and influence criteria.
struct CorpusRun {
  SynthCorpus syn;
  std::vector<Cascade> corpus;
  StructureReport structure;
  InfluenceReport influence;
  double seconds = 0.0;
};

const CorpusRun& corpus_run() {
  static const CorpusRun run = [] {
    CorpusRun r;
    const auto start = Clock::now();
    SynthConfig cfg;
    cfg.n_cascades = 2000;
    cfg.min_size = 3;
    cfg.max_size = 300;
    cfg.seed = 20240611;
    r.syn = generate_corpus(cfg);
    r.corpus = r.syn.corpus();
    const auto profiles = compute_user_profiles(r.corpus);

    std::vector<Setting> settings{{Method::Naive, {}}, {Method::Tid, {}}};
    for (const auto& s : default_pdi_grid()) settings.push_back(s);
    StructureOptions sopt;
    for (std::size_t i = 1; i < settings.size(); ++i) sopt.required.push_back(settings[i]);
    std::sort(sopt.required.begin(), sopt.required.end(), setting_less);
    sopt.seed = 11;
    StructureAnalysis structure(r.corpus, sopt);
    InfluenceAnalysis influence(r.corpus, {});
    BatchOptions bopt;
    bopt.realizations = 100;
    bopt.master_seed = 11;
    bopt.workers = std::max(1u, std::thread::hardware_concurrency());
    batch_reconstruct(r.corpus, profiles, &r.syn.followers, settings, bopt,
                      [&](std::span<const TreeRecord> records) {
                        for (const auto& rec : records) {
                          influence.add(rec);
                          structure.add(TreeRecord(rec));
                        }
                      });
    r.structure = structure.finish();
    r.influence = influence.finish();
    r.seconds = seconds_since(start);
    return r;
  }();
  return run;
}

const SettingSamples* samples_for(const StructureReport& rep, double gamma, double alpha) {
  for (const auto& s : rep.samples)
    if (s.setting.method == Method::Pdi && s.setting.params.gamma == gamma &&
        s.setting.params.alpha == alpha)
      return &s;
  return nullptr;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Outcome structure_direction() {
  const auto& run = corpus_run();
  const double gammas[] = {0.75, 0.5, 0.25};
  double m[3][3];
  for (int g = 0; g < 3; ++g) {
    const auto* s = samples_for(run.structure, gammas[g], 2.0);
    if (!s) return {false, "missing setting"};
    for (int k = 0; k < 3; ++k) m[g][k] = mean_of(s->values[k]);
  }
  const bool depth_up = m[0][0] < m[1][0] && m[1][0] < m[2][0];
  const bool breadth_down = m[0][1] > m[1][1] && m[1][1] > m[2][1];
  const bool sv_up = m[0][2] < m[1][2] && m[1][2] < m[2][2];
  Outcome o;
  o.pass = depth_up && breadth_down && sv_up && run.seconds < 300.0;
  std::string d = "gamma 0.75/0.5/0.25 at alpha 2:";
  const char* names[] = {" depth", " max_breadth", " SV"};
  for (int k = 0; k < 3; ++k)
    d += std::string(names[k]) + " " + fmt("%.4f", m[0][k]) + "/" + fmt("%.4f", m[1][k]) + "/" +
         fmt("%.4f", m[2][k]);
  o.detail = d + "; corpus run " + fmt("%.1f", run.seconds) + " s";
  return o;
}

Outcome similarity_vs_size() {
  const auto& run = corpus_run();
  std::map<std::pair<double, double>, std::pair<std::vector<double>, std::vector<double>>> by;
  for (const auto& row : run.structure.similarity) {
    auto& [x, y] = by[{row.setting.params.gamma, row.setting.params.alpha}];
    x.push_back(static_cast<double>(row.size));
    y.push_back(row.mean_pdi_pdi);
  }
  Outcome o;
  double worst = -1.0;
  for (const auto& [key, xy] : by) {
    const double rho = spearman_rho(xy.first, xy.second).rho;
    worst = std::max(worst, rho);
    if (!(rho < -0.5)) o.pass = false;
  }
  if (by.size() != 9) o.pass = false;
  o.detail = std::to_string(by.size()) + " settings, largest rho(size, jaccard) " +
             fmt("%.4f", worst);
  return o;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

Outcome influence_shift() {
  const auto& rep = corpus_run().influence;
  const auto top = top_k_dense(rep.naive_strength, 0.10);
  Outcome o;
  std::string worst_low, worst_top;
  double min_low_median = INFINITY, max_top_median = -INFINITY, max_rho = -INFINITY;
  std::map<double, std::vector<std::pair<double, double>>> by_alpha;
  for (const auto& s : rep.settings) {
    max_rho = std::max(max_rho, s.rho_mean);
    if (!(s.rho_mean < 1.0)) o.pass = false;
    if (s.setting.method != Method::Pdi) continue;
    by_alpha[s.setting.params.alpha].emplace_back(s.setting.params.gamma, s.rho_mean);
    std::vector<double> low, high;
    for (std::size_t u = 0; u < rep.users.size(); ++u)
      if (rep.naive_strength[u] <= 2) low.push_back(s.mean_strength_change[u]);
    for (auto u : top) high.push_back(s.mean_strength_change[u]);
    const double ml = median(low), mh = median(high);
    min_low_median = std::min(min_low_median, ml);
    max_top_median = std::max(max_top_median, mh);
    if (!(ml >= 0.0) || !(mh < 0.0)) o.pass = false;
  }
  std::string rho_rows;
  for (auto& [alpha, rows] : by_alpha) {
    std::sort(rows.begin(), rows.end());
    rho_rows += " a" + fmt("%g", alpha) + ":";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rho_rows += (i ? "/" : "") + fmt("%.3f", rows[i].second);
      if (i > 0 && !(rows[i].second > rows[i - 1].second)) o.pass = false;
    }
  }
  if (by_alpha.size() != 3) o.pass = false;
  o.detail = "min median change (strength<=2) " + fmt("%.4f", min_low_median) +
             ", max median change (top decile) " + fmt("%.4f", max_top_median) +
             ", mean rho by gamma" + rho_rows + ", max rho " + fmt("%.3f", max_rho);
  return o;
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("reshare_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int cli(std::vector<std::string> args, std::string* err_out = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (err_out) *err_out = err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome harness_shape() {
  Workspace ws;
  Outcome o;
  std::string err;
  if (cli({"synth", "--out-dir", ws.path("syn"), "--n-cascades", "30", "--seed", "5", "--quiet"},
          &err) != 0)
    return {false, "synth failed: " + err};
  const auto cascades = ws.path("syn/cascades.jsonl"), followers = ws.path("syn/followers.csv");
  if (cli({"structure", "--input", cascades, "--followers", followers, "--out-dir",
           ws.path("st"), "--quiet"},
          &err) != 0)
    return {false, "structure failed: " + err};
  std::ifstream ks(ws.dir / "st" / "ks_table.csv");
  std::string line;
  std::getline(ks, line);
  std::map<std::string, std::size_t> per_metric;
  std::size_t rows = 0, bonf_bad = 0;
  while (std::getline(ks, line)) {
    ++rows;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() < 8) {
      ++bonf_bad;
      continue;
    }
    ++per_metric[cols[0]];
    const double p = std::stod(cols[6]), adj = std::stod(cols[7]);
    if (std::fabs(adj - std::min(1.0, 45.0 * p)) > 1e-9 * std::max(1e-300, adj)) ++bonf_bad;
  }
  const auto summary = nlohmann::json::parse(slurp(ws.dir / "st" / "summary.json"));
  const auto family = summary.value("ks_family_size", 0);
  bool per_metric_ok = per_metric.size() == 3;
  for (const auto& [m, n] : per_metric) per_metric_ok = per_metric_ok && n == 45;

  if (cli({"reconstruct", "--input", cascades, "--out-dir", ws.path("rec"), "--quiet"}, &err) !=
      0)
    return {false, "reconstruct failed: " + err};
  std::map<std::string, std::size_t> per_cascade;
  std::map<std::string, std::set<std::int64_t>> realization_ids;
  std::ifstream trees(ws.dir / "rec" / "trees.jsonl");
  while (std::getline(trees, line)) {
    const auto j = nlohmann::json::parse(line);
    const auto id = j["cascade_id"].get<std::string>();
    ++per_cascade[id];
    realization_ids[id + " " + j["gamma"].dump() + " " + j["alpha"].dump()].insert(
        j["realization"].get<std::int64_t>());
  }
  bool recon_ok = per_cascade.size() == 30 && realization_ids.size() == 30 * 9;
  for (const auto& [id, n] : per_cascade) recon_ok = recon_ok && n == 900;
  for (const auto& [key, ids] : realization_ids)
    recon_ok = recon_ok && ids.size() == 100 && *ids.begin() == 0 && *ids.rbegin() == 99;

  o.pass = rows == 135 && per_metric_ok && bonf_bad == 0 && family == 45 && recon_ok;
  o.detail = std::to_string(rows) + " KS rows, family " + std::to_string(family) +
             ", bonferroni mismatches " + std::to_string(bonf_bad) + ", trees per cascade " +
             (per_cascade.empty() ? std::string("none")
                                  : std::to_string(per_cascade.begin()->second)) +
             (recon_ok ? "" : " (realization layout wrong)");
  return o;
}

bool same_directories(const fs::path& a, const fs::path& b, std::string& diff) {
  std::set<std::string> names_a, names_b;
  for (const auto& e : fs::directory_iterator(a)) names_a.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) names_b.insert(e.path().filename().string());
  if (names_a != names_b) {
    diff = "file lists differ";
    return false;
  }
  for (const auto& n : names_a)
    if (slurp(a / n) != slurp(b / n)) {
      diff = n;
      return false;
    }
  return true;
}

Outcome determinism_and_speed() {
  Workspace ws;
  std::string err, diff;
  std::size_t compared = 0;
  for (const char* w : {"1", "8"})
    if (cli({"synth", "--out-dir", ws.path(std::string("syn") + w), "--n-cascades", "200",
             "--seed", "77", "--workers", w, "--quiet"},
            &err) != 0)
      return {false, "synth failed: " + err};
  if (!same_directories(ws.dir / "syn1", ws.dir / "syn8", diff))
    return {false, "synth differs: " + diff};
  const auto cascades = ws.path("syn1/cascades.jsonl"), followers = ws.path("syn1/followers.csv");
  const std::vector<std::vector<std::string>> commands = {
      {"reconstruct", "--method", "naive,tid,pdi", "--realizations", "20"},
      {"influence", "--realizations", "20"},
      {"structure", "--realizations", "20", "--bins", "50", "--bootstraps", "200"},
  };
  for (const auto& cmd : commands) {
    for (const char* w : {"1", "8"}) {
      auto args = cmd;
      args.insert(args.end(), {"--input", cascades, "--followers", followers, "--seed", "9",
                               "--workers", w, "--quiet", "--out-dir",
                               ws.path(cmd[0] + "_w" + w)});
      if (cli(args, &err) != 0) return {false, cmd[0] + " failed: " + err};
    }
    if (!same_directories(ws.dir / (cmd[0] + "_w1"), ws.dir / (cmd[0] + "_w8"), diff))
      return {false, cmd[0] + " differs across worker counts: " + diff};
    ++compared;
  }

  // Timed workload: 1,000 cascades with mean size 20, default grid and realizations.
  if (cli({"synth", "--out-dir", ws.path("perf"), "--n-cascades", "1000", "--min-size", "2",
           "--max-size", "38", "--size-exponent", "0", "--seed", "5", "--quiet"},
          &err) != 0)
    return {false, "synth failed: " + err};
  const auto perf = parse_cascades_file(ws.path("perf/cascades.jsonl"));
  std::size_t events = 0;
  for (const auto& c : perf.cascades) events += c.size();
  const double mean_size = static_cast<double>(events) / perf.cascades.size();
  const auto start = Clock::now();
  if (cli({"reconstruct", "--input", ws.path("perf/cascades.jsonl"), "--out-dir",
           ws.path("perf_out"), "--quiet"},
          &err) != 0)
    return {false, "timed reconstruct failed: " + err};
  const double secs = seconds_since(start);
  const auto bytes = fs::file_size(ws.dir / "perf_out" / "trees.jsonl");

  Outcome o;
  o.pass = secs < 60.0 && std::fabs(mean_size - 20.0) < 1.0;
  o.detail = "synth + " + std::to_string(compared) +
             " commands byte-identical at 1 and 8 workers; 1000 cascades (mean size " +
             fmt("%.2f", mean_size) + ") x 9 x 100 in " + fmt("%.1f", secs) + " s, " +
             fmt("%.0f", bytes / 1e6) + " MB written";
  return o;
}

Outcome recovery_self_consistency() {
  SynthConfig cfg;
  cfg.n_cascades = 500;
  cfg.min_size = 3;
  cfg.max_size = 300;
  cfg.generative = {0.5, 2.0, 1.0};
  cfg.seed = 31337;
  const auto syn = generate_corpus(cfg);
  const auto corpus = syn.corpus();
  const auto profiles = compute_user_profiles(corpus);
  const std::vector<Setting> settings{{Method::Pdi, cfg.generative}};
  constexpr std::uint32_t kRealizations = 20;
  BatchOptions opt;
  opt.realizations = kRealizations;
  opt.master_seed = 4;
  std::vector<double> score(corpus.size(), 0.0);
  std::size_t c = 0;
  batch_reconstruct(corpus, profiles, nullptr, settings, opt,
                    [&](std::span<const TreeRecord> records) {
                      for (const auto& rec : records) {
                        while (corpus[c].cascade_id != rec.tree.cascade_id) ++c;
                        score[c] += recovery_score(syn.cascades[c].truth, rec.tree) / kRealizations;
                      }
                    });
  std::vector<double> diff(corpus.size());
  double mean_rec = 0, mean_base = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::size_t n = corpus[i].size();
    double h = 0;
    for (std::size_t k = 1; k < n; ++k) h += 1.0 / static_cast<double>(k);
    const double baseline = h / static_cast<double>(n - 1);
    diff[i] = score[i] - baseline;
    mean_rec += score[i];
    mean_base += baseline;
  }
  mean_rec /= corpus.size();
  mean_base /= corpus.size();
  const double observed = mean_of(diff);
  // One-sided sign-flip permutation test of mean(diff) > 0.
  constexpr int kPermutations = 10000;
  auto rng = make_stream(4, "acceptance-permutation", 0);
  int as_extreme = 0;
  for (int p = 0; p < kPermutations; ++p) {
    double s = 0;
    for (double d : diff) s += rng.uniform() < 0.5 ? d : -d;
    if (s / diff.size() >= observed) ++as_extreme;
  }
  const double p_value = (1.0 + as_extreme) / (1.0 + kPermutations);
  Outcome o;
  o.pass = mean_rec > mean_base && p_value < 0.01;
  o.detail = "mean recovery " + fmt("%.4f", mean_rec) + " vs baseline " + fmt("%.4f", mean_base) +
             ", permutation p = " + fmt("%.2g", p_value);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "edge-marginal oracle", edge_marginals},
      {2, "metric oracle", metric_oracle},
      {3, "statistics oracle", stats_oracle},
      {4, "invariance suite", invariances},
      {5, "depth/breadth/virality direction in gamma", structure_direction},
      {6, "similarity falls with cascade size", similarity_vs_size},
      {7, "influence shift and rho ordering", influence_shift},
      {8, "harness shape", harness_shape},
      {9, "determinism and throughput", determinism_and_speed},
      {10, "parent recovery above random", recovery_self_consistency},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
