#include "reshare/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include "reshare/error.hpp"
#include "reshare/io.hpp"
#include "reshare/rng.hpp"

namespace reshare {

bool setting_less(const Setting& a, const Setting& b) {
  auto rank = [](Method m) { return m == Method::Pdi ? 0 : m == Method::Tid ? 1 : 2; };
  if (a.method != b.method) return rank(a.method) < rank(b.method);
  if (a.method != Method::Pdi) return false;
  if (a.params.gamma != b.params.gamma) return a.params.gamma < b.params.gamma;
  return a.params.alpha < b.params.alpha;
}

// ---------------------------------------------------------------------------
// Influence

InfluenceAnalysis::InfluenceAnalysis(const std::vector<Cascade>& corpus, InfluenceOptions options)
    : index_(corpus), options_(std::move(options)), naive_(index_.user_count(), 0),
      cascades_(corpus.size()) {
  for (double k : options_.top_k)
    if (!(k > 0.0 && k <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "top-k fraction must lie in (0, 1]");
}

void InfluenceAnalysis::add(const TreeRecord& record) {
  if (record.setting.method == Method::Naive) {
    accumulate_strength(record.tree, index_, naive_);
    ++naive_trees_;
    return;
  }
  auto it = std::find_if(slots_.begin(), slots_.end(),
                         [&](const Slot& s) { return same_setting(s.setting, record.setting); });
  if (it == slots_.end()) {
    slots_.push_back(Slot{record.setting, {}});
    it = std::prev(slots_.end());
  }
  auto& per_realization = it->strengths;
  if (per_realization.size() <= record.tree.realization)
    per_realization.resize(record.tree.realization + 1);
  auto& strengths = per_realization[record.tree.realization];
  if (strengths.empty()) strengths.assign(index_.user_count(), 0);
  accumulate_strength(record.tree, index_, strengths);
}

InfluenceReport InfluenceAnalysis::finish() const {
  if (naive_trees_ == 0)
    throw Error(ErrorCode::MissingSetting, "no naive trees: the naive baseline is required");
  if (naive_trees_ != cascades_)
    throw Error(ErrorCode::InvalidArgument, "naive trees cover " + std::to_string(naive_trees_) +
                                                " of " + std::to_string(cascades_) + " cascades");
  std::int64_t total = 0;
  for (auto s : naive_) total += s;

  InfluenceReport report;
  report.users = index_.users();
  report.naive_strength = naive_;

  std::vector<double> naive_d(naive_.begin(), naive_.end());
  std::vector<std::set<std::uint32_t>> naive_top;
  for (double k : options_.top_k) naive_top.push_back(top_k_dense(naive_, k));

  std::vector<const Slot*> order;
  for (const auto& s : slots_) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const Slot* a, const Slot* b) { return setting_less(a->setting, b->setting); });

  const std::size_t n_users = index_.user_count();
  for (const Slot* slot : order) {
    SettingInfluence out;
    out.setting = slot->setting;
    for (double k : options_.top_k) out.top_k.push_back(TopKOverlap{k, {}});
    out.mean_strength_change.assign(n_users, 0.0);
    const std::size_t realizations = slot->strengths.size();
    std::vector<double> x, y;
    for (std::size_t r = 0; r < realizations; ++r) {
      const auto& s = slot->strengths[r];
      std::int64_t sum = 0;
      for (auto v : s) sum += v;
      if (s.empty() || sum != total)
        throw Error(ErrorCode::InvalidArgument,
                    "realization " + std::to_string(r) + " of a " +
                        std::string(to_string(slot->setting.method)) +
                        " setting does not cover every cascade");
      x.clear();
      y.clear();
      for (std::size_t u = 0; u < n_users; ++u) {
        if (options_.exclude_zero_strength && naive_[u] == 0 && s[u] == 0) continue;
        x.push_back(naive_d[u]);
        y.push_back(static_cast<double>(s[u]));
      }
      double rho = std::numeric_limits<double>::quiet_NaN();
      try {
        rho = spearman_rho(x, y).rho;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Degenerate && e.code() != ErrorCode::InvalidArgument) throw;
      }
      out.rho.push_back(rho);
      for (std::size_t k = 0; k < options_.top_k.size(); ++k)
        out.top_k[k].jaccard.push_back(
            jaccard_sets(naive_top[k], top_k_dense(s, options_.top_k[k])));
      for (std::size_t u = 0; u < n_users; ++u)
        out.mean_strength_change[u] += static_cast<double>(s[u] - naive_[u]);
    }
    for (double& c : out.mean_strength_change) c /= static_cast<double>(realizations);

    double sum = 0.0;
    std::size_t valid = 0;
    for (double r : out.rho)
      if (!std::isnan(r)) {
        sum += r;
        ++valid;
      }
    out.rho_mean = valid > 0 ? sum / static_cast<double>(valid)
                             : std::numeric_limits<double>::quiet_NaN();
    double ss = 0.0;
    for (double r : out.rho)
      if (!std::isnan(r)) ss += (r - out.rho_mean) * (r - out.rho_mean);
    out.rho_sd = valid > 1 ? std::sqrt(ss / static_cast<double>(valid - 1)) : 0.0;
    report.settings.push_back(std::move(out));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Structure

StructureAnalysis::StructureAnalysis(const std::vector<Cascade>& corpus, StructureOptions options,
                                     std::ostream* metrics_csv, std::ostream* similarity_csv)
    : corpus_(corpus), index_(corpus), options_(std::move(options)), metrics_csv_(metrics_csv),
      similarity_csv_(similarity_csv), seen_(corpus.size(), false) {}

void StructureAnalysis::write_metrics_header(std::ostream& out) {
  out << "cascade_id,method,gamma,alpha,realization,size,depth,max_breadth,structural_virality\n";
}

void StructureAnalysis::write_similarity_header(std::ostream& out) {
  out << "cascade_id,size,mean_pdi_pdi,mean_pdi_baseline,n_pairs,gamma,alpha\n";
}

void StructureAnalysis::add(TreeRecord&& record) {
  const std::size_t pos = index_.cascade(record.tree.cascade_id);
  if (record.tree.size() != corpus_[pos].size())
    throw Error(ErrorCode::MismatchedCascade,
                "tree size differs from cascade " + record.tree.cascade_id);
  if (current_ != pos) {
    flush_group();
    if (seen_[pos])
      throw Error(ErrorCode::InvalidArgument,
                  "tree records for cascade " + record.tree.cascade_id + " are not contiguous");
    seen_[pos] = true;
    current_ = pos;
  }
  group_.push_back(std::move(record));
}

StructureAnalysis::SettingState& StructureAnalysis::state_for(const Setting& s) {
  for (auto& st : states_)
    if (same_setting(st.setting, s)) return st;
  states_.push_back(SettingState{s, {}, {}});
  return states_.back();
}

namespace {

std::string gamma_field(const Setting& s) {
  return s.method == Method::Pdi ? format_real(s.params.gamma) : "";
}
std::string alpha_field(const Setting& s) {
  return s.method == Method::Pdi ? format_real(s.params.alpha) : "";
}

}  // namespace

void StructureAnalysis::flush_group() {
  if (!current_) return;
  const Cascade& cascade = corpus_[*current_];
  const CascadeTree* baseline = nullptr;
  for (const auto& r : group_)
    if (r.setting.method == Method::Tid) baseline = &r.tree;

  std::vector<bool> done(group_.size(), false);
  for (std::size_t i = 0; i < group_.size(); ++i) {
    if (done[i]) continue;
    const Setting setting = group_[i].setting;
    std::vector<CascadeTree> trees;
    for (std::size_t j = i; j < group_.size(); ++j)
      if (!done[j] && same_setting(group_[j].setting, setting)) {
        trees.push_back(group_[j].tree);
        done[j] = true;
      }
    std::array<double, 3> sums{0.0, 0.0, 0.0};
    for (const auto& t : trees) {
      const CascadeMetrics m = compute_metrics(t);
      sums[0] += static_cast<double>(m.depth);
      sums[1] += static_cast<double>(m.max_breadth);
      sums[2] += m.structural_virality;
      if (metrics_csv_ != nullptr)
        *metrics_csv_ << cascade.cascade_id << ',' << to_string(setting.method) << ','
                      << gamma_field(setting) << ',' << alpha_field(setting) << ','
                      << t.realization << ',' << m.size << ',' << m.depth << ','
                      << m.max_breadth << ',' << format_real(m.structural_virality) << '\n';
    }
    if (setting.method == Method::Naive) continue;
    SettingState& st = state_for(setting);
    for (std::size_t m = 0; m < 3; ++m)
      st.values[m].push_back(sums[m] / static_cast<double>(trees.size()));
    st.positions.push_back(*current_);

    if (setting.method == Method::Pdi && cascade.size() >= options_.min_similarity_size &&
        trees.size() >= 2) {
      const SimilaritySummary sum = pairwise_similarity_summary(trees, baseline);
      SimilarityRow row{cascade.cascade_id, setting, cascade.size(), sum.mean_pairwise,
                        sum.mean_vs_baseline, sum.n_pairs};
      if (similarity_csv_ != nullptr)
        *similarity_csv_ << row.cascade_id << ',' << row.size << ','
                         << format_real(row.mean_pdi_pdi) << ','
                         << (row.mean_pdi_baseline ? format_real(*row.mean_pdi_baseline) : "")
                         << ',' << row.n_pairs << ',' << gamma_field(setting) << ','
                         << alpha_field(setting) << '\n';
      similarity_.push_back(std::move(row));
    }
  }
  group_.clear();
  current_.reset();
}

StructureReport StructureAnalysis::finish() {
  flush_group();
  StructureReport report;
  std::sort(states_.begin(), states_.end(), [](const SettingState& a, const SettingState& b) {
    return setting_less(a.setting, b.setting);
  });
  for (const auto& st : states_) report.samples.push_back(SettingSamples{st.setting, st.values});

  for (const auto& s : report.samples)
    for (std::size_t m = 0; m < kAllMetrics.size(); ++m)
      report.ccdf.push_back(CcdfRow{kAllMetrics[m], s.setting, ccdf(s.values[m])});

  if (!options_.required.empty()) report.ks = comparison_harness(report.samples, options_.required);

  for (const auto& s : report.samples) {
    if (s.setting.method != Method::Pdi) continue;
    std::vector<double> size, pp, pb_size, pb;
    for (const auto& row : similarity_) {
      if (!same_setting(row.setting, s.setting)) continue;
      size.push_back(static_cast<double>(row.size));
      pp.push_back(row.mean_pdi_pdi);
      if (row.mean_pdi_baseline) {
        pb_size.push_back(static_cast<double>(row.size));
        pb.push_back(*row.mean_pdi_baseline);
      }
    }
    const std::string key = gamma_field(s.setting) + "/" + alpha_field(s.setting);
    if (!pp.empty())
      report.trend.push_back(TrendRow{s.setting, "pdi_pdi",
                                      binned_trend(size, pp, options_.bins, options_.bootstraps,
                                                   options_.ci,
                                                   stream_seed(options_.seed, key, 0))});
    if (!pb.empty())
      report.trend.push_back(TrendRow{s.setting, "pdi_baseline",
                                      binned_trend(pb_size, pb, options_.bins,
                                                   options_.bootstraps, options_.ci,
                                                   stream_seed(options_.seed, key, 1))});
  }
  report.similarity = std::move(similarity_);
  return report;
}

}  // namespace reshare
