#include "reshare/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reshare/error.hpp"
#include "reshare/parallel.hpp"
#include "reshare/simd/kernels.hpp"

namespace reshare {

void PdiParams::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw Error(ErrorCode::InvalidParams, "gamma must lie in [0, 1], got " + std::to_string(gamma));
  if (!(alpha > 1.0))
    throw Error(ErrorCode::InvalidAlpha, "alpha must exceed 1, got " + std::to_string(alpha));
  if (!(delta_min > 0.0))
    throw Error(ErrorCode::InvalidParams,
                "delta_min must be positive, got " + std::to_string(delta_min));
}

std::vector<double> followers_probs(std::span<const double> candidate_mean_followers) {
  if (candidate_mean_followers.empty())
    throw Error(ErrorCode::InvalidCandidates, "no candidate parents");
  for (double f : candidate_mean_followers)
    if (!(f >= 0.0) || !std::isfinite(f))
      throw Error(ErrorCode::InvalidCandidates, "follower counts must be finite and non-negative");
  const std::size_t n = candidate_mean_followers.size();
  const double total = simd::sum(candidate_mean_followers);
  std::vector<double> out(n);
  if (total == 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
    return out;
  }
  for (std::size_t j = 0; j < n; ++j) out[j] = candidate_mean_followers[j] / total;
  return out;
}

std::vector<double> recency_probs(std::span<const double> deltas_seconds, double alpha,
                                  double delta_min) {
  if (!(alpha > 1.0))
    throw Error(ErrorCode::InvalidAlpha, "alpha must exceed 1, got " + std::to_string(alpha));
  if (!(delta_min > 0.0)) throw Error(ErrorCode::InvalidParams, "delta_min must be positive");
  if (deltas_seconds.empty()) throw Error(ErrorCode::InvalidCandidates, "no candidate parents");
  double ref = std::max(deltas_seconds[0], delta_min);
  for (double d : deltas_seconds) {
    if (!(d >= 0.0) || !std::isfinite(d))
      throw Error(ErrorCode::InvalidArgument, "time gaps must be finite and non-negative");
    ref = std::min(ref, std::max(d, delta_min));
  }
  // Gaps are measured against the nearest candidate so the largest weight is
  // 1; the constant factor cancels in the normalization.
  std::vector<double> out(deltas_seconds.size());
  const auto& k = simd::active();
  k.recency_weights(deltas_seconds.data(), out.size(), alpha, delta_min, ref, out.data());
  const double total = k.sum(out.data(), out.size());
  for (double& w : out) w /= total;
  return out;
}

std::vector<double> event_followers(const Cascade& cascade, const ProfileMap& profiles) {
  std::vector<double> out;
  out.reserve(cascade.size());
  for (const auto& e : cascade.events) {
    const auto it = profiles.find(e.user_id);
    if (it == profiles.end())
      throw Error(ErrorCode::InvalidArgument,
                  "no profile for user " + e.user_id + " in cascade " + cascade.cascade_id);
    out.push_back(it->second.mean_followers);
  }
  return out;
}

void pdi_probs_into(std::span<const std::int64_t> times, std::span<const double> followers,
                    std::size_t child, const PdiParams& params, PdiWorkspace& ws) {
  const auto& k = simd::active();
  ws.deltas.resize(child);
  ws.recency.resize(child);
  ws.probs.resize(child);
  const std::int64_t tc = times[child];
  double ref = 0.0;
  for (std::size_t j = 0; j < child; ++j) {
    const double d = static_cast<double>(tc - times[j]);
    ws.deltas[j] = d;
    const double clamped = std::max(d, params.delta_min);
    ref = j == 0 ? clamped : std::min(ref, clamped);
  }
  k.recency_weights(ws.deltas.data(), child, params.alpha, params.delta_min, ref,
                    ws.recency.data());
  const double r_total = k.sum(ws.recency.data(), child);

  const double* f = followers.data();
  double f_total = k.sum(f, child);
  if (f_total == 0.0) {
    // 0/0 in the followers term: every candidate equally likely.
    ws.ones.assign(child, 1.0);
    f = ws.ones.data();
    f_total = static_cast<double>(child);
  }
  k.mix(f, f_total, ws.recency.data(), r_total, params.gamma, child, ws.probs.data());
}

ParentDistribution pdi_parent_distribution(const Cascade& cascade, std::size_t child_index,
                                           const ProfileMap& profiles, const PdiParams& params) {
  params.validate();
  if (child_index < 1 || child_index >= cascade.size())
    throw Error(ErrorCode::InvalidArgument, "child index " + std::to_string(child_index) +
                                                " outside cascade of size " +
                                                std::to_string(cascade.size()));
  std::vector<std::int64_t> times;
  times.reserve(child_index + 1);
  for (std::size_t i = 0; i <= child_index; ++i) times.push_back(cascade.events[i].t);
  const auto followers = event_followers(cascade, profiles);
  PdiWorkspace ws;
  pdi_probs_into(times, followers, child_index, params, ws);
  return ParentDistribution{child_index, std::move(ws.probs)};
}

namespace {

constexpr std::size_t kLinearSearchLimit = 48;

}  // namespace

std::vector<CascadeTree> pdi_reconstruct_many(const Cascade& cascade,
                                              std::span<const double> followers,
                                              const PdiParams& params,
                                              std::span<Xoshiro256> streams,
                                              std::uint32_t first_realization) {
  params.validate();
  const std::size_t n = cascade.size();
  if (n < 2) throw Error(ErrorCode::TooSmall, "cascade " + cascade.cascade_id + " has no reshares");
  if (followers.size() != n)
    throw Error(ErrorCode::InvalidArgument, "follower vector does not match cascade size");

  std::vector<CascadeTree> trees(streams.size());
  for (std::size_t r = 0; r < streams.size(); ++r) {
    trees[r].cascade_id = cascade.cascade_id;
    trees[r].realization = first_realization + static_cast<std::uint32_t>(r);
    trees[r].parents.resize(n - 1);
  }
  std::vector<std::int64_t> times(n);
  for (std::size_t i = 0; i < n; ++i) times[i] = cascade.events[i].t;

  const auto& k = simd::active();
  PdiWorkspace ws;
  std::vector<double> cdf;
  for (std::size_t child = 1; child < n; ++child) {
    if (child == 1) {
      for (std::size_t r = 0; r < streams.size(); ++r) {
        (void)streams[r].uniform();
        trees[r].parents[0] = 0;
      }
      continue;
    }
    pdi_probs_into(times, followers, child, params, ws);
    cdf.resize(child);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t j = 0; j < child; ++j) {
      acc += ws.probs[j];
      cdf[j] = acc;
      if (ws.probs[j] > 0.0) last_positive = j;
    }
    const double total = acc;
    for (std::size_t r = 0; r < streams.size(); ++r) {
      const double x = streams[r].uniform() * total;
      std::size_t idx = child <= kLinearSearchLimit
                            ? k.count_le(cdf.data(), child, x)
                            : static_cast<std::size_t>(
                                  std::upper_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
      if (idx >= child) idx = last_positive;
      trees[r].parents[child - 1] = static_cast<std::uint32_t>(idx);
    }
  }
  return trees;
}

CascadeTree pdi_reconstruct(const Cascade& cascade, const ProfileMap& profiles,
                            const PdiParams& params, Xoshiro256& rng) {
  const auto followers = event_followers(cascade, profiles);
  auto trees = pdi_reconstruct_many(cascade, followers, params, std::span<Xoshiro256>(&rng, 1));
  return std::move(trees.front());
}

CascadeTree naive_reconstruct(const Cascade& cascade) {
  if (cascade.size() < 2)
    throw Error(ErrorCode::TooSmall, "cascade " + cascade.cascade_id + " has no reshares");
  CascadeTree tree;
  tree.cascade_id = cascade.cascade_id;
  tree.parents.assign(cascade.size() - 1, 0);
  return tree;
}

CascadeTree tid_reconstruct(const Cascade& cascade, const FollowerGraph& followers,
                            const ProfileMap& profiles, std::vector<bool>* fallback) {
  if (cascade.size() < 2)
    throw Error(ErrorCode::TooSmall, "cascade " + cascade.cascade_id + " has no reshares");
  const auto mean_followers = event_followers(cascade, profiles);
  const std::size_t n = cascade.size();
  CascadeTree tree;
  tree.cascade_id = cascade.cascade_id;
  tree.parents.resize(n - 1);
  if (fallback != nullptr) fallback->assign(n - 1, false);

  for (std::size_t i = 1; i < n; ++i) {
    const std::string& resharer = cascade.events[i].user_id;
    // Later index means later (t, post_id) order, so the first hit scanning
    // backwards is the most recent followed poster.
    bool found = false;
    for (std::size_t j = i; j-- > 0;) {
      if (followers.follows(resharer, cascade.events[j].user_id)) {
        tree.parents[i - 1] = static_cast<std::uint32_t>(j);
        found = true;
        break;
      }
    }
    if (!found) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < i; ++j)
        if (mean_followers[j] > mean_followers[best]) best = j;
      tree.parents[i - 1] = static_cast<std::uint32_t>(best);
      if (fallback != nullptr) (*fallback)[i - 1] = true;
    }
  }
  return tree;
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Naive: return "naive";
    case Method::Tid: return "tid";
    case Method::Pdi: return "pdi";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "naive") return Method::Naive;
  if (name == "tid") return Method::Tid;
  if (name == "pdi") return Method::Pdi;
  return std::nullopt;
}

bool same_setting(const Setting& a, const Setting& b) {
  if (a.method != b.method) return false;
  return a.method != Method::Pdi ||
         (a.params.gamma == b.params.gamma && a.params.alpha == b.params.alpha);
}

std::vector<Setting> default_pdi_grid() {
  std::vector<Setting> grid;
  for (double g : {0.25, 0.5, 0.75})
    for (double a : {1.1, 2.0, 3.0}) grid.push_back(Setting{Method::Pdi, PdiParams{g, a, 1.0}});
  return grid;
}

void batch_reconstruct(const std::vector<Cascade>& corpus, const ProfileMap& profiles,
                       const FollowerGraph* followers, std::span<const Setting> settings,
                       BatchOptions& options,
                       const std::function<void(std::span<const TreeRecord>)>& sink) {
  if (options.realizations < 1) throw Error(ErrorCode::InvalidArgument, "realizations must be >= 1");
  for (const auto& s : settings) {
    if (s.method == Method::Pdi) s.params.validate();
    if (s.method == Method::Tid && followers == nullptr)
      throw Error(ErrorCode::InvalidArgument, "TID reconstruction needs a follower graph");
  }
  struct UnitResult {
    std::vector<TreeRecord> records;
    std::size_t fallback_edges = 0;
  };
  const std::size_t n_settings = settings.size();
  const std::size_t units = corpus.size() * n_settings;
  options.tid_fallback_edges = 0;

  auto produce = [&](std::size_t unit) {
    const Cascade& cascade = corpus[unit / n_settings];
    const Setting& setting = settings[unit % n_settings];
    UnitResult out;
    switch (setting.method) {
      case Method::Naive:
        out.records.push_back(TreeRecord{setting, naive_reconstruct(cascade)});
        break;
      case Method::Tid: {
        std::vector<bool> fb;
        out.records.push_back(
            TreeRecord{setting, tid_reconstruct(cascade, *followers, profiles, &fb)});
        out.fallback_edges = static_cast<std::size_t>(std::count(fb.begin(), fb.end(), true));
        break;
      }
      case Method::Pdi: {
        const auto f = event_followers(cascade, profiles);
        std::vector<Xoshiro256> streams;
        streams.reserve(options.realizations);
        for (std::uint32_t r = 0; r < options.realizations; ++r)
          streams.push_back(make_stream(options.master_seed, cascade.cascade_id, r));
        auto trees = pdi_reconstruct_many(cascade, f, setting.params, streams);
        out.records.reserve(trees.size());
        for (auto& t : trees) out.records.push_back(TreeRecord{setting, std::move(t)});
        break;
      }
    }
    return out;
  };
  auto consume = [&](std::size_t, UnitResult&& r) {
    options.tid_fallback_edges += r.fallback_edges;
    sink(r.records);
  };
  ordered_parallel_map(units, options.workers, std::max<std::size_t>(64, 8 * options.workers),
                       produce, consume);
}

void check_tree(const CascadeTree& tree) {
  for (std::size_t k = 0; k < tree.parents.size(); ++k)
    if (tree.parents[k] > k)
      throw Error(ErrorCode::InvalidArgument,
                  "tree " + tree.cascade_id + ": parent of event " + std::to_string(k + 1) +
                      " does not precede it");
}

}  // namespace reshare
