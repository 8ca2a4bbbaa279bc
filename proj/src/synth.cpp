#include "reshare/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "reshare/error.hpp"
#include "reshare/parallel.hpp"
#include "reshare/rng.hpp"

namespace reshare {

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidParams, what); };
  if (min_size < 2) fail("min_size must be at least 2");
  if (max_size < min_size) fail("max_size must be >= min_size");
  if (!(size_exponent >= 0.0)) fail("size_exponent must be non-negative");
  if (follower_law == FollowerLaw::LogNormal && !(follower_sigma >= 0.0))
    fail("follower_sigma must be non-negative");
  if (follower_law == FollowerLaw::PowerLaw &&
      (!(follower_exponent > 1.0) || !(follower_xmin > 0.0)))
    fail("power-law followers need exponent > 1 and xmin > 0");
  if (!(gap_exponent > 1.0)) fail("gap_exponent must exceed 1");
  if (!(gap_min > 0.0)) fail("gap_min must be positive");
  if (!(follow_probability >= 0.0 && follow_probability <= 1.0))
    fail("follow_probability must lie in [0, 1]");
  if (model == AttachmentModel::Pdi) generative.validate();
}

std::vector<Cascade> SynthCorpus::corpus() const {
  std::vector<Cascade> out;
  out.reserve(cascades.size());
  for (const auto& g : cascades) out.push_back(g.cascade);
  return out;
}

std::vector<CascadeTree> SynthCorpus::truths() const {
  std::vector<CascadeTree> out;
  out.reserve(cascades.size());
  for (const auto& g : cascades) out.push_back(g.truth);
  return out;
}

namespace {

// Inverse-CDF sampler over a fixed weight table.
class TableSampler {
 public:
  explicit TableSampler(const std::vector<double>& weights) : cdf_(weights.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) cdf_[i] = acc += weights[i];
  }

  std::size_t operator()(Xoshiro256& rng) const {
    const double x = rng.uniform() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), x);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

std::string numbered(char prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i);
  return buf;
}

std::int64_t draw_followers(const SynthConfig& cfg, Xoshiro256& rng) {
  double f = 0.0;
  if (cfg.follower_law == FollowerLaw::LogNormal) {
    f = std::exp(cfg.follower_mu + cfg.follower_sigma * rng.normal());
  } else {
    f = cfg.follower_xmin * std::pow(1.0 - rng.uniform(), -1.0 / (cfg.follower_exponent - 1.0));
  }
  return static_cast<std::int64_t>(std::min(std::floor(f), 1e9));
}

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& config, unsigned workers) {
  config.validate();
  const std::size_t n_users =
      config.n_users > 0 ? config.n_users : std::max<std::size_t>(200, 5 * config.n_cascades);

  std::vector<std::string> user_ids(n_users);
  std::vector<std::int64_t> user_followers(n_users);
  {
    Xoshiro256 rng = make_stream(config.seed, "synth-users", 0);
    for (std::size_t u = 0; u < n_users; ++u) {
      user_ids[u] = numbered('u', u, 7);
      user_followers[u] = draw_followers(config, rng);
    }
  }
  std::vector<double> size_weights;
  for (std::size_t s = config.min_size; s <= config.max_size; ++s)
    size_weights.push_back(std::pow(static_cast<double>(s), -config.size_exponent));
  const TableSampler size_sampler(size_weights);
  std::vector<double> root_weights(n_users, 1.0);
  if (config.root_by_followers)
    for (std::size_t u = 0; u < n_users; ++u)
      root_weights[u] = static_cast<double>(user_followers[u]) + 1.0;
  const TableSampler root_sampler(root_weights);

  auto produce = [&](std::size_t c) {
    Xoshiro256 rng = make_stream(config.seed, "synth-cascade", c);
    GroundTruthCascade g;
    g.cascade.cascade_id = numbered('c', c, 6);
    const std::size_t n = config.min_size + size_sampler(rng);

    std::vector<std::size_t> users;
    users.reserve(n);
    std::unordered_set<std::size_t> taken;
    users.push_back(root_sampler(rng));
    taken.insert(users.back());
    while (users.size() < n) {
      std::size_t u = rng.below(n_users);
      for (int tries = 0; taken.contains(u) && tries < 32; ++tries) u = rng.below(n_users);
      taken.insert(u);
      users.push_back(u);
    }

    std::vector<std::int64_t> times(n);
    times[0] = 1'700'000'000 + static_cast<std::int64_t>(rng.below(7 * 86400));
    for (std::size_t i = 1; i < n; ++i) {
      const double gap = config.gap_min *
                         std::pow(1.0 - rng.uniform(), -1.0 / (config.gap_exponent - 1.0));
      times[i] = times[i - 1] + static_cast<std::int64_t>(std::min(std::floor(gap), 1e7));
    }
    for (std::size_t i = 0; i < n; ++i)
      g.cascade.events.push_back(ReshareEvent{g.cascade.cascade_id + "-" + std::to_string(i),
                                              user_ids[users[i]], times[i],
                                              user_followers[users[i]]});

    std::vector<double> followers(n);
    for (std::size_t i = 0; i < n; ++i) followers[i] = static_cast<double>(user_followers[users[i]]);
    g.truth.cascade_id = g.cascade.cascade_id;
    g.truth.parents.resize(n - 1);
    PdiWorkspace ws;
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t parent = 0;
      if (config.model == AttachmentModel::Uniform) {
        parent = rng.below(i);
      } else if (i > 1) {
        pdi_probs_into(times, followers, i, config.generative, ws);
        parent = TableSampler(ws.probs)(rng);
      }
      g.truth.parents[i - 1] = static_cast<std::uint32_t>(parent);
    }

    // Every resharer follows its true parent, plus random extra follows
    // toward earlier participants.
    for (std::size_t i = 1; i < n; ++i) {
      const std::size_t p = g.truth.parents[i - 1];
      if (users[i] != users[p]) g.follows.emplace_back(user_ids[users[i]], user_ids[users[p]]);
      for (std::size_t j = 0; j < i; ++j) {
        if (j == p || users[i] == users[j]) continue;
        if (rng.uniform() < config.follow_probability)
          g.follows.emplace_back(user_ids[users[i]], user_ids[users[j]]);
      }
    }
    return g;
  };

  SynthCorpus out;
  out.cascades.reserve(config.n_cascades);
  ordered_parallel_map(config.n_cascades, workers, 256, produce,
                       [&](std::size_t, GroundTruthCascade&& g) {
                         for (const auto& [a, b] : g.follows) out.followers.add_edge(a, b);
                         out.cascades.push_back(std::move(g));
                       });
  return out;
}

double recovery_score(const CascadeTree& truth, const CascadeTree& inferred) {
  if (truth.parents.size() != inferred.parents.size())
    throw Error(ErrorCode::MismatchedCascade, "trees differ in size");
  if (truth.parents.empty()) throw Error(ErrorCode::TooSmall, "tree has no reshares");
  std::size_t hit = 0;
  for (std::size_t k = 0; k < truth.parents.size(); ++k)
    hit += truth.parents[k] == inferred.parents[k] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(truth.parents.size());
}

double random_recovery_baseline(std::size_t size) {
  if (size < 2) throw Error(ErrorCode::TooSmall, "baseline needs at least 2 events");
  double acc = 0.0;
  for (std::size_t i = 1; i < size; ++i) acc += 1.0 / static_cast<double>(i);
  return acc / static_cast<double>(size - 1);
}

}  // namespace reshare
