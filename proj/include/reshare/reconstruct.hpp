#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reshare/rng.hpp"
#include "reshare/types.hpp"

namespace reshare {

/// Weights of the PDI parent model: gamma on the followers term, power-law
/// recency exponent alpha, minimum time delay delta_min in seconds.
struct PdiParams {
  double gamma = 0.5;
  double alpha = 2.0;
  double delta_min = 1.0;

  void validate() const;
  bool operator==(const PdiParams&) const = default;
};

struct ParentDistribution {
  std::size_t child_index = 0;
  std::vector<double> probs;  // probs[j] = chance that event j is the parent
};

/// Followers-proportional probabilities; uniform when every count is zero.
std::vector<double> followers_probs(std::span<const double> candidate_mean_followers);

/// Power-law recency probabilities over time gaps. Gaps below delta_min are
/// clamped to delta_min.
std::vector<double> recency_probs(std::span<const double> deltas_seconds, double alpha,
                                  double delta_min);

/// Mean follower count of each event's user, in event order.
std::vector<double> event_followers(const Cascade& cascade, const ProfileMap& profiles);

/// Reusable buffers for the per-child distribution.
struct PdiWorkspace {
  std::vector<double> deltas;
  std::vector<double> recency;
  std::vector<double> probs;
  std::vector<double> ones;
};

/// Fills ws.probs[0..child) for one child; the inner loops run through the
/// active SIMD kernel table.
void pdi_probs_into(std::span<const std::int64_t> times, std::span<const double> followers,
                    std::size_t child, const PdiParams& params, PdiWorkspace& ws);

ParentDistribution pdi_parent_distribution(const Cascade& cascade, std::size_t child_index,
                                           const ProfileMap& profiles, const PdiParams& params);

/// Samples every parent independently; one uniform draw per child.
CascadeTree pdi_reconstruct(const Cascade& cascade, const ProfileMap& profiles,
                            const PdiParams& params, Xoshiro256& rng);

/// Draws `streams.size()` realizations at once, realization r consuming
/// streams[r]. Produces the same trees as repeated pdi_reconstruct calls.
std::vector<CascadeTree> pdi_reconstruct_many(const Cascade& cascade,
                                              std::span<const double> followers,
                                              const PdiParams& params,
                                              std::span<Xoshiro256> streams,
                                              std::uint32_t first_realization = 0);

CascadeTree naive_reconstruct(const Cascade& cascade);

/// Most recent prior poster the resharer follows; without one, the prior
/// poster with the highest mean follower count. `fallback`, when given,
/// receives one flag per reshare marking the fallback edges.
CascadeTree tid_reconstruct(const Cascade& cascade, const FollowerGraph& followers,
                            const ProfileMap& profiles, std::vector<bool>* fallback = nullptr);

enum class Method { Naive, Tid, Pdi };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

/// A reconstruction method together with its PDI parameters (unused for the
/// deterministic methods).
struct Setting {
  Method method = Method::Pdi;
  PdiParams params;

  bool operator==(const Setting&) const = default;
};

/// Settings are the same when the method matches and, for PDI, gamma and
/// alpha match.
bool same_setting(const Setting& a, const Setting& b);

/// The default 3 x 3 grid, gamma outer and alpha inner.
std::vector<Setting> default_pdi_grid();

struct BatchOptions {
  std::uint32_t realizations = 1;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
  std::size_t tid_fallback_edges = 0;  // filled in by batch_reconstruct
};

struct TreeRecord {
  Setting setting;
  CascadeTree tree;
};

/// Reconstructs every (cascade, setting, realization) unit and hands the
/// records to `sink` ordered by cascade, then setting, then realization,
/// independent of the worker count. Realization r of cascade c draws from
/// make_stream(master_seed, c.cascade_id, r).
void batch_reconstruct(const std::vector<Cascade>& corpus, const ProfileMap& profiles,
                       const FollowerGraph* followers, std::span<const Setting> settings,
                       BatchOptions& options,
                       const std::function<void(std::span<const TreeRecord>)>& sink);

/// Throws Error(InvalidArgument) unless parents[k] <= k for every entry.
void check_tree(const CascadeTree& tree);

}  // namespace reshare
