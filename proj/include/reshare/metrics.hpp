#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "reshare/types.hpp"

namespace reshare {

struct CascadeMetrics {
  std::string cascade_id;
  std::uint32_t realization = 0;
  std::size_t size = 0;
  std::size_t depth = 0;
  std::size_t max_breadth = 0;
  double structural_virality = 0.0;
};

/// Longest root-to-node hop count.
std::size_t depth(const CascadeTree& tree);

/// Largest number of nodes sharing one hop distance d >= 1 from the root.
std::size_t max_breadth(const CascadeTree& tree);

/// Mean shortest-path length over all unordered node pairs, from the Wiener
/// index: every edge separates s and n - s nodes and lies on s * (n - s) paths.
double structural_virality(const CascadeTree& tree);

CascadeMetrics compute_metrics(const CascadeTree& tree);

/// Jaccard index of the two trees' (parent, child) event-index edge sets.
double tree_jaccard(const CascadeTree& a, const CascadeTree& b);

struct SimilaritySummary {
  double mean_pairwise = 0.0;
  std::size_t n_pairs = 0;
  std::optional<double> mean_vs_baseline;
  std::size_t n_baseline = 0;
};

/// Mean Jaccard over all unordered realization pairs, and against the
/// baseline tree when one is given.
SimilaritySummary pairwise_similarity_summary(std::span<const CascadeTree> realizations,
                                              const CascadeTree* baseline = nullptr);

}  // namespace reshare
