#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "reshare/types.hpp"

namespace reshare {

/// Weighted resharing network: edge (src, dst) with weight w means dst
/// reshared src's content w times. The node set covers every corpus user,
/// including users that never gain an edge.
struct ResharingNetwork {
  std::set<std::string> nodes;
  std::map<std::pair<std::string, std::string>, std::uint64_t> edges;

  std::uint64_t total_weight() const;
  /// Adds all nodes and edge weights of `other`.
  void merge(const ResharingNetwork& other);
};

using StrengthTable = std::map<std::string, std::uint64_t>;

ResharingNetwork build_network(std::span<const CascadeTree> trees,
                               const std::vector<Cascade>& corpus);

StrengthTable node_strength(const ResharingNetwork& net);

/// The ceil(k * N) strongest users; ties at the cut go to the smaller id.
std::set<std::string> top_k_fraction(const StrengthTable& strengths, double k);

/// top_k_fraction over a dense strength vector; ties go to the lower index.
std::set<std::uint32_t> top_k_dense(std::span<const std::int64_t> strengths, double k);

/// Dense user and cascade numbering for aggregating many realizations
/// without building edge maps.
class CorpusIndex {
 public:
  explicit CorpusIndex(const std::vector<Cascade>& corpus);

  std::size_t user_count() const noexcept { return users_.size(); }
  const std::vector<std::string>& users() const noexcept { return users_; }  // sorted
  std::uint32_t user(const std::string& id) const;

  /// Position of a cascade in the corpus; throws Error(UnknownCascade).
  std::size_t cascade(const std::string& cascade_id) const;
  std::span<const std::uint32_t> event_users(std::size_t cascade) const {
    return event_users_[cascade];
  }

 private:
  std::vector<std::string> users_;
  std::unordered_map<std::string, std::uint32_t> user_pos_;
  std::unordered_map<std::string, std::size_t> cascade_pos_;
  std::vector<std::vector<std::uint32_t>> event_users_;
};

/// Adds one tree's reshares to a dense strength vector indexed by user.
void accumulate_strength(const CascadeTree& tree, const CorpusIndex& index,
                         std::span<std::int64_t> strengths);

}  // namespace reshare
