#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace reshare {

/// One post or reshare inside a cascade.
struct ReshareEvent {
  std::string post_id;
  std::string user_id;
  std::int64_t t = 0;          // seconds since epoch
  std::int64_t followers = 0;  // follower count observed at posting time

  bool operator==(const ReshareEvent&) const = default;
};

/// Time-ordered events of one cascade. events[0] is the original post.
struct Cascade {
  std::string cascade_id;
  std::vector<ReshareEvent> events;

  std::size_t size() const noexcept { return events.size(); }
  bool operator==(const Cascade&) const = default;
};

/// One reconstruction of a cascade. parents[k] is the parent index of event
/// k + 1, so the vector holds size() - 1 entries and parents[k] <= k.
struct CascadeTree {
  std::string cascade_id;
  std::vector<std::uint32_t> parents;
  std::uint32_t realization = 0;

  std::size_t size() const noexcept { return parents.size() + 1; }
  std::uint32_t parent_of(std::size_t event) const { return parents[event - 1]; }
  bool operator==(const CascadeTree&) const = default;
};

/// Directed follow relation; an edge (a, b) means a follows b.
class FollowerGraph {
 public:
  /// Returns false for self-loops and duplicates.
  bool add_edge(const std::string& follower, const std::string& followee);
  bool follows(const std::string& follower, const std::string& followee) const;
  std::size_t edge_count() const noexcept { return edges_; }

  /// All edges sorted by (follower, followee).
  std::vector<std::pair<std::string, std::string>> sorted_edges() const;

 private:
  std::unordered_map<std::string, std::unordered_set<std::string>> out_;
  std::size_t edges_ = 0;
};

struct UserProfile {
  std::string user_id;
  double mean_followers = 0.0;
  std::size_t n_events = 0;
};

using ProfileMap = std::unordered_map<std::string, UserProfile>;

}  // namespace reshare
