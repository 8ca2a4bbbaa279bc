#include "reshare/network.hpp"

#include <algorithm>
#include <cmath>

#include "reshare/error.hpp"

namespace reshare {

std::uint64_t ResharingNetwork::total_weight() const {
  std::uint64_t total = 0;
  for (const auto& [edge, w] : edges) total += w;
  return total;
}

void ResharingNetwork::merge(const ResharingNetwork& other) {
  nodes.insert(other.nodes.begin(), other.nodes.end());
  for (const auto& [edge, w] : other.edges) edges[edge] += w;
}

ResharingNetwork build_network(std::span<const CascadeTree> trees,
                               const std::vector<Cascade>& corpus) {
  ResharingNetwork net;
  std::unordered_map<std::string_view, const Cascade*> by_id;
  for (const auto& c : corpus) {
    by_id.emplace(c.cascade_id, &c);
    for (const auto& e : c.events) net.nodes.insert(e.user_id);
  }
  for (const auto& tree : trees) {
    const auto it = by_id.find(tree.cascade_id);
    if (it == by_id.end())
      throw Error(ErrorCode::UnknownCascade, "tree for unknown cascade " + tree.cascade_id);
    const Cascade& c = *it->second;
    if (tree.size() != c.size())
      throw Error(ErrorCode::MismatchedCascade, "tree size differs from cascade " + c.cascade_id);
    for (std::size_t i = 1; i < c.size(); ++i)
      ++net.edges[{c.events[tree.parent_of(i)].user_id, c.events[i].user_id}];
  }
  return net;
}

StrengthTable node_strength(const ResharingNetwork& net) {
  StrengthTable table;
  for (const auto& u : net.nodes) table.emplace(u, 0);
  for (const auto& [edge, w] : net.edges) table[edge.first] += w;
  return table;
}

namespace {

std::size_t top_k_count(std::size_t n, double k) {
  if (!(k > 0.0 && k <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "top-k fraction must lie in (0, 1]");
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty strength table");
  // Guard against k * n landing a hair above an integer (0.07 * 100).
  const auto take = static_cast<std::size_t>(std::ceil(k * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(take, 1, n);
}

}  // namespace

std::set<std::string> top_k_fraction(const StrengthTable& strengths, double k) {
  const std::size_t n = strengths.size();
  const std::size_t take = top_k_count(n, k);

  std::vector<std::pair<std::uint64_t, const std::string*>> ranked;
  ranked.reserve(n);
  for (const auto& [u, s] : strengths) ranked.emplace_back(s, &u);
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                    ranked.end(), [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first : *a.second < *b.second;
                    });
  std::set<std::string> out;
  for (std::size_t i = 0; i < take; ++i) out.insert(*ranked[i].second);
  return out;
}

std::set<std::uint32_t> top_k_dense(std::span<const std::int64_t> strengths, double k) {
  const std::size_t take = top_k_count(strengths.size(), k);
  std::vector<std::uint32_t> order(strengths.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      return strengths[a] != strengths[b] ? strengths[a] > strengths[b] : a < b;
                    });
  return std::set<std::uint32_t>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
}

CorpusIndex::CorpusIndex(const std::vector<Cascade>& corpus) {
  for (const auto& c : corpus)
    for (const auto& e : c.events) user_pos_.emplace(e.user_id, 0);
  users_.reserve(user_pos_.size());
  for (const auto& [u, _] : user_pos_) users_.push_back(u);
  std::sort(users_.begin(), users_.end());
  for (std::uint32_t i = 0; i < users_.size(); ++i) user_pos_[users_[i]] = i;

  event_users_.reserve(corpus.size());
  for (std::size_t ci = 0; ci < corpus.size(); ++ci) {
    cascade_pos_.emplace(corpus[ci].cascade_id, ci);
    std::vector<std::uint32_t> ev;
    ev.reserve(corpus[ci].size());
    for (const auto& e : corpus[ci].events) ev.push_back(user_pos_.at(e.user_id));
    event_users_.push_back(std::move(ev));
  }
}

std::uint32_t CorpusIndex::user(const std::string& id) const {
  const auto it = user_pos_.find(id);
  if (it == user_pos_.end()) throw Error(ErrorCode::InvalidArgument, "unknown user " + id);
  return it->second;
}

std::size_t CorpusIndex::cascade(const std::string& cascade_id) const {
  const auto it = cascade_pos_.find(cascade_id);
  if (it == cascade_pos_.end())
    throw Error(ErrorCode::UnknownCascade, "tree for unknown cascade " + cascade_id);
  return it->second;
}

void accumulate_strength(const CascadeTree& tree, const CorpusIndex& index,
                         std::span<std::int64_t> strengths) {
  const auto users = index.event_users(index.cascade(tree.cascade_id));
  if (users.size() != tree.size())
    throw Error(ErrorCode::MismatchedCascade, "tree size differs from cascade " + tree.cascade_id);
  for (const std::uint32_t p : tree.parents) ++strengths[users[p]];
}

}  // namespace reshare
