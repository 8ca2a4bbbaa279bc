#include "reshare/metrics.hpp"

#include <algorithm>
#include <vector>

#include "reshare/error.hpp"
#include "reshare/reconstruct.hpp"
#include "reshare/simd/kernels.hpp"

namespace reshare {
namespace {

void require_tree(const CascadeTree& tree) {
  if (tree.size() < 2)
    throw Error(ErrorCode::TooSmall, "tree " + tree.cascade_id + " has fewer than 2 nodes");
  check_tree(tree);
}

std::vector<std::uint32_t> levels(const CascadeTree& tree) {
  std::vector<std::uint32_t> level(tree.size(), 0);
  for (std::size_t i = 1; i < tree.size(); ++i) level[i] = level[tree.parent_of(i)] + 1;
  return level;
}

void require_same_cascade(const CascadeTree& a, const CascadeTree& b) {
  if (a.cascade_id != b.cascade_id)
    throw Error(ErrorCode::MismatchedCascade,
                "comparing trees of " + a.cascade_id + " and " + b.cascade_id);
  if (a.size() != b.size())
    throw Error(ErrorCode::MismatchedCascade, "trees of " + a.cascade_id + " differ in size");
}

double jaccard_from_overlap(std::size_t overlap, std::size_t edges) {
  return static_cast<double>(overlap) / static_cast<double>(2 * edges - overlap);
}

}  // namespace

std::size_t depth(const CascadeTree& tree) {
  require_tree(tree);
  const auto level = levels(tree);
  return *std::max_element(level.begin(), level.end());
}

std::size_t max_breadth(const CascadeTree& tree) {
  require_tree(tree);
  const auto level = levels(tree);
  std::vector<std::size_t> count(tree.size(), 0);
  for (std::size_t i = 1; i < level.size(); ++i) ++count[level[i]];
  return *std::max_element(count.begin(), count.end());
}

double structural_virality(const CascadeTree& tree) {
  require_tree(tree);
  const std::size_t n = tree.size();
  std::vector<std::uint64_t> subtree(n, 1);
  // Children follow their parents, so a reverse sweep sees each subtree
  // complete before folding it into the parent.
  for (std::size_t i = n; i-- > 1;) subtree[tree.parent_of(i)] += subtree[i];
  std::uint64_t wiener = 0;
  for (std::size_t i = 1; i < n; ++i) wiener += subtree[i] * (n - subtree[i]);
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(wiener) / pairs;
}

CascadeMetrics compute_metrics(const CascadeTree& tree) {
  require_tree(tree);
  CascadeMetrics m;
  m.cascade_id = tree.cascade_id;
  m.realization = tree.realization;
  m.size = tree.size();
  const auto level = levels(tree);
  std::vector<std::size_t> count(tree.size(), 0);
  for (std::size_t i = 1; i < level.size(); ++i) ++count[level[i]];
  m.depth = *std::max_element(level.begin(), level.end());
  m.max_breadth = *std::max_element(count.begin(), count.end());
  m.structural_virality = structural_virality(tree);
  return m;
}

double tree_jaccard(const CascadeTree& a, const CascadeTree& b) {
  require_same_cascade(a, b);
  if (a.parents.empty()) return 1.0;
  return jaccard_from_overlap(simd::count_equal(a.parents, b.parents), a.parents.size());
}

SimilaritySummary pairwise_similarity_summary(std::span<const CascadeTree> realizations,
                                              const CascadeTree* baseline) {
  if (realizations.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "similarity summary needs at least 2 realizations");
  for (const auto& t : realizations) require_same_cascade(realizations.front(), t);
  if (baseline != nullptr) require_same_cascade(realizations.front(), *baseline);

  const std::size_t edges = realizations.front().parents.size();
  const auto& k = simd::active();
  SimilaritySummary out;
  double total = 0.0;
  for (std::size_t a = 0; a < realizations.size(); ++a)
    for (std::size_t b = a + 1; b < realizations.size(); ++b) {
      const std::size_t overlap =
          k.count_equal(realizations[a].parents.data(), realizations[b].parents.data(), edges);
      total += edges == 0 ? 1.0 : jaccard_from_overlap(overlap, edges);
      ++out.n_pairs;
    }
  out.mean_pairwise = total / static_cast<double>(out.n_pairs);
  if (baseline != nullptr) {
    double vs = 0.0;
    for (const auto& t : realizations)
      vs += edges == 0 ? 1.0
                       : jaccard_from_overlap(
                             k.count_equal(t.parents.data(), baseline->parents.data(), edges),
                             edges);
    out.n_baseline = realizations.size();
    out.mean_vs_baseline = vs / static_cast<double>(out.n_baseline);
  }
  return out;
}

}  // namespace reshare
