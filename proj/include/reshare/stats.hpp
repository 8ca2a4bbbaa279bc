#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reshare/error.hpp"
#include "reshare/reconstruct.hpp"

namespace reshare {

struct CorrelationResult {
  double rho = 0.0;
  std::size_t n = 0;
};

/// Fractional ranks, 1-based; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> x);

/// Pearson correlation of average ranks. Throws Error(Degenerate) when
/// either side has no rank variance.
CorrelationResult spearman_rho(std::span<const double> x, std::span<const double> y);

template <class T>
double jaccard_sets(const std::set<T>& a, const std::set<T>& b) {
  if (a.empty() && b.empty()) throw Error(ErrorCode::Degenerate, "Jaccard of two empty sets");
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double p_adjusted = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// sup |ECDF_a - ECDF_b| over all values.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

double bonferroni(double p, std::size_t family_size);

/// Two-sample KS test with the asymptotic p-value at effective size
/// n1 * n2 / (n1 + n2), Bonferroni-adjusted over `family_size` tests.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                       std::size_t family_size);

/// "***" below 0.001, "**" below 0.01, "*" below 0.05, otherwise empty.
std::string_view significance_stars(double p);

struct CcdfPoint {
  double x = 0.0;
  double survival = 0.0;  // P(X >= x)
};

std::vector<CcdfPoint> ccdf(std::span<const double> values);

/// Linear-interpolated quantile (type 7) of an ascending sample.
double quantile_sorted(std::span<const double> sorted, double q);

struct TrendBin {
  double x_center = 0.0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t count = 0;
};

struct TrendResult {
  std::vector<TrendBin> bins;
  bool bins_reduced = false;  // fewer points than requested bins
};

/// Equal-count bins over x with the per-bin mean of y and a percentile
/// bootstrap interval at level `ci`. Bin b resamples from
/// make_stream(seed, "trend-bin", b).
TrendResult binned_trend(std::span<const double> x, std::span<const double> y,
                         std::size_t n_bins, std::size_t n_boot, double ci, std::uint64_t seed);

enum class MetricKind { Depth, MaxBreadth, StructuralVirality };

inline constexpr std::array<MetricKind, 3> kAllMetrics{
    MetricKind::Depth, MetricKind::MaxBreadth, MetricKind::StructuralVirality};

std::string_view to_string(MetricKind metric);

/// Per-cascade metric values of one reconstruction setting.
struct SettingSamples {
  Setting setting;
  std::array<std::vector<double>, 3> values;  // indexed like kAllMetrics
};

struct KsRow {
  MetricKind metric;
  Setting first;
  Setting second;
  KsResult result;
};

/// KS tests between every unordered pair of `required` settings for every
/// metric, in metric order then pair order; each metric is its own
/// Bonferroni family of C(k, 2) tests. Throws Error(MissingSetting) naming
/// every required setting absent from `samples`.
std::vector<KsRow> comparison_harness(std::span<const SettingSamples> samples,
                                      std::span<const Setting> required);

}  // namespace reshare
