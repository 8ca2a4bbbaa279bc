#include "reshare/stats.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "reshare/rng.hpp"

namespace reshare {

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

CorrelationResult spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::InvalidArgument, "spearman_rho needs paired samples of equal length");
  if (x.size() < 2) throw Error(ErrorCode::InvalidArgument, "spearman_rho needs n >= 2");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const std::size_t n = x.size();
  const double mean = (static_cast<double>(n) + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw Error(ErrorCode::Degenerate, "spearman_rho: a sample has no rank variance");
  const double rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return CorrelationResult{rho, n};
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidArgument, "KS test needs samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const auto n1 = static_cast<std::int64_t>(sa.size());
  const auto n2 = static_cast<std::int64_t>(sb.size());
  std::int64_t i = 0, j = 0, best = 0;
  // |i/n1 - j/n2| kept as the integer |i*n2 - j*n1| until the end.
  while (i < n1 && j < n2) {
    const double v = std::min(sa[static_cast<std::size_t>(i)], sb[static_cast<std::size_t>(j)]);
    while (i < n1 && sa[static_cast<std::size_t>(i)] == v) ++i;
    while (j < n2 && sb[static_cast<std::size_t>(j)] == v) ++j;
    best = std::max(best, std::abs(i * n2 - j * n1));
  }
  return static_cast<double>(best) / (static_cast<double>(n1) * static_cast<double>(n2));
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-transformed series converges fast for small lambda.
    const double y = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k < 64; ++k) {
      const double m = 2.0 * k - 1.0;
      const double term = std::exp(-m * m * y);
      cdf += term;
      if (term < 1e-18) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  for (int k = 1; k < 64; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

double bonferroni(double p, std::size_t family_size) {
  if (family_size < 1) throw Error(ErrorCode::InvalidArgument, "family size must be >= 1");
  return std::min(1.0, static_cast<double>(family_size) * p);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                       std::size_t family_size) {
  KsResult r;
  r.statistic = ks_statistic(a, b);
  r.n1 = a.size();
  r.n2 = b.size();
  const double en = static_cast<double>(r.n1) * static_cast<double>(r.n2) /
                    static_cast<double>(r.n1 + r.n2);
  r.p_value = kolmogorov_survival(r.statistic * std::sqrt(en));
  r.p_adjusted = bonferroni(r.p_value, family_size);
  return r;
}

std::string_view significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::vector<CcdfPoint> ccdf(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "CCDF of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  std::vector<CcdfPoint> out;
  for (std::size_t i = 0; i < v.size();) {
    out.push_back(CcdfPoint{v[i], static_cast<double>(v.size() - i) / n});
    std::size_t j = i + 1;
    while (j < v.size() && v[j] == v[i]) ++j;
    i = j;
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

namespace {

// Mean taken relative to the first value, so a constant sample returns that
// value exactly.
template <class Get>
double shifted_mean(std::size_t n, Get&& get) {
  const double base = get(0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += get(i) - base;
  return base + acc / static_cast<double>(n);
}

}  // namespace

TrendResult binned_trend(std::span<const double> x, std::span<const double> y,
                         std::size_t n_bins, std::size_t n_boot, double ci, std::uint64_t seed) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "x and y differ in length");
  if (x.empty()) throw Error(ErrorCode::InvalidArgument, "binned_trend of an empty sample");
  if (n_bins < 1 || n_boot < 1) throw Error(ErrorCode::InvalidArgument, "bins and bootstraps >= 1");
  if (!(ci > 0.0 && ci < 1.0)) throw Error(ErrorCode::InvalidArgument, "ci must lie in (0, 1)");

  TrendResult out;
  const std::size_t n = x.size();
  if (n_bins > n) {
    n_bins = n;
    out.bins_reduced = true;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  const std::size_t base = n / n_bins;
  const std::size_t extra = n % n_bins;
  std::vector<double> boot(n_boot);
  std::size_t start = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const std::size_t count = base + (b < extra ? 1 : 0);
    const std::size_t* idx = order.data() + start;
    TrendBin bin;
    bin.count = count;
    bin.x_center = shifted_mean(count, [&](std::size_t i) { return x[idx[i]]; });
    bin.mean = shifted_mean(count, [&](std::size_t i) { return y[idx[i]]; });

    Xoshiro256 rng = make_stream(seed, "trend-bin", b);
    std::vector<std::size_t> pick(count);
    for (std::size_t s = 0; s < n_boot; ++s) {
      for (auto& p : pick) p = idx[rng.below(count)];
      boot[s] = shifted_mean(count, [&](std::size_t i) { return y[pick[i]]; });
    }
    std::sort(boot.begin(), boot.end());
    const double tail = (1.0 - ci) / 2.0;
    bin.ci_low = quantile_sorted(boot, tail);
    bin.ci_high = quantile_sorted(boot, 1.0 - tail);
    out.bins.push_back(bin);
    start += count;
  }
  return out;
}

std::string_view to_string(MetricKind metric) {
  switch (metric) {
    case MetricKind::Depth: return "depth";
    case MetricKind::MaxBreadth: return "max_breadth";
    case MetricKind::StructuralVirality: return "structural_virality";
  }
  return "unknown";
}

std::vector<KsRow> comparison_harness(std::span<const SettingSamples> samples,
                                      std::span<const Setting> required) {
  std::vector<const SettingSamples*> chosen;
  std::string missing;
  for (const auto& want : required) {
    const auto it = std::find_if(samples.begin(), samples.end(), [&](const SettingSamples& s) {
      return same_setting(s.setting, want);
    });
    if (it == samples.end()) {
      if (!missing.empty()) missing += ", ";
      missing += std::string(to_string(want.method));
      if (want.method == Method::Pdi)
        missing += "(gamma=" + std::to_string(want.params.gamma) +
                   ", alpha=" + std::to_string(want.params.alpha) + ")";
      continue;
    }
    chosen.push_back(&*it);
  }
  if (!missing.empty()) throw Error(ErrorCode::MissingSetting, "absent settings: " + missing);

  const std::size_t k = chosen.size();
  const std::size_t family = k * (k - 1) / 2;
  std::vector<KsRow> rows;
  rows.reserve(3 * family);
  for (std::size_t m = 0; m < kAllMetrics.size(); ++m)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b)
        rows.push_back(KsRow{kAllMetrics[m], chosen[a]->setting, chosen[b]->setting,
                             ks_two_sample(chosen[a]->values[m], chosen[b]->values[m], family)});
  return rows;
}

}  // namespace reshare
