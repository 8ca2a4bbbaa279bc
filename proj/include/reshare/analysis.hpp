#pragma once

// Corpus-level analyses over streams of tree records: influence shifts
// between naive and reconstructed networks, and cascade-structure
// comparisons across reconstruction settings.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "reshare/metrics.hpp"
#include "reshare/network.hpp"
#include "reshare/reconstruct.hpp"
#include "reshare/stats.hpp"

namespace reshare {

struct TopKOverlap {
  double k = 0.0;
  std::vector<double> jaccard;  // one per realization
};

struct SettingInfluence {
  Setting setting;
  std::vector<double> rho;  // per realization; NaN when degenerate
  double rho_mean = 0.0;
  double rho_sd = 0.0;  // sample standard deviation
  std::vector<TopKOverlap> top_k;
  std::vector<double> mean_strength_change;  // per user, vs. naive strength
};

struct InfluenceReport {
  std::vector<std::string> users;  // sorted node universe
  std::vector<std::int64_t> naive_strength;
  std::vector<SettingInfluence> settings;  // sorted by (gamma, alpha)
};

struct InfluenceOptions {
  std::vector<double> top_k{0.01, 0.05, 0.10};
  bool exclude_zero_strength = false;  // drop users with zero strength in both networks
};

/// Collects naive and PDI trees, one strength vector per (setting,
/// realization), then compares each with the naive network.
class InfluenceAnalysis {
 public:
  InfluenceAnalysis(const std::vector<Cascade>& corpus, InfluenceOptions options);

  void add(const TreeRecord& record);
  InfluenceReport finish() const;

  const CorpusIndex& index() const noexcept { return index_; }

 private:
  struct Slot {
    Setting setting;
    std::vector<std::vector<std::int64_t>> strengths;  // [realization][user]
  };

  CorpusIndex index_;
  InfluenceOptions options_;
  std::vector<std::int64_t> naive_;
  std::size_t naive_trees_ = 0;
  std::size_t cascades_ = 0;
  std::vector<Slot> slots_;
};

struct SimilarityRow {
  std::string cascade_id;
  Setting setting;
  std::size_t size = 0;
  double mean_pdi_pdi = 0.0;
  std::optional<double> mean_pdi_baseline;
  std::size_t n_pairs = 0;
};

struct CcdfRow {
  MetricKind metric;
  Setting setting;
  std::vector<CcdfPoint> curve;
};

struct TrendRow {
  Setting setting;
  std::string comparison;  // "pdi_pdi" or "pdi_baseline"
  TrendResult trend;
};

struct StructureReport {
  std::vector<SettingSamples> samples;  // per-cascade mean metrics; PDI sorted, TID last
  std::vector<SimilarityRow> similarity;
  std::vector<CcdfRow> ccdf;
  std::vector<KsRow> ks;
  std::vector<TrendRow> trend;
};

struct StructureOptions {
  std::vector<Setting> required;  // KS settings; empty skips the KS table
  std::size_t min_similarity_size = 3;
  std::size_t bins = 500;
  std::size_t bootstraps = 1000;
  double ci = 0.95;
  std::uint64_t seed = 0;
};

/// Consumes records grouped by cascade (the order batch_reconstruct emits).
/// Per-tree metric rows and per-cascade similarity rows stream to the given
/// CSV sinks when set.
class StructureAnalysis {
 public:
  StructureAnalysis(const std::vector<Cascade>& corpus, StructureOptions options,
                    std::ostream* metrics_csv = nullptr, std::ostream* similarity_csv = nullptr);

  void add(TreeRecord&& record);
  StructureReport finish();

  static void write_metrics_header(std::ostream& out);
  static void write_similarity_header(std::ostream& out);

 private:
  struct SettingState {
    Setting setting;
    std::array<std::vector<double>, 3> values;
    std::vector<std::size_t> positions;  // corpus index of each value
  };

  void flush_group();
  SettingState& state_for(const Setting& s);

  const std::vector<Cascade>& corpus_;
  CorpusIndex index_;
  StructureOptions options_;
  std::ostream* metrics_csv_;
  std::ostream* similarity_csv_;

  std::optional<std::size_t> current_;
  std::vector<TreeRecord> group_;
  std::vector<bool> seen_;
  std::vector<SettingState> states_;
  std::vector<SimilarityRow> similarity_;
};

/// Orders settings by method (PDI, TID, naive), then gamma, then alpha.
bool setting_less(const Setting& a, const Setting& b);

}  // namespace reshare
