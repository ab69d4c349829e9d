#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "depscore/checks.hpp"
#include "depscore/datasets.hpp"

namespace depscore {

struct Summary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Equal-width bins; the last bin includes its upper edge.
struct Histogram {
    std::vector<double> edges;  // bins + 1 strictly increasing values
    std::vector<std::size_t> counts;
    std::size_t total = 0;
    Summary summary;
};

inline constexpr std::size_t kDefaultBins = 20;

/// Values outside [lo, hi] are clamped into the end bins. Throws
/// std::invalid_argument on empty input, zero bins, or hi <= lo.
Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins = kDefaultBins);
/// Range [min, max] of the values, widened to [v, v + 1] when they are all equal.
Histogram make_histogram(std::span<const double> values, std::size_t bins = kDefaultBins);

struct CandidateCountReport {
    Histogram histogram;
    std::size_t keys = 0;
    std::size_t at_least_threshold = 0;
    double share_at_least_threshold = 0.0;
};

/// Distribution of N across keys and the share with N >= 5. Throws
/// DomainError on an empty dataset.
CandidateCountReport candidate_count_report(const ThreeTupleDataset& dataset, std::size_t bins = kDefaultBins);

struct ScoreDistributionReport {
    Histogram histogram;
    std::uint64_t min_candidates = 5;
    std::size_t qualifying = 0;
    std::size_t above_90 = 0;
    double share_above_90 = 0.0;
};

/// Scores of keys with N >= min_candidates; share strictly above 0.90
/// (compared exactly on S/N). Throws DomainError when nothing qualifies.
ScoreDistributionReport score_distribution_report(const ThreeTupleDataset& dataset, std::uint64_t min_candidates = 5,
                                                  std::size_t bins = kDefaultBins);

struct PrecisionDistributionReport {
    Histogram histogram;
    std::uint64_t min_candidates = 5;
    std::size_t qualifying = 0;
    std::size_t above_15 = 0;
    double share_above_15 = 0.0;
    std::vector<std::pair<TupleKey, double>> precisions;
};

/// Unclamped interval precision per qualifying key; share above 0.15.
PrecisionDistributionReport precision_distribution_report(const ThreeTupleDataset& dataset,
                                                          std::uint64_t min_candidates = 5,
                                                          std::size_t bins = kDefaultBins);

struct PipelineQualityReport {
    std::size_t events = 0;
    double median_check_count = 0.0;
    std::size_t with_build_or_test = 0;
    std::size_t with_useless = 0;
    std::size_t useless_only = 0;
    double share_build_or_test = 0.0;
    double share_useless = 0.0;
    double share_useless_only = 0.0;
    /// Checks per category over all eligible events, Unclassified included.
    std::map<CheckCategory, std::size_t> category_counts;
    std::size_t total_checks = 0;
    /// CI success rate among useless-only pipelines; nullopt if there are none.
    std::optional<double> success_rate_useless_only;
    /// CI success rate among pipelines with a build or test check.
    std::optional<double> success_rate_build_or_test;
};

/// Over candidate updates only. Throws DomainError when there are none.
PipelineQualityReport pipeline_quality_report(std::span<const UpdateEvent> events);

/// Absolute band around the final score.
inline constexpr double kStabilityBand = 0.05;

using ScoreSeries = std::vector<std::pair<Timestamp, double>>;

struct StabilityVerdict {
    TupleKey key;
    bool instantly_stable = false;
    std::size_t stable_index = 0;  // first snapshot after the last out-of-band one
    Timestamp stable_at{};
    std::size_t snapshots = 0;
};

/// Throws std::invalid_argument for fewer than two snapshots.
StabilityVerdict stability_verdict(const TupleKey& key, std::span<const std::pair<Timestamp, double>> series);

struct StabilityReport {
    std::vector<StabilityVerdict> verdicts;
    std::size_t excluded_single_snapshot = 0;
    std::size_t instantly_stable = 0;
    double instantly_stable_share = 0.0;
};

/// Throws DomainError when no key has two or more snapshots.
StabilityReport stability_analysis(const std::map<TupleKey, ScoreSeries>& series);

struct SeriesExtraction {
    std::map<TupleKey, ScoreSeries> series;
    std::size_t skipped_without_time = 0;
};

/// Groups snapshot records per key, ordered by fetched_at (stable on ties).
SeriesExtraction score_series(std::span<const ScoreRecord> snapshots);

void write_report(std::ostream& out, const CandidateCountReport& r);
void write_report(std::ostream& out, const ScoreDistributionReport& r);
void write_report(std::ostream& out, const PrecisionDistributionReport& r);
void write_report(std::ostream& out, const PipelineQualityReport& r);
void write_report(std::ostream& out, const StabilityReport& r);

}  // namespace depscore
