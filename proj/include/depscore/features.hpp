#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "depscore/datasets.hpp"

namespace depscore {

/// Model inputs. The first entry is the raw exact compatibility score used by
/// the baseline model; the remaining seven are the range and history metrics.
enum class Feature {
    CompatibilityScore,
    PatchRangeScore,
    MinorRangeScore,
    MajorRangeScore,
    PassingDbPrs,
    PassingProviderDbPrs,
    MergedDbPrs,
    MergedProviderDbPrs,
};

inline constexpr std::array<Feature, 3> kRangeFeatures{Feature::PatchRangeScore, Feature::MinorRangeScore,
                                                       Feature::MajorRangeScore};
inline constexpr std::array<Feature, 4> kHistoryFeatures{Feature::PassingDbPrs, Feature::PassingProviderDbPrs,
                                                         Feature::MergedDbPrs, Feature::MergedProviderDbPrs};
inline constexpr std::array<Feature, 7> kCombinedFeatures{
    Feature::PatchRangeScore, Feature::MinorRangeScore,      Feature::MajorRangeScore,
    Feature::PassingDbPrs,    Feature::PassingProviderDbPrs, Feature::MergedDbPrs,
    Feature::MergedProviderDbPrs};

std::string_view feature_name(Feature f);
std::optional<Feature> parse_feature(std::string_view name);

struct HistoryCounts {
    std::uint64_t passing = 0;
    std::uint64_t passing_provider = 0;
    std::uint64_t merged = 0;
    std::uint64_t merged_provider = 0;

    friend bool operator==(const HistoryCounts&, const HistoryCounts&) = default;
};

struct FeatureOptions {
    /// Count a PR as merged only when a human merged it (label and history).
    bool require_human_merge = false;
    /// Allow focal events that are not candidate updates.
    bool include_non_candidates = false;
};

struct FeatureVector {
    // Laplace-smoothed (S + 1) / (N + 2) range scores.
    double patch_range_score = 0.5;
    double minor_range_score = 0.5;
    double major_range_score = 0.5;
    std::uint64_t passing_db_prs = 0;
    std::uint64_t passing_provider_db_prs = 0;
    std::uint64_t merged_db_prs = 0;
    std::uint64_t merged_provider_db_prs = 0;
    bool label_merged = false;

    // Metadata.
    std::string client;
    TupleKey key;
    Timestamp opened_at{};
    /// Raw S / N of the exact tuple, 0.5 when it has no candidates yet.
    double compatibility_score = 0.5;
    std::uint64_t exact_candidates = 0;
    std::uint64_t exact_successes = 0;
    std::uint64_t patch_candidates = 0;
    std::uint64_t minor_candidates = 0;
    std::uint64_t major_candidates = 0;
    /// Target did not parse; range scores repeat the smoothed exact score.
    bool range_fallback = false;

    double value(Feature f) const;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

bool merge_label(const UpdateEvent& event, bool require_human_merge);

/// History of the focal event's client over events opened strictly earlier.
HistoryCounts client_history_metrics(std::span<const UpdateEvent> events, std::size_t focal_index,
                                     bool require_human_merge = false);
/// Looks the focal event up by value; throws DomainError when absent.
HistoryCounts client_history_metrics(std::span<const UpdateEvent> events, const UpdateEvent& focal,
                                     bool require_human_merge = false);

/// Features for one focal event, computed only from events opened strictly
/// before it. Throws DomainError when the focal event is not a candidate
/// update and options do not allow it.
FeatureVector feature_vector(std::span<const UpdateEvent> events, std::size_t focal_index,
                             const FeatureOptions& options = {});
FeatureVector feature_vector(std::span<const UpdateEvent> events, const UpdateEvent& focal,
                             const FeatureOptions& options = {});

/// One row per eligible event, ordered by opened_at (ties keep input order).
/// Produces the same vectors as calling feature_vector per event, in a single
/// chronological pass.
std::vector<FeatureVector> feature_matrix(std::span<const UpdateEvent> events, const FeatureOptions& options = {});

void write_feature_csv(std::ostream& out, std::span<const FeatureVector> rows);

}  // namespace depscore
