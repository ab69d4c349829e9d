#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "depscore/confidence.hpp"
#include "depscore/datasets.hpp"
#include "depscore/versions.hpp"

namespace depscore {

/// Minimum candidate updates before the badge shows a score.
inline constexpr std::uint64_t kBadgeThreshold = 5;

/// Exact successful/candidate ratio. Kept unreduced; compare with operator==.
struct Ratio {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Ratio& l, const Ratio& r) {
        __extension__ using wide = unsigned __int128;
        return static_cast<wide>(l.num) * r.den == static_cast<wide>(r.num) * l.den;
    }
};

enum class Badge { Shown, Unknown };

std::string_view to_string(Badge badge);

struct ScoreReport {
    TupleKey key;  // origin is empty for range reports
    RangeLevel level = RangeLevel::Exact;
    std::uint64_t candidate_updates = 0;
    std::uint64_t successful_updates = 0;
    std::optional<Ratio> score;
    Badge badge = Badge::Unknown;
    std::optional<Interval> interval;
    /// Unclamped interval half-width; defined even with no candidates.
    double precision = 0.0;
    /// Range reports only: keys skipped because their origin did not parse.
    std::size_t excluded_unparseable = 0;
    /// Range reports only: number of exact keys summed.
    std::size_t matched_keys = 0;
};

ScoreReport make_score_report(TupleKey key, RangeLevel level, std::uint64_t candidates, std::uint64_t successes);

ScoreReport compatibility_score(const ScoreRecord& record);

/// Sums N and S over every key of (provider, ecosystem, target) whose origin
/// parses, differs from the target, and lies in the target's bucket at
/// `level`. Throws DomainError when the target does not parse and
/// std::invalid_argument for RangeLevel::Exact.
ScoreReport range_compatibility_score(const ThreeTupleDataset& dataset, std::string_view provider,
                                      std::string_view ecosystem, std::string_view target, RangeLevel level);

/// Percentage rounded half-up to whole percent, e.g. 11/12 -> 92.
std::uint64_t rounded_percent(const Ratio& r);

/// "compatibility: NN% (n=N)" when the badge is shown, else "compatibility: unknown".
std::string render_badge(const ScoreReport& report);

}  // namespace depscore
