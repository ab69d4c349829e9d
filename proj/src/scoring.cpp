#include "depscore/scoring.hpp"

#include "depscore/errors.hpp"

namespace depscore {

std::string_view to_string(Badge badge) { return badge == Badge::Shown ? "shown" : "unknown"; }

ScoreReport make_score_report(TupleKey key, RangeLevel level, std::uint64_t candidates, std::uint64_t successes) {
    ScoreReport r;
    r.key = std::move(key);
    r.level = level;
    r.candidate_updates = candidates;
    r.successful_updates = successes;

    const auto params = posterior_params(candidates, successes);
    r.precision = ci_precision(params);
    if (candidates >= 1) {
        r.score = Ratio{successes, candidates};
        r.interval = confidence_interval(r.score->value(), params);
    }
    r.badge = candidates >= kBadgeThreshold ? Badge::Shown : Badge::Unknown;
    return r;
}

ScoreReport compatibility_score(const ScoreRecord& record) {
    return make_score_report(record.key, RangeLevel::Exact, record.candidate_updates, record.successful_updates);
}

ScoreReport range_compatibility_score(const ThreeTupleDataset& dataset, std::string_view provider,
                                      std::string_view ecosystem, std::string_view target, RangeLevel level) {
    if (level == RangeLevel::Exact) throw std::invalid_argument("range scores need a patch, minor or major level");
    const auto parsed_target = parse_version(target);
    if (!parsed_target) throw DomainError("target version '" + std::string(target) + "' is not a semantic version");

    std::uint64_t n = 0;
    std::uint64_t s = 0;
    std::size_t excluded = 0;
    std::size_t matched = 0;

    // Keys order by provider, then ecosystem, so the provider's keys are contiguous.
    const TupleKey lower{std::string(provider), std::string(ecosystem), {}, {}};
    for (auto it = dataset.lower_bound(lower); it != dataset.end(); ++it) {
        const auto& key = it->first;
        if (key.provider != provider || key.ecosystem != ecosystem) break;
        if (key.target != target || key.origin == key.target) continue;
        const auto origin = parse_version(key.origin);
        if (!origin) {
            ++excluded;
            continue;
        }
        if (!in_origin_range(*origin, *parsed_target, level)) continue;
        n += it->second.candidate_updates;
        s += it->second.successful_updates;
        ++matched;
    }

    auto report = make_score_report(TupleKey{std::string(provider), std::string(ecosystem), {}, std::string(target)},
                                    level, n, s);
    report.excluded_unparseable = excluded;
    report.matched_keys = matched;
    return report;
}

std::uint64_t rounded_percent(const Ratio& r) {
    // floor(100 * num / den + 1/2) in integers.
    return (200 * r.num + r.den) / (2 * r.den);
}

std::string render_badge(const ScoreReport& report) {
    if (report.badge != Badge::Shown || !report.score) return "compatibility: unknown";
    return "compatibility: " + std::to_string(rounded_percent(*report.score)) + "% (n=" +
           std::to_string(report.candidate_updates) + ")";
}

}  // namespace depscore
