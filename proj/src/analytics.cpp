#include "depscore/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "depscore/confidence.hpp"
#include "depscore/errors.hpp"
#include "depscore/format.hpp"
#include "depscore/scoring.hpp"
#include "depscore/stats.hpp"

namespace depscore {

namespace {

double share(std::size_t part, std::size_t whole) {
    return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

Summary summarize(std::span<const double> values) {
    return {*std::min_element(values.begin(), values.end()), quantile(values, 0.25), quantile(values, 0.5),
            quantile(values, 0.75), *std::max_element(values.begin(), values.end())};
}

void write_summary(std::ostream& out, const Summary& s) {
    out << "# min: " << format_double(s.min) << '\n'
        << "# q1: " << format_double(s.q1) << '\n'
        << "# median: " << format_double(s.median) << '\n'
        << "# q3: " << format_double(s.q3) << '\n'
        << "# max: " << format_double(s.max) << '\n';
}

void write_bins(std::ostream& out, const Histogram& h) {
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
    }
}

void write_csv_text(std::ostream& out, const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) {
        out << text;
        return;
    }
    out << '"';
    for (char c : text) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

}  // namespace

Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
    if (values.empty()) throw std::invalid_argument("histogram of an empty sample");
    if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
    if (!(hi > lo)) throw std::invalid_argument("histogram range must be increasing");

    Histogram h;
    h.edges.resize(bins + 1);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
    h.edges.back() = hi;
    h.counts.assign(bins, 0);
    for (double v : values) {
        auto bin = static_cast<std::ptrdiff_t>(std::floor((v - lo) / width));
        bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(bins) - 1);
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    h.total = values.size();
    h.summary = summarize(values);
    return h;
}

Histogram make_histogram(std::span<const double> values, std::size_t bins) {
    if (values.empty()) throw std::invalid_argument("histogram of an empty sample");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return make_histogram(values, *lo, *hi > *lo ? *hi : *lo + 1.0, bins);
}

CandidateCountReport candidate_count_report(const ThreeTupleDataset& dataset, std::size_t bins) {
    if (dataset.empty()) throw DomainError("candidate count report needs a non-empty dataset");
    std::vector<double> counts;
    CandidateCountReport r;
    for (const auto& [key, record] : dataset) {
        counts.push_back(static_cast<double>(record.candidate_updates));
        if (record.candidate_updates >= kBadgeThreshold) ++r.at_least_threshold;
    }
    r.keys = dataset.size();
    r.share_at_least_threshold = share(r.at_least_threshold, r.keys);
    r.histogram = make_histogram(counts, bins);
    return r;
}

ScoreDistributionReport score_distribution_report(const ThreeTupleDataset& dataset, std::uint64_t min_candidates,
                                                  std::size_t bins) {
    ScoreDistributionReport r;
    r.min_candidates = min_candidates;
    std::vector<double> scores;
    for (const auto& [key, record] : dataset) {
        if (record.candidate_updates < std::max<std::uint64_t>(min_candidates, 1)) continue;
        scores.push_back(static_cast<double>(record.successful_updates) /
                         static_cast<double>(record.candidate_updates));
        // S / N > 9 / 10, exactly.
        if (10 * record.successful_updates > 9 * record.candidate_updates) ++r.above_90;
    }
    if (scores.empty()) {
        throw DomainError("no key has at least " + std::to_string(min_candidates) + " candidate updates");
    }
    r.qualifying = scores.size();
    r.share_above_90 = share(r.above_90, r.qualifying);
    r.histogram = make_histogram(scores, 0.0, 1.0, bins);
    return r;
}

PrecisionDistributionReport precision_distribution_report(const ThreeTupleDataset& dataset,
                                                          std::uint64_t min_candidates, std::size_t bins) {
    PrecisionDistributionReport r;
    r.min_candidates = min_candidates;
    std::vector<double> values;
    for (const auto& [key, record] : dataset) {
        if (record.candidate_updates < std::max<std::uint64_t>(min_candidates, 1)) continue;
        const double p = ci_precision(posterior_params(record.candidate_updates, record.successful_updates));
        values.push_back(p);
        r.precisions.emplace_back(key, p);
        if (p > 0.15) ++r.above_15;
    }
    if (values.empty()) {
        throw DomainError("no key has at least " + std::to_string(min_candidates) + " candidate updates");
    }
    r.qualifying = values.size();
    r.share_above_15 = share(r.above_15, r.qualifying);
    // The widest possible precision is the uniform prior's.
    r.histogram = make_histogram(values, 0.0, ci_precision(PosteriorParams{1.0, 1.0}), bins);
    return r;
}

PipelineQualityReport pipeline_quality_report(std::span<const UpdateEvent> events) {
    PipelineQualityReport r;
    std::vector<double> check_counts;
    std::size_t useless_only_passing = 0;
    std::size_t build_or_test_passing = 0;
    for (const auto& e : events) {
        if (!is_candidate_update(e)) continue;
        const auto q = classify_pipeline(e);
        const bool passing = ci_conclusion(e) == CiConclusion::Success;
        ++r.events;
        check_counts.push_back(static_cast<double>(q.check_count));
        for (auto c : q.categories) ++r.category_counts[c];
        r.total_checks += q.check_count;
        if (q.has_build_or_test) {
            ++r.with_build_or_test;
            build_or_test_passing += passing;
        }
        if (q.has_useless) ++r.with_useless;
        if (q.useless_only) {
            ++r.useless_only;
            useless_only_passing += passing;
        }
    }
    if (r.events == 0) throw DomainError("pipeline report needs at least one candidate update with checks");

    r.median_check_count = median(check_counts);
    r.share_build_or_test = share(r.with_build_or_test, r.events);
    r.share_useless = share(r.with_useless, r.events);
    r.share_useless_only = share(r.useless_only, r.events);
    if (r.useless_only > 0) r.success_rate_useless_only = share(useless_only_passing, r.useless_only);
    if (r.with_build_or_test > 0) r.success_rate_build_or_test = share(build_or_test_passing, r.with_build_or_test);
    return r;
}

StabilityVerdict stability_verdict(const TupleKey& key, std::span<const std::pair<Timestamp, double>> series) {
    if (series.size() < 2) throw std::invalid_argument("stability needs at least two snapshots");
    // Tolerance absorbs representation error in decimal scores such as 0.85 - 0.80.
    constexpr double kSlack = 1e-12;
    const double final_score = series.back().second;

    std::size_t stable_index = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (std::abs(series[i].second - final_score) > kStabilityBand + kSlack) stable_index = i + 1;
    }

    StabilityVerdict v;
    v.key = key;
    v.snapshots = series.size();
    v.stable_index = stable_index;
    v.stable_at = series[stable_index].first;
    v.instantly_stable = stable_index == 0;
    return v;
}

StabilityReport stability_analysis(const std::map<TupleKey, ScoreSeries>& series) {
    StabilityReport r;
    for (const auto& [key, s] : series) {
        if (s.size() < 2) {
            ++r.excluded_single_snapshot;
            continue;
        }
        r.verdicts.push_back(stability_verdict(key, s));
        r.instantly_stable += r.verdicts.back().instantly_stable;
    }
    if (r.verdicts.empty()) throw DomainError("stability analysis needs a key with at least two snapshots");
    r.instantly_stable_share = share(r.instantly_stable, r.verdicts.size());
    return r;
}

SeriesExtraction score_series(std::span<const ScoreRecord> snapshots) {
    SeriesExtraction out;
    for (const auto& rec : snapshots) {
        if (!rec.fetched_at || rec.candidate_updates == 0) {
            ++out.skipped_without_time;
            continue;
        }
        out.series[rec.key].emplace_back(*rec.fetched_at, static_cast<double>(rec.successful_updates) /
                                                             static_cast<double>(rec.candidate_updates));
    }
    for (auto& [key, s] : out.series) {
        std::stable_sort(s.begin(), s.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    }
    return out;
}

void write_report(std::ostream& out, const CandidateCountReport& r) {
    out << "# report: candidates\n"
        << "# keys: " << r.keys << '\n'
        << "# at_least_5: " << r.at_least_threshold << '\n'
        << "# share_at_least_5: " << format_double(r.share_at_least_threshold) << '\n';
    write_summary(out, r.histogram.summary);
    write_bins(out, r.histogram);
}

void write_report(std::ostream& out, const ScoreDistributionReport& r) {
    out << "# report: scores\n"
        << "# min_candidates: " << r.min_candidates << '\n'
        << "# qualifying: " << r.qualifying << '\n'
        << "# above_0.90: " << r.above_90 << '\n'
        << "# share_above_0.90: " << format_double(r.share_above_90) << '\n';
    write_summary(out, r.histogram.summary);
    write_bins(out, r.histogram);
}

void write_report(std::ostream& out, const PrecisionDistributionReport& r) {
    out << "# report: precision\n"
        << "# min_candidates: " << r.min_candidates << '\n'
        << "# qualifying: " << r.qualifying << '\n'
        << "# above_0.15: " << r.above_15 << '\n'
        << "# share_above_0.15: " << format_double(r.share_above_15) << '\n';
    write_summary(out, r.histogram.summary);
    write_bins(out, r.histogram);
}

void write_report(std::ostream& out, const PipelineQualityReport& r) {
    const auto optional_rate = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("na"); };
    out << "# report: pipeline\n"
        << "# events: " << r.events << '\n'
        << "# median_check_count: " << format_double(r.median_check_count) << '\n'
        << "# share_build_or_test: " << format_double(r.share_build_or_test) << '\n'
        << "# share_useless: " << format_double(r.share_useless) << '\n'
        << "# share_useless_only: " << format_double(r.share_useless_only) << '\n'
        << "# success_rate_useless_only: " << optional_rate(r.success_rate_useless_only) << '\n'
        << "# success_rate_build_or_test: " << optional_rate(r.success_rate_build_or_test) << '\n'
        << "category,checks,share\n";
    for (auto c : kClassifiedCategories) {
        const auto it = r.category_counts.find(c);
        const std::size_t n = it == r.category_counts.end() ? 0 : it->second;
        out << to_string(c) << ',' << n << ',' << format_double(share(n, r.total_checks)) << '\n';
    }
    const auto it = r.category_counts.find(CheckCategory::Unclassified);
    const std::size_t n = it == r.category_counts.end() ? 0 : it->second;
    out << "Unclassified," << n << ',' << format_double(share(n, r.total_checks)) << '\n';
}

void write_report(std::ostream& out, const StabilityReport& r) {
    out << "# report: stability\n"
        << "# keys: " << r.verdicts.size() << '\n'
        << "# excluded_single_snapshot: " << r.excluded_single_snapshot << '\n'
        << "# instantly_stable: " << r.instantly_stable << '\n'
        << "# instantly_stable_share: " << format_double(r.instantly_stable_share) << '\n'
        << "provider,ecosystem,origin_version,target_version,snapshots,instantly_stable,stable_index,stable_at\n";
    for (const auto& v : r.verdicts) {
        write_csv_text(out, v.key.provider);
        out << ',';
        write_csv_text(out, v.key.ecosystem);
        out << ',';
        write_csv_text(out, v.key.origin);
        out << ',';
        write_csv_text(out, v.key.target);
        out << ',' << v.snapshots << ',' << (v.instantly_stable ? "true" : "false") << ',' << v.stable_index << ','
            << format_timestamp(v.stable_at) << '\n';
    }
}

}  // namespace depscore
