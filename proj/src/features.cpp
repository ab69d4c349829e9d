#include "depscore/features.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <utility>

#include "depscore/errors.hpp"
#include "depscore/format.hpp"
#include "depscore/scoring.hpp"
#include "depscore/versions.hpp"

namespace depscore {

std::string_view feature_name(Feature f) {
    switch (f) {
        case Feature::CompatibilityScore: return "compatibility_score";
        case Feature::PatchRangeScore: return "patch_range_score";
        case Feature::MinorRangeScore: return "minor_range_score";
        case Feature::MajorRangeScore: return "major_range_score";
        case Feature::PassingDbPrs: return "passing_db_prs";
        case Feature::PassingProviderDbPrs: return "passing_provider_db_prs";
        case Feature::MergedDbPrs: return "merged_db_prs";
        case Feature::MergedProviderDbPrs: return "merged_provider_db_prs";
    }
    return "compatibility_score";
}

std::optional<Feature> parse_feature(std::string_view name) {
    for (auto f : {Feature::CompatibilityScore, Feature::PatchRangeScore, Feature::MinorRangeScore,
                   Feature::MajorRangeScore, Feature::PassingDbPrs, Feature::PassingProviderDbPrs,
                   Feature::MergedDbPrs, Feature::MergedProviderDbPrs}) {
        if (feature_name(f) == name) return f;
    }
    return std::nullopt;
}

double FeatureVector::value(Feature f) const {
    switch (f) {
        case Feature::CompatibilityScore: return compatibility_score;
        case Feature::PatchRangeScore: return patch_range_score;
        case Feature::MinorRangeScore: return minor_range_score;
        case Feature::MajorRangeScore: return major_range_score;
        case Feature::PassingDbPrs: return static_cast<double>(passing_db_prs);
        case Feature::PassingProviderDbPrs: return static_cast<double>(passing_provider_db_prs);
        case Feature::MergedDbPrs: return static_cast<double>(merged_db_prs);
        case Feature::MergedProviderDbPrs: return static_cast<double>(merged_provider_db_prs);
    }
    return 0.0;
}

bool merge_label(const UpdateEvent& event, bool require_human_merge) {
    if (!event.merged) return false;
    return !require_human_merge || event.merged_by_human.value_or(false);
}

namespace {

double smoothed(std::uint64_t n, std::uint64_t s) {
    return (static_cast<double>(s) + 1.0) / (static_cast<double>(n) + 2.0);
}

void add_to_history(HistoryCounts& counts, const UpdateEvent& e, bool same_provider, bool require_human) {
    const bool passing = ci_conclusion(e) == CiConclusion::Success;
    const bool merged = merge_label(e, require_human);
    counts.passing += passing;
    counts.merged += merged;
    if (same_provider) {
        counts.passing_provider += passing;
        counts.merged_provider += merged;
    }
}

void check_eligible(const UpdateEvent& focal, const FeatureOptions& options) {
    if (!options.include_non_candidates && !is_candidate_update(focal)) {
        throw DomainError("focal event for " + to_string(focal.key()) + " in " + focal.client +
                          " is not a candidate update");
    }
}

// Fills crowd-derived fields from a dataset that holds only prior events.
void fill_crowd_features(FeatureVector& fv, const ThreeTupleDataset& prior) {
    if (const auto it = prior.find(fv.key); it != prior.end()) {
        fv.exact_candidates = it->second.candidate_updates;
        fv.exact_successes = it->second.successful_updates;
    }
    fv.compatibility_score = fv.exact_candidates == 0
                                 ? 0.5
                                 : static_cast<double>(fv.exact_successes) / static_cast<double>(fv.exact_candidates);

    if (!parse_version(fv.key.target)) {
        fv.range_fallback = true;
        const double exact = smoothed(fv.exact_candidates, fv.exact_successes);
        fv.patch_range_score = fv.minor_range_score = fv.major_range_score = exact;
        fv.patch_candidates = fv.minor_candidates = fv.major_candidates = fv.exact_candidates;
        return;
    }

    const auto range = [&](RangeLevel level, double& score, std::uint64_t& candidates) {
        const auto r =
            range_compatibility_score(prior, fv.key.provider, fv.key.ecosystem, fv.key.target, level);
        score = smoothed(r.candidate_updates, r.successful_updates);
        candidates = r.candidate_updates;
    };
    range(RangeLevel::Patch, fv.patch_range_score, fv.patch_candidates);
    range(RangeLevel::Minor, fv.minor_range_score, fv.minor_candidates);
    range(RangeLevel::Major, fv.major_range_score, fv.major_candidates);
}

FeatureVector base_vector(const UpdateEvent& focal, const FeatureOptions& options) {
    FeatureVector fv;
    fv.client = focal.client;
    fv.key = focal.key();
    fv.opened_at = focal.opened_at;
    fv.label_merged = merge_label(focal, options.require_human_merge);
    return fv;
}

void set_history(FeatureVector& fv, const HistoryCounts& h) {
    fv.passing_db_prs = h.passing;
    fv.passing_provider_db_prs = h.passing_provider;
    fv.merged_db_prs = h.merged;
    fv.merged_provider_db_prs = h.merged_provider;
}

std::size_t find_event(std::span<const UpdateEvent> events, const UpdateEvent& focal) {
    const auto it = std::find(events.begin(), events.end(), focal);
    if (it == events.end()) throw DomainError("focal event is not part of the event list");
    return static_cast<std::size_t>(it - events.begin());
}

void write_csv_field(std::ostream& out, std::string_view text) {
    if (text.find_first_of(",\"\n\r") == std::string_view::npos) {
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

void write_double(std::ostream& out, double v) { out << format_double(v); }

}  // namespace

HistoryCounts client_history_metrics(std::span<const UpdateEvent> events, std::size_t focal_index,
                                     bool require_human_merge) {
    if (focal_index >= events.size()) throw DomainError("focal event index out of range");
    const auto& focal = events[focal_index];
    HistoryCounts counts;
    for (const auto& e : events) {
        if (e.client != focal.client || !(e.opened_at < focal.opened_at)) continue;
        add_to_history(counts, e, e.provider == focal.provider && e.ecosystem == focal.ecosystem,
                       require_human_merge);
    }
    return counts;
}

HistoryCounts client_history_metrics(std::span<const UpdateEvent> events, const UpdateEvent& focal,
                                     bool require_human_merge) {
    return client_history_metrics(events, find_event(events, focal), require_human_merge);
}

FeatureVector feature_vector(std::span<const UpdateEvent> events, std::size_t focal_index,
                             const FeatureOptions& options) {
    if (focal_index >= events.size()) throw DomainError("focal event index out of range");
    const auto& focal = events[focal_index];
    check_eligible(focal, options);

    std::vector<UpdateEvent> prior;
    for (const auto& e : events) {
        if (e.opened_at < focal.opened_at) prior.push_back(e);
    }

    auto fv = base_vector(focal, options);
    fill_crowd_features(fv, build_three_tuple_dataset(prior));
    set_history(fv, client_history_metrics(events, focal_index, options.require_human_merge));
    return fv;
}

FeatureVector feature_vector(std::span<const UpdateEvent> events, const UpdateEvent& focal,
                             const FeatureOptions& options) {
    return feature_vector(events, find_event(events, focal), options);
}

std::vector<FeatureVector> feature_matrix(std::span<const UpdateEvent> events, const FeatureOptions& options) {
    std::vector<std::size_t> order(events.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return events[l].opened_at < events[r].opened_at; });

    ThreeTupleDataset prior;
    std::map<std::string, HistoryCounts, std::less<>> by_client;
    std::map<std::pair<std::string, TupleKey>, HistoryCounts> by_client_provider;
    const auto provider_key = [](const UpdateEvent& e) {
        return std::pair<std::string, TupleKey>{e.client, TupleKey{e.provider, e.ecosystem, {}, {}}};
    };

    std::vector<FeatureVector> out;
    std::size_t group_begin = 0;
    while (group_begin < order.size()) {
        std::size_t group_end = group_begin;
        const auto instant = events[order[group_begin]].opened_at;
        while (group_end < order.size() && events[order[group_end]].opened_at == instant) ++group_end;

        // Events sharing an instant never see each other.
        for (std::size_t i = group_begin; i < group_end; ++i) {
            const auto& focal = events[order[i]];
            if (!options.include_non_candidates && !is_candidate_update(focal)) continue;

            auto fv = base_vector(focal, options);
            fill_crowd_features(fv, prior);
            HistoryCounts h;
            if (const auto it = by_client.find(focal.client); it != by_client.end()) {
                h.passing = it->second.passing;
                h.merged = it->second.merged;
            }
            if (const auto it = by_client_provider.find(provider_key(focal)); it != by_client_provider.end()) {
                h.passing_provider = it->second.passing_provider;
                h.merged_provider = it->second.merged_provider;
            }
            set_history(fv, h);
            out.push_back(std::move(fv));
        }

        for (std::size_t i = group_begin; i < group_end; ++i) {
            const auto& e = events[order[i]];
            add_to_history(by_client[e.client], e, false, options.require_human_merge);
            add_to_history(by_client_provider[provider_key(e)], e, true, options.require_human_merge);
            if (is_candidate_update(e)) {
                auto key = e.key();
                auto [it, inserted] = prior.try_emplace(key);
                if (inserted) it->second.key = std::move(key);
                ++it->second.candidate_updates;
                if (ci_conclusion(e) == CiConclusion::Success) ++it->second.successful_updates;
            }
        }
        group_begin = group_end;
    }
    return out;
}

void write_feature_csv(std::ostream& out, std::span<const FeatureVector> rows) {
    out << "client,provider,ecosystem,origin_version,target_version,opened_at,exact_candidates,exact_successes,"
           "patch_candidates,minor_candidates,major_candidates,range_fallback,compatibility_score,"
           "patch_range_score,minor_range_score,major_range_score,passing_db_prs,passing_provider_db_prs,"
           "merged_db_prs,merged_provider_db_prs,label_merged\n";
    for (const auto& r : rows) {
        write_csv_field(out, r.client);
        out << ',';
        write_csv_field(out, r.key.provider);
        out << ',';
        write_csv_field(out, r.key.ecosystem);
        out << ',';
        write_csv_field(out, r.key.origin);
        out << ',';
        write_csv_field(out, r.key.target);
        out << ',' << format_timestamp(r.opened_at) << ',' << r.exact_candidates << ',' << r.exact_successes << ','
            << r.patch_candidates << ',' << r.minor_candidates << ',' << r.major_candidates << ','
            << (r.range_fallback ? "true" : "false") << ',';
        write_double(out, r.compatibility_score);
        out << ',';
        write_double(out, r.patch_range_score);
        out << ',';
        write_double(out, r.minor_range_score);
        out << ',';
        write_double(out, r.major_range_score);
        out << ',' << r.passing_db_prs << ',' << r.passing_provider_db_prs << ',' << r.merged_db_prs << ','
            << r.merged_provider_db_prs << ',' << (r.label_merged ? 1 : 0) << '\n';
    }
}

}  // namespace depscore
