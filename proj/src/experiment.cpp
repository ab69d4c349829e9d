#include "depscore/experiment.hpp"

#include <ostream>
#include <set>

#include <json.hpp>

#include "depscore/errors.hpp"
#include "depscore/random.hpp"

namespace depscore {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kShuffleStream = 0x73687566ULL;  // "shuf"

template <std::size_t N>
std::vector<Feature> to_vector(const std::array<Feature, N>& features) {
    return {features.begin(), features.end()};
}

std::uint64_t read_uint(const json& v, const char* field) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw std::invalid_argument(std::string("'") + field + "' must be a non-negative integer");
}

std::optional<std::uint64_t> read_optional_uint(const json& v, const char* field) {
    if (v.is_null()) return std::nullopt;
    return read_uint(v, field);
}

bool read_flag(const json& v, const char* field) {
    if (!v.is_boolean()) throw std::invalid_argument(std::string("'") + field + "' must be a boolean");
    return v.get<bool>();
}

ordered_json optional_json(const std::optional<std::uint64_t>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

std::string_view to_string(Design d) {
    switch (d) {
        case Design::Baseline: return "baseline";
        case Design::Range: return "range";
        case Design::History: return "history";
        case Design::Combined: return "combined";
        case Design::Custom: return "custom";
    }
    return "custom";
}

std::optional<Design> parse_design(std::string_view text) {
    for (auto d : {Design::Baseline, Design::Range, Design::History, Design::Combined, Design::Custom}) {
        if (to_string(d) == text) return d;
    }
    return std::nullopt;
}

bool RowFilter::accepts(const FeatureVector& row) const {
    if (min_exact_candidates && row.exact_candidates < *min_exact_candidates) return false;
    if (max_exact_candidates && row.exact_candidates > *max_exact_candidates) return false;
    return true;
}

std::string RowFilter::describe() const {
    std::string out = "exact_candidates";
    if (min_exact_candidates) out += " >= " + std::to_string(*min_exact_candidates);
    if (min_exact_candidates && max_exact_candidates) out += " and";
    if (max_exact_candidates) out += " <= " + std::to_string(*max_exact_candidates);
    if (!min_exact_candidates && !max_exact_candidates) out += " (any)";
    return out;
}

ExperimentSpec builtin_spec(Design design, std::uint64_t seed) {
    ExperimentSpec spec;
    spec.name = std::string(to_string(design));
    spec.design = design;
    spec.forest.seed = seed;
    switch (design) {
        case Design::Baseline:
            spec.features = {Feature::CompatibilityScore};
            spec.filter.min_exact_candidates = 5;
            break;
        case Design::Range:
            spec.features = to_vector(kRangeFeatures);
            spec.filter.max_exact_candidates = 4;
            break;
        case Design::History:
            spec.features = to_vector(kHistoryFeatures);
            spec.filter.max_exact_candidates = 4;
            break;
        case Design::Combined:
            spec.features = to_vector(kCombinedFeatures);
            spec.filter.max_exact_candidates = 4;
            break;
        case Design::Custom:
            break;
    }
    return spec;
}

ExperimentSpec parse_experiment_spec(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& ex) {
        throw std::invalid_argument(std::string("experiment spec is not valid JSON: ") + ex.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("experiment spec must be a JSON object");

    Design design = Design::Custom;
    if (const auto it = doc.find("design"); it != doc.end()) {
        if (!it->is_string()) throw std::invalid_argument("'design' must be a string");
        const auto parsed = parse_design(it->get<std::string>());
        if (!parsed) throw std::invalid_argument("unknown design '" + it->get<std::string>() + "'");
        design = *parsed;
    }
    ExperimentSpec spec = builtin_spec(design);

    static const std::set<std::string> known{"name", "design", "features", "filter", "iterations", "seed",
                                             "min_rows", "importance_repeats", "shuffle_labels",
                                             "compare_to_baseline", "require_human_merge",
                                             "include_non_candidates", "forest"};
    for (const auto& [key, value] : doc.items()) {
        if (!known.count(key)) throw std::invalid_argument("unknown experiment spec key '" + key + "'");
        if (key == "name") {
            if (!value.is_string()) throw std::invalid_argument("'name' must be a string");
            spec.name = value.get<std::string>();
        } else if (key == "features") {
            if (!value.is_array()) throw std::invalid_argument("'features' must be an array");
            spec.features.clear();
            for (const auto& f : value) {
                if (!f.is_string()) throw std::invalid_argument("feature names must be strings");
                const auto parsed = parse_feature(f.get<std::string>());
                if (!parsed) throw std::invalid_argument("unknown feature '" + f.get<std::string>() + "'");
                spec.features.push_back(*parsed);
            }
        } else if (key == "filter") {
            if (!value.is_object()) throw std::invalid_argument("'filter' must be an object");
            spec.filter = {};
            for (const auto& [fk, fv] : value.items()) {
                if (fk == "min_exact_candidates") {
                    spec.filter.min_exact_candidates = read_optional_uint(fv, "min_exact_candidates");
                } else if (fk == "max_exact_candidates") {
                    spec.filter.max_exact_candidates = read_optional_uint(fv, "max_exact_candidates");
                } else {
                    throw std::invalid_argument("unknown filter key '" + fk + "'");
                }
            }
        } else if (key == "iterations") {
            spec.iterations = read_uint(value, "iterations");
        } else if (key == "seed") {
            spec.forest.seed = read_uint(value, "seed");
        } else if (key == "min_rows") {
            spec.min_rows = read_uint(value, "min_rows");
        } else if (key == "importance_repeats") {
            spec.importance_repeats = read_uint(value, "importance_repeats");
        } else if (key == "shuffle_labels") {
            spec.shuffle_labels = read_flag(value, "shuffle_labels");
        } else if (key == "compare_to_baseline") {
            spec.compare_to_baseline = read_flag(value, "compare_to_baseline");
        } else if (key == "require_human_merge") {
            spec.feature_options.require_human_merge = read_flag(value, "require_human_merge");
        } else if (key == "include_non_candidates") {
            spec.feature_options.include_non_candidates = read_flag(value, "include_non_candidates");
        } else if (key == "forest") {
            if (!value.is_object()) throw std::invalid_argument("'forest' must be an object");
            for (const auto& [fk, fv] : value.items()) {
                if (fk == "tree_count") {
                    spec.forest.tree_count = read_uint(fv, "tree_count");
                } else if (fk == "features_per_split") {
                    spec.forest.features_per_split = read_optional_uint(fv, "features_per_split");
                } else if (fk == "min_leaf") {
                    spec.forest.min_leaf = read_uint(fv, "min_leaf");
                } else if (fk == "max_depth") {
                    spec.forest.max_depth = read_optional_uint(fv, "max_depth");
                } else {
                    throw std::invalid_argument("unknown forest key '" + fk + "'");
                }
            }
        }
    }
    return spec;
}

std::pair<Matrix, std::vector<Label>> design_matrix(std::span<const FeatureVector> rows, const ExperimentSpec& spec) {
    std::vector<const FeatureVector*> kept;
    for (const auto& r : rows) {
        if (spec.filter.accepts(r)) kept.push_back(&r);
    }
    Matrix x(kept.size(), spec.features.size());
    std::vector<Label> y(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        for (std::size_t c = 0; c < spec.features.size(); ++c) x(i, c) = kept[i]->value(spec.features[c]);
        y[i] = kept[i]->label_merged ? 1 : 0;
    }
    return {std::move(x), std::move(y)};
}

ExperimentOutcome run_experiment(std::span<const FeatureVector> rows, const ExperimentSpec& spec) {
    if (spec.features.empty()) throw DomainError("experiment '" + spec.name + "' selects no features");

    auto [x, y] = design_matrix(rows, spec);
    const auto positives = std::count(y.begin(), y.end(), Label{1});
    if (x.rows() < spec.min_rows) {
        throw DomainError("filter " + spec.filter.describe() + " leaves " + std::to_string(x.rows()) +
                          " rows, experiment '" + spec.name + "' needs at least " + std::to_string(spec.min_rows));
    }
    if (positives == 0 || static_cast<std::size_t>(positives) == y.size()) {
        throw DomainError("filter " + spec.filter.describe() + " leaves a single label class");
    }

    if (spec.shuffle_labels) {
        Rng rng(derive_seed(spec.forest.seed, kShuffleStream));
        shuffle(std::span<Label>(y), rng);
    }

    BootstrapOptions options;
    options.iterations = spec.iterations;
    options.importance_repeats = spec.importance_repeats;
    for (auto f : spec.features) options.feature_names.emplace_back(feature_name(f));

    ExperimentOutcome outcome;
    outcome.spec = spec;
    outcome.result = out_of_sample_bootstrap(x, y, spec.forest, options);

    if (spec.compare_to_baseline) {
        auto baseline = builtin_spec(Design::Baseline, spec.forest.seed);
        baseline.iterations = spec.iterations;
        baseline.forest = spec.forest;
        baseline.min_rows = spec.min_rows;
        baseline.importance_repeats = 0;
        baseline.shuffle_labels = spec.shuffle_labels;
        baseline.feature_options = spec.feature_options;
        const auto base = run_experiment(rows, baseline);
        outcome.baseline_median_auc = base.result.median_auc;
        for (double a : outcome.result.auc_values) outcome.auc_deltas.push_back(a - base.result.median_auc);
    }
    return outcome;
}

ExperimentOutcome run_experiment(std::span<const UpdateEvent> events, const ExperimentSpec& spec) {
    const auto rows = feature_matrix(events, spec.feature_options);
    return run_experiment(std::span<const FeatureVector>(rows), spec);
}

void write_experiment_result(std::ostream& out, const ExperimentOutcome& outcome) {
    const auto& spec = outcome.spec;
    const auto& result = outcome.result;

    ordered_json importances = ordered_json::object();
    for (const auto& [name, values] : result.importances) importances[name] = values;

    ordered_json features = ordered_json::array();
    for (auto f : spec.features) features.push_back(feature_name(f));

    ordered_json config;
    config["design"] = to_string(spec.design);
    config["features"] = features;
    config["filter"] = {{"min_exact_candidates", optional_json(spec.filter.min_exact_candidates)},
                        {"max_exact_candidates", optional_json(spec.filter.max_exact_candidates)}};
    config["seed"] = spec.forest.seed;
    config["min_rows"] = spec.min_rows;
    config["importance_repeats"] = spec.importance_repeats;
    config["shuffle_labels"] = spec.shuffle_labels;
    config["compare_to_baseline"] = spec.compare_to_baseline;
    config["require_human_merge"] = spec.feature_options.require_human_merge;
    config["include_non_candidates"] = spec.feature_options.include_non_candidates;
    config["forest"] = {{"tree_count", spec.forest.tree_count},
                        {"features_per_split", optional_json(spec.forest.features_per_split)},
                        {"min_leaf", spec.forest.min_leaf},
                        {"max_depth", optional_json(spec.forest.max_depth)}};

    ordered_json doc;
    doc["experiment_name"] = spec.name;
    doc["iterations"] = result.auc_values.size();
    doc["rows"] = result.rows;
    doc["positives"] = result.positives;
    doc["median_auc"] = result.median_auc;
    doc["auc_values"] = result.auc_values;
    doc["importances"] = importances;
    if (outcome.baseline_median_auc) {
        doc["baseline_median_auc"] = *outcome.baseline_median_auc;
        doc["auc_deltas"] = outcome.auc_deltas;
    }
    doc["config"] = config;
    out << doc.dump(2) << '\n';
}

}  // namespace depscore
