#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "depscore/datasets.hpp"
#include "depscore/features.hpp"
#include "depscore/learn.hpp"

namespace depscore {

/// Built-in model designs. Baseline uses the raw exact score on rows with at
/// least five exact candidates; the others use rows with fewer than five.
enum class Design { Baseline, Range, History, Combined, Custom };

std::string_view to_string(Design d);
std::optional<Design> parse_design(std::string_view text);

/// Inclusive bounds on a row's exact candidate count.
struct RowFilter {
    std::optional<std::uint64_t> min_exact_candidates;
    std::optional<std::uint64_t> max_exact_candidates;

    bool accepts(const FeatureVector& row) const;
    std::string describe() const;
};

struct ExperimentSpec {
    std::string name;
    Design design = Design::Combined;
    std::vector<Feature> features;
    RowFilter filter;
    std::size_t iterations = 100;
    ForestConfig forest;
    std::size_t min_rows = 50;
    std::size_t importance_repeats = 1;
    /// Permute labels before evaluation (null-signal control).
    bool shuffle_labels = false;
    /// Also run the baseline design and report per-iteration AUC deltas
    /// against its median.
    bool compare_to_baseline = false;
    FeatureOptions feature_options;
};

ExperimentSpec builtin_spec(Design design, std::uint64_t seed = 0);

/// Reads a JSON spec. Unknown keys and malformed values throw
/// std::invalid_argument.
ExperimentSpec parse_experiment_spec(std::string_view json_text);

struct ExperimentOutcome {
    ExperimentSpec spec;
    ExperimentResult result;
    std::optional<double> baseline_median_auc;
    std::vector<double> auc_deltas;
};

/// Throws DomainError when the feature list is empty or the filter leaves
/// fewer than spec.min_rows rows or a single class.
ExperimentOutcome run_experiment(std::span<const FeatureVector> rows, const ExperimentSpec& spec);
ExperimentOutcome run_experiment(std::span<const UpdateEvent> events, const ExperimentSpec& spec);

/// Rows passing the filter as a matrix over spec.features, plus labels.
std::pair<Matrix, std::vector<Label>> design_matrix(std::span<const FeatureVector> rows, const ExperimentSpec& spec);

void write_experiment_result(std::ostream& out, const ExperimentOutcome& outcome);

}  // namespace depscore
