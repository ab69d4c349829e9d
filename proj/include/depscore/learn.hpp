#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace depscore {

using Label = std::uint8_t;  // 1 = positive (merged), 0 = negative

/// Dense row-major feature matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    Matrix select_rows(std::span<const std::size_t> indices) const;
    Matrix select_cols(std::span<const std::size_t> indices) const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct ForestConfig {
    std::size_t tree_count = 100;
    /// Defaults to ceil(sqrt(feature count)).
    std::optional<std::size_t> features_per_split;
    std::size_t min_leaf = 1;
    std::optional<std::size_t> max_depth;
    std::uint64_t seed = 0;

    std::size_t resolved_features_per_split(std::size_t feature_count) const;
};

struct TreeNode {
    static constexpr std::uint32_t kLeaf = 0xFFFFFFFFu;

    std::uint32_t feature = kLeaf;
    double threshold = 0.0;  // rows with value <= threshold go left
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double vote = 0.0;  // leaves: 1 positive majority, 0 negative, 0.5 tie

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes);

    static DecisionTree leaf(double vote);

    double vote(std::span<const double> row) const;
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t depth() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
};

class RandomForest {
public:
    RandomForest(std::vector<DecisionTree> trees, std::size_t feature_count);

    /// Mean positive vote across trees. Throws std::invalid_argument on a
    /// dimension mismatch.
    double predict_proba(std::span<const double> row) const;
    std::vector<double> predict_proba(const Matrix& rows) const;

    std::size_t tree_count() const { return trees_.size(); }
    std::size_t feature_count() const { return feature_count_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }

    friend bool operator==(const RandomForest&, const RandomForest&) = default;

private:
    std::vector<DecisionTree> trees_;
    std::size_t feature_count_ = 0;
};

/// Bagged Gini trees; tree i is seeded from (cfg.seed, i). Throws
/// DomainError when only one class is present and std::invalid_argument on
/// shape or config errors.
RandomForest train_forest(const Matrix& rows, std::span<const Label> labels, const ForestConfig& cfg);

/// Mann-Whitney AUC: share of (positive, negative) pairs ranked correctly,
/// ties counted as half. Throws DomainError unless both classes are present.
double auc(std::span<const double> scores, std::span<const Label> labels);

/// AUC drop after reordering one feature column of `test` by `permutation`
/// (row i takes the value of row permutation[i]).
double permutation_importance(const RandomForest& model, const Matrix& test, std::span<const Label> labels,
                              std::size_t feature, std::span<const std::size_t> permutation);

/// One importance per repeat, each with a fresh random permutation.
std::vector<double> permutation_importance(const RandomForest& model, const Matrix& test,
                                           std::span<const Label> labels, std::size_t feature,
                                           std::size_t repeats, std::uint64_t seed);

struct BootstrapOptions {
    std::size_t iterations = 100;
    /// Permutation repeats per feature per iteration; 0 disables importance.
    std::size_t importance_repeats = 1;
    /// Resample attempts per iteration before giving up.
    std::size_t max_attempts = 100;
    /// Names for importance output; defaults to f0, f1, ...
    std::vector<std::string> feature_names;
};

struct ExperimentResult {
    std::vector<double> auc_values;
    double median_auc = 0.0;
    std::vector<std::pair<std::string, std::vector<double>>> importances;
    std::size_t rows = 0;
    std::size_t positives = 0;

    friend bool operator==(const ExperimentResult&, const ExperimentResult&) = default;
};

/// Out-of-sample bootstrap: each iteration trains on n rows drawn with
/// replacement and scores the rows that were never drawn.
ExperimentResult out_of_sample_bootstrap(const Matrix& rows, std::span<const Label> labels,
                                         const ForestConfig& cfg, const BootstrapOptions& options = {});

}  // namespace depscore
