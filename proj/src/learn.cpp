#include "depscore/learn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "depscore/errors.hpp"
#include "depscore/random.hpp"
#include "depscore/stats.hpp"

namespace depscore {

namespace {

constexpr std::uint64_t kTreeStream = 0x7472656573ULL;        // "trees"
constexpr std::uint64_t kResampleStream = 0x626f6f74ULL;      // "boot"
constexpr std::uint64_t kTrainStream = 0x747261696eULL;       // "train"
constexpr std::uint64_t kPermuteStream = 0x7065726dULL;       // "perm"

// Runs body(i) for i in [0, count) across hardware threads. Callers write
// into per-index slots, so results do not depend on scheduling.
thread_local bool t_inside_parallel_region = false;

template <typename Body>
void parallel_for(std::size_t count, Body body) {
    const std::size_t workers =
        std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1 || t_inside_parallel_region) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            t_inside_parallel_region = true;
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct SplitCandidate {
    double value;
    std::uint32_t weight;
    std::uint32_t positive;

    bool operator<(const SplitCandidate& o) const { return value < o.value; }
};

struct Sample {
    std::uint32_t row;
    std::uint32_t weight;  // times drawn into the bag
};

class TreeGrower {
public:
    TreeGrower(const Matrix& x, std::span<const Label> y, const ForestConfig& cfg, std::size_t mtry, Rng& rng)
        : x_(x), y_(y), cfg_(cfg), mtry_(mtry), rng_(rng), feature_pool_(x.cols()) {
        std::iota(feature_pool_.begin(), feature_pool_.end(), std::size_t{0});
    }

    DecisionTree grow(std::vector<Sample> samples) {
        samples_ = std::move(samples);
        nodes_.clear();
        nodes_.push_back({});
        struct Work {
            std::uint32_t node;
            std::size_t begin;
            std::size_t end;
            std::size_t depth;
        };
        std::vector<Work> stack{{0, 0, samples_.size(), 0}};
        while (!stack.empty()) {
            const Work w = stack.back();
            stack.pop_back();

            std::uint64_t total = 0;
            std::uint64_t positive = 0;
            for (std::size_t i = w.begin; i < w.end; ++i) {
                total += samples_[i].weight;
                if (y_[samples_[i].row]) positive += samples_[i].weight;
            }
            nodes_[w.node].vote = 2 * positive > total ? 1.0 : (2 * positive == total ? 0.5 : 0.0);

            const bool pure = positive == 0 || positive == total;
            const bool depth_capped = cfg_.max_depth && w.depth >= *cfg_.max_depth;
            if (pure || depth_capped || total < 2 * cfg_.min_leaf) continue;

            const auto split = best_split(w.begin, w.end);
            if (!split) continue;

            const auto middle = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(w.begin),
                                               samples_.begin() + static_cast<std::ptrdiff_t>(w.end),
                                               [&](const Sample& s) { return x_(s.row, split->first) <= split->second; });
            const auto mid = static_cast<std::size_t>(middle - samples_.begin());

            const auto left = static_cast<std::uint32_t>(nodes_.size());
            nodes_.push_back({});
            nodes_.push_back({});
            auto& node = nodes_[w.node];
            node.feature = static_cast<std::uint32_t>(split->first);
            node.threshold = split->second;
            node.left = left;
            node.right = left + 1;
            stack.push_back({left + 1, mid, w.end, w.depth + 1});
            stack.push_back({left, w.begin, mid, w.depth + 1});
        }
        return DecisionTree(std::move(nodes_));
    }

private:
    // Highest Gini purity over the sampled features. Equal scores keep the
    // earlier candidate: lower feature index, then lower threshold.
    std::optional<std::pair<std::size_t, double>> best_split(std::size_t begin, std::size_t end) {
        // Partial Fisher-Yates picks mtry distinct features.
        for (std::size_t i = 0; i < mtry_; ++i) {
            const auto j = i + static_cast<std::size_t>(uniform_index(rng_, feature_pool_.size() - i));
            std::swap(feature_pool_[i], feature_pool_[j]);
        }
        chosen_.assign(feature_pool_.begin(), feature_pool_.begin() + static_cast<std::ptrdiff_t>(mtry_));
        std::sort(chosen_.begin(), chosen_.end());

        std::optional<std::pair<std::size_t, double>> best;
        double best_score = -1.0;
        const double min_leaf = static_cast<double>(cfg_.min_leaf);

        for (const auto feature : chosen_) {
            buffer_.clear();
            double total = 0.0;
            double positive = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                const auto& s = samples_[i];
                const std::uint32_t pos = y_[s.row] ? s.weight : 0;
                buffer_.push_back({x_(s.row, feature), s.weight, pos});
                total += s.weight;
                positive += pos;
            }
            std::sort(buffer_.begin(), buffer_.end());

            double left_w = 0.0;
            double left_pos = 0.0;
            for (std::size_t i = 0; i + 1 < buffer_.size(); ++i) {
                left_w += buffer_[i].weight;
                left_pos += buffer_[i].positive;
                if (buffer_[i].value == buffer_[i + 1].value) continue;
                const double right_w = total - left_w;
                if (left_w < min_leaf || right_w < min_leaf) continue;
                const double right_pos = positive - left_pos;
                const double left_neg = left_w - left_pos;
                const double right_neg = right_w - right_pos;
                const double score = (left_pos * left_pos + left_neg * left_neg) / left_w +
                                     (right_pos * right_pos + right_neg * right_neg) / right_w;
                if (score > best_score) {
                    best_score = score;
                    double threshold = 0.5 * (buffer_[i].value + buffer_[i + 1].value);
                    if (!(threshold < buffer_[i + 1].value)) threshold = buffer_[i].value;
                    best = std::pair{feature, threshold};
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const Label> y_;
    const ForestConfig& cfg_;
    std::size_t mtry_;
    Rng& rng_;
    std::vector<std::size_t> feature_pool_;
    std::vector<std::size_t> chosen_;
    std::vector<SplitCandidate> buffer_;
    std::vector<Sample> samples_;
    std::vector<TreeNode> nodes_;
};

void require_both_classes(std::span<const Label> labels, const char* what) {
    const bool any_pos = std::any_of(labels.begin(), labels.end(), [](Label l) { return l != 0; });
    const bool any_neg = std::any_of(labels.begin(), labels.end(), [](Label l) { return l == 0; });
    if (!any_pos || !any_neg) throw DomainError(std::string(what) + " needs both classes present");
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw std::invalid_argument("matrix data does not match its shape");
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols_), cols_,
                    out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    }
    return out;
}

Matrix Matrix::select_cols(std::span<const std::size_t> indices) const {
    Matrix out(rows_, indices.size());
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < indices.size(); ++c) out(r, c) = (*this)(r, indices[c]);
    }
    return out;
}

std::size_t ForestConfig::resolved_features_per_split(std::size_t feature_count) const {
    if (features_per_split) return std::min(*features_per_split, feature_count);
    return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(feature_count))));
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw std::invalid_argument("a tree needs at least one node");
}

DecisionTree DecisionTree::leaf(double vote) {
    TreeNode node;
    node.vote = vote;
    return DecisionTree({node});
}

double DecisionTree::vote(std::span<const double> row) const {
    std::uint32_t i = 0;
    while (nodes_[i].feature != TreeNode::kLeaf) {
        i = row[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
    }
    return nodes_[i].vote;
}

std::size_t DecisionTree::depth() const {
    std::size_t deepest = 0;
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (nodes_[i].feature != TreeNode::kLeaf) {
            stack.push_back({nodes_[i].left, d + 1});
            stack.push_back({nodes_[i].right, d + 1});
        }
    }
    return deepest;
}

RandomForest::RandomForest(std::vector<DecisionTree> trees, std::size_t feature_count)
    : trees_(std::move(trees)), feature_count_(feature_count) {
    if (trees_.empty()) throw std::invalid_argument("a forest needs at least one tree");
}

double RandomForest::predict_proba(std::span<const double> row) const {
    if (row.size() != feature_count_) {
        throw std::invalid_argument("row has " + std::to_string(row.size()) + " features, model expects " +
                                    std::to_string(feature_count_));
    }
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.vote(row);
    return sum / static_cast<double>(trees_.size());
}

std::vector<double> RandomForest::predict_proba(const Matrix& rows) const {
    std::vector<double> out(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) out[r] = predict_proba(rows.row(r));
    return out;
}

RandomForest train_forest(const Matrix& rows, std::span<const Label> labels, const ForestConfig& cfg) {
    if (rows.rows() != labels.size()) throw std::invalid_argument("row and label counts differ");
    if (rows.rows() < 2) throw std::invalid_argument("training needs at least two rows");
    if (rows.cols() == 0) throw std::invalid_argument("training needs at least one feature");
    if (cfg.tree_count < 1) throw std::invalid_argument("tree_count must be at least 1");
    if (cfg.features_per_split && *cfg.features_per_split < 1) {
        throw std::invalid_argument("features_per_split must be at least 1");
    }
    if (cfg.min_leaf < 1) throw std::invalid_argument("min_leaf must be at least 1");
    require_both_classes(labels, "training");

    const std::size_t n = rows.rows();
    const std::size_t mtry = cfg.resolved_features_per_split(rows.cols());
    std::vector<DecisionTree> trees(cfg.tree_count);

    parallel_for(cfg.tree_count, [&](std::size_t t) {
        Rng rng(derive_seed(cfg.seed, kTreeStream, t));
        std::vector<std::uint32_t> drawn(n, 0);
        for (std::size_t i = 0; i < n; ++i) ++drawn[uniform_index(rng, n)];
        std::vector<Sample> bag;
        for (std::size_t i = 0; i < n; ++i) {
            if (drawn[i]) bag.push_back({static_cast<std::uint32_t>(i), drawn[i]});
        }
        TreeGrower grower(rows, labels, cfg, mtry, rng);
        trees[t] = grower.grow(std::move(bag));
    });
    return RandomForest(std::move(trees), rows.cols());
}

double auc(std::span<const double> scores, std::span<const Label> labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("score and label counts differ");
    require_both_classes(labels, "AUC");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return scores[l] < scores[r]; });

    // Twice the Mann-Whitney count, kept integral so the result is exact.
    std::uint64_t twice_count = 0;
    std::uint64_t negatives_below = 0;
    std::uint64_t positives = 0;
    std::uint64_t negatives = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::uint64_t pos = 0;
        std::uint64_t neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] ? pos : neg) += 1;
            ++j;
        }
        twice_count += 2 * pos * negatives_below + pos * neg;
        negatives_below += neg;
        positives += pos;
        negatives += neg;
        i = j;
    }
    return (static_cast<double>(twice_count) / 2.0) / static_cast<double>(positives * negatives);
}

double permutation_importance(const RandomForest& model, const Matrix& test, std::span<const Label> labels,
                              std::size_t feature, std::span<const std::size_t> permutation) {
    if (feature >= test.cols()) throw std::invalid_argument("feature index out of range");
    if (permutation.size() != test.rows()) throw std::invalid_argument("permutation size differs from row count");

    const double original = auc(model.predict_proba(test), labels);
    Matrix shuffled = test;
    for (std::size_t r = 0; r < test.rows(); ++r) shuffled(r, feature) = test(permutation[r], feature);
    return original - auc(model.predict_proba(shuffled), labels);
}

std::vector<double> permutation_importance(const RandomForest& model, const Matrix& test,
                                           std::span<const Label> labels, std::size_t feature,
                                           std::size_t repeats, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(repeats);
    std::vector<std::size_t> permutation(test.rows());
    for (std::size_t k = 0; k < repeats; ++k) {
        std::iota(permutation.begin(), permutation.end(), std::size_t{0});
        shuffle(std::span<std::size_t>(permutation), rng);
        out.push_back(permutation_importance(model, test, labels, feature, permutation));
    }
    return out;
}

ExperimentResult out_of_sample_bootstrap(const Matrix& rows, std::span<const Label> labels,
                                         const ForestConfig& cfg, const BootstrapOptions& options) {
    if (rows.rows() != labels.size()) throw std::invalid_argument("row and label counts differ");
    if (options.iterations < 1) throw std::invalid_argument("bootstrap needs at least one iteration");
    if (!options.feature_names.empty() && options.feature_names.size() != rows.cols()) {
        throw std::invalid_argument("feature name count differs from column count");
    }
    require_both_classes(labels, "bootstrap evaluation");

    const std::size_t n = rows.rows();
    const std::size_t features = rows.cols();

    struct IterationOutcome {
        double auc = 0.0;
        std::vector<std::vector<double>> importances;
    };
    std::vector<IterationOutcome> outcomes(options.iterations);

    // Iterations are the parallel unit; forests inside them train serially.
    parallel_for(options.iterations, [&](std::size_t it) {
        std::vector<std::size_t> train;
        std::vector<std::size_t> test;
        bool valid = false;
        for (std::size_t attempt = 0; attempt < options.max_attempts && !valid; ++attempt) {
            Rng rng(derive_seed(derive_seed(cfg.seed, kResampleStream, it), attempt));
            std::vector<char> drawn(n, 0);
            train.clear();
            test.clear();
            for (std::size_t i = 0; i < n; ++i) {
                const auto r = static_cast<std::size_t>(uniform_index(rng, n));
                train.push_back(r);
                drawn[r] = 1;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (!drawn[i]) test.push_back(i);
            }
            const auto has_both = [&](const std::vector<std::size_t>& idx) {
                bool pos = false, neg = false;
                for (auto i : idx) (labels[i] ? pos : neg) = true;
                return pos && neg;
            };
            valid = has_both(train) && has_both(test);
        }
        if (!valid) {
            throw DomainError("no bootstrap resample with both classes in train and test after " +
                              std::to_string(options.max_attempts) + " attempts");
        }

        const Matrix train_x = rows.select_rows(train);
        const Matrix test_x = rows.select_rows(test);
        std::vector<Label> train_y, test_y;
        for (auto i : train) train_y.push_back(labels[i]);
        for (auto i : test) test_y.push_back(labels[i]);

        ForestConfig iteration_cfg = cfg;
        iteration_cfg.seed = derive_seed(cfg.seed, kTrainStream, it);
        const auto model = train_forest(train_x, train_y, iteration_cfg);

        auto& outcome = outcomes[it];
        outcome.auc = auc(model.predict_proba(test_x), test_y);
        if (options.importance_repeats > 0) {
            outcome.importances.resize(features);
            for (std::size_t f = 0; f < features; ++f) {
                outcome.importances[f] = permutation_importance(model, test_x, test_y, f, options.importance_repeats,
                                                                derive_seed(cfg.seed, kPermuteStream, it * features + f));
            }
        }
    });

    ExperimentResult result;
    result.rows = n;
    result.positives = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](Label l) { return l != 0; }));
    for (const auto& o : outcomes) result.auc_values.push_back(o.auc);
    result.median_auc = median(result.auc_values);
    if (options.importance_repeats > 0) {
        for (std::size_t f = 0; f < features; ++f) {
            const std::string name = options.feature_names.empty() ? "f" + std::to_string(f) : options.feature_names[f];
            std::vector<double> values;
            for (const auto& o : outcomes) values.insert(values.end(), o.importances[f].begin(), o.importances[f].end());
            result.importances.emplace_back(name, std::move(values));
        }
    }
    return result;
}

}  // namespace depscore
