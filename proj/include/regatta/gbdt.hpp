#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regatta/common.hpp"

namespace regatta::gbdt {

enum class Objective : int { squared = 0, logistic = 1 };

const char* to_string(Objective o);

struct Dataset {
    std::vector<std::vector<double>> features;  // [row][feature]
    std::vector<double> targets;                // 0/1 for logistic

    int n_rows() const { return static_cast<int>(features.size()); }
    int n_features() const { return features.empty() ? 0 : static_cast<int>(features[0].size()); }
};

// Flat node array; node 0 is the root. feature < 0 marks a leaf. Split rule:
// x[feature] <= threshold goes left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf weight, unscaled
    int n_data = 0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const;
    int leaf_count() const;
    int min_leaf_data() const;
};

struct GbdtParams {
    int num_leaves = 31;
    int min_data_in_leaf = 20;
    double lambda_l1 = 0.0;
    double lambda_l2 = 0.0;
    double learning_rate = 0.1;
    int n_trees = 100;
};

// Additive ensemble: raw(x) = base_score + learning_rate * sum of trees.
// Logistic models pass raw through a sigmoid at prediction time.
struct GbdtModel {
    Objective objective = Objective::squared;
    GbdtParams params;
    double base_score = 0.0;
    int n_features = 0;
    std::vector<DecisionTree> trees;
    std::vector<double> train_loss;  // per boosting round, training set

    double predict_raw(std::span<const double> x) const;
    double predict(std::span<const double> x) const;
};

// Gradient boosting with leaf-wise (best-first) growth and exact split
// search. Leaf weights carry L1 (soft threshold) and L2 regularization.
// Fully deterministic for a fixed dataset and parameter set.
GbdtModel train(const Dataset& data, const GbdtParams& params, Objective objective);

struct ClassificationMetrics {
    std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
    // Metrics are unset when their denominator is zero.
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> sensitivity;  // complementary-class recall
    // Cross-class error shares, mirroring the usual confusion-matrix margin
    // annotations: positives wrongly flagged among all true positives, and
    // vice versa. Percentages of the true class sizes.
    std::optional<double> false_positive_pct_of_positive;
    std::optional<double> false_negative_pct_of_negative;
};

// The positive class is "bad solution" everywhere in this toolkit.
ClassificationMetrics confusion_metrics(std::int64_t tp, std::int64_t tn, std::int64_t fp,
                                        std::int64_t fn);

struct RegressionMetrics {
    double mse = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
};

RegressionMetrics regression_metrics(std::span<const double> predictions,
                                     std::span<const double> targets);

struct CvResult {
    double mean_metric = 0.0;            // accuracy (logistic) or MSE (squared)
    std::vector<double> fold_metrics;
};

// Seeded shuffled k-fold split; fold sizes differ by at most one and every
// row lands in exactly one validation fold.
CvResult cross_validate(const Dataset& data, const GbdtParams& params, Objective objective,
                        int k, std::uint64_t seed = 7);

struct GridSearchResult {
    GbdtParams best;
    double best_metric = 0.0;
    int cv_runs = 0;
};

// Exhaustive Cartesian product over the four tunable hyperparameters
// (num_leaves, min_data_in_leaf, lambda_l1, lambda_l2); other fields come
// from `base`. Ties prefer fewer leaves, then more data per leaf.
GridSearchResult grid_search(const Dataset& data,
                             const std::map<std::string, std::vector<double>>& grid,
                             const GbdtParams& base, Objective objective, int k,
                             std::uint64_t seed = 7);

void save_model(const GbdtModel& model, std::ostream& out);
void save_model_file(const GbdtModel& model, const std::string& path);
GbdtModel load_model(std::istream& in);
GbdtModel load_model_file(const std::string& path);

}  // namespace regatta::gbdt
