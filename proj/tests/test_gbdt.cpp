#include <cmath>
#include <sstream>

#include "doctest.h"
#include "regatta/gbdt.hpp"
#include "regatta/rng.hpp"

using namespace regatta;
using namespace regatta::gbdt;

namespace {

Dataset make_linear(int rows, int features, std::uint64_t seed) {
    Rng rng(seed);
    Dataset data;
    for (int r = 0; r < rows; ++r) {
        std::vector<double> x;
        for (int f = 0; f < features; ++f) x.push_back(rng.next_unit() * 10.0);
        data.targets.push_back(x[0]);  // target = feature_0
        data.features.push_back(std::move(x));
    }
    return data;
}

Dataset make_separable(int rows, std::uint64_t seed) {
    Rng rng(seed);
    Dataset data;
    for (int r = 0; r < rows; ++r) {
        double x = rng.next_unit() * 10.0;
        double y = rng.next_unit() * 10.0;
        // Margin around the boundary keeps the classes cleanly separable.
        if (x + y > 9.0 && x + y < 11.0) {
            --r;
            continue;
        }
        data.features.push_back({x, y});
        data.targets.push_back(x + y > 10.0 ? 1.0 : 0.0);
    }
    return data;
}

double variance(const std::vector<double>& v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    return var / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("a constant target is reproduced exactly by one tree") {
    Dataset data;
    for (int i = 0; i < 50; ++i) {
        data.features.push_back({static_cast<double>(i), static_cast<double>(i % 7)});
        data.targets.push_back(3.25);
    }
    GbdtParams params;
    params.n_trees = 1;
    GbdtModel model = train(data, params, Objective::squared);
    for (const auto& row : data.features) CHECK(model.predict(row) == doctest::Approx(3.25));
}

TEST_CASE("separable two-class data trains to perfect accuracy") {
    Dataset data = make_separable(200, 42);
    GbdtParams params;
    params.min_data_in_leaf = 5;
    GbdtModel model = train(data, params, Objective::logistic);
    int correct = 0;
    for (int r = 0; r < data.n_rows(); ++r) {
        double p = model.predict(data.features[static_cast<size_t>(r)]);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        if ((p >= 0.5 ? 1.0 : 0.0) == data.targets[static_cast<size_t>(r)]) ++correct;
    }
    CHECK(correct == data.n_rows());
}

TEST_CASE("regression on target = feature_0 reaches holdout MSE below 1% of variance") {
    Dataset train_data = make_linear(500, 3, 7);
    Dataset holdout = make_linear(200, 3, 8);
    GbdtParams params;
    params.n_trees = 50;
    params.min_data_in_leaf = 5;
    GbdtModel model = train(train_data, params, Objective::squared);
    std::vector<double> predictions;
    for (const auto& row : holdout.features) predictions.push_back(model.predict(row));
    RegressionMetrics m = regression_metrics(predictions, holdout.targets);
    CHECK(m.mse < 0.01 * variance(holdout.targets));
}

TEST_CASE("training loss never increases per boosting round") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        Rng rng(seed);
        Dataset data;
        for (int r = 0; r < 120; ++r) {
            std::vector<double> x{rng.next_unit() * 4, rng.next_unit() * 4, rng.next_unit()};
            data.targets.push_back(std::sin(x[0]) * 3 + x[1] + rng.next_unit() * 0.3);
            data.features.push_back(std::move(x));
        }
        GbdtParams params;
        params.n_trees = 40;
        params.min_data_in_leaf = 5;
        GbdtModel model = train(data, params, Objective::squared);
        for (size_t i = 1; i < model.train_loss.size(); ++i)
            CHECK(model.train_loss[i] <= model.train_loss[i - 1] + 1e-12);

        // Same property for the logistic objective.
        Dataset cls = data;
        for (double& y : cls.targets) y = y > 2.0 ? 1.0 : 0.0;
        GbdtModel logit = train(cls, params, Objective::logistic);
        for (size_t i = 1; i < logit.train_loss.size(); ++i)
            CHECK(logit.train_loss[i] <= logit.train_loss[i - 1] + 1e-12);
    }
}

TEST_CASE("structural limits hold on every trained tree") {
    Dataset data = make_linear(300, 4, 11);
    GbdtParams params;
    params.num_leaves = 7;
    params.min_data_in_leaf = 12;
    params.n_trees = 25;
    GbdtModel model = train(data, params, Objective::squared);
    CHECK(model.trees.size() == 25);
    for (const DecisionTree& tree : model.trees) {
        CHECK(tree.leaf_count() <= 7);
        CHECK(tree.min_leaf_data() >= 12);
    }
}

TEST_CASE("large L2 shrinks leaf weights monotonically") {
    Dataset data = make_linear(200, 2, 13);
    auto max_leaf = [&](double l2) {
        GbdtParams params;
        params.n_trees = 1;
        params.lambda_l2 = l2;
        GbdtModel model = train(data, params, Objective::squared);
        double biggest = 0;
        for (const TreeNode& n : model.trees[0].nodes)
            if (n.feature < 0) biggest = std::max(biggest, std::abs(n.value));
        return biggest;
    };
    double none = max_leaf(0.0);
    double some = max_leaf(50.0);
    double lots = max_leaf(5000.0);
    CHECK(some < none);
    CHECK(lots < some);
    CHECK(lots < 0.1 * none);
}

TEST_CASE("prediction equals manual traversal of the trees") {
    Dataset data = make_linear(100, 3, 17);
    GbdtParams params;
    params.n_trees = 3;
    params.min_data_in_leaf = 5;
    GbdtModel model = train(data, params, Objective::squared);
    REQUIRE(model.trees.size() == 3);

    Rng rng(23);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> x{rng.next_unit() * 10, rng.next_unit() * 10, rng.next_unit() * 10};
        double manual = model.base_score;
        for (const DecisionTree& tree : model.trees) {
            int node = 0;
            while (tree.nodes[static_cast<size_t>(node)].feature >= 0) {
                const TreeNode& n = tree.nodes[static_cast<size_t>(node)];
                node = x[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
            }
            manual += model.params.learning_rate * tree.nodes[static_cast<size_t>(node)].value;
        }
        CHECK(model.predict(x) == doctest::Approx(manual).epsilon(1e-12));
    }
}

TEST_CASE("zero-tree model predicts the base score") {
    Dataset data = make_linear(40, 2, 29);
    GbdtParams params;
    params.n_trees = 0;
    GbdtModel model = train(data, params, Objective::squared);
    CHECK(model.trees.empty());
    CHECK(model.predict(data.features[0]) == doctest::Approx(model.base_score));

    Dataset cls = make_separable(60, 30);
    GbdtModel logit = train(cls, params, Objective::logistic);
    double expect = 1.0 / (1.0 + std::exp(-logit.base_score));
    CHECK(logit.predict(cls.features[0]) == doctest::Approx(expect));
}

TEST_CASE("training rejects bad inputs") {
    Dataset empty;
    CHECK_THROWS_AS(train(empty, {}, Objective::squared), InvalidError);

    Dataset single;
    single.features = {{1.0}, {2.0}};
    single.targets = {1.0, 1.0};
    CHECK_THROWS_AS(train(single, {}, Objective::logistic), InvalidError);

    Dataset nan_data;
    nan_data.features = {{std::nan("")}};
    nan_data.targets = {1.0};
    CHECK_THROWS_AS(train(nan_data, {}, Objective::squared), InvalidError);

    Dataset ok = make_linear(30, 2, 5);
    GbdtParams params;
    params.n_trees = 2;
    GbdtModel model = train(ok, params, Objective::squared);
    std::vector<double> wrong_width{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(model.predict(wrong_width), InvalidError);
}

TEST_CASE("confusion metrics reproduce the reported study values") {
    ClassificationMetrics m = confusion_metrics(1518, 165, 14, 16);
    CHECK(*m.accuracy == doctest::Approx(0.9825).epsilon(0.0005));
    CHECK(*m.precision == doctest::Approx(0.9909).epsilon(0.0005));
    CHECK(*m.recall == doctest::Approx(0.9896).epsilon(0.0005));
    // The complementary-class margins: 14 of 1534 bad, 16 of 179 good.
    CHECK(*m.false_positive_pct_of_positive == doctest::Approx(0.91).epsilon(0.01));
    CHECK(*m.false_negative_pct_of_negative == doctest::Approx(8.94).epsilon(0.001));
    CHECK(*m.sensitivity == doctest::Approx(165.0 / 179.0));

    ClassificationMetrics zero = confusion_metrics(0, 5, 0, 0);
    CHECK_FALSE(zero.precision.has_value());  // undefined, not zero
    CHECK_FALSE(zero.recall.has_value());
    CHECK(*zero.accuracy == doctest::Approx(1.0));
    CHECK_THROWS_AS(confusion_metrics(0, 0, 0, 0), InvalidError);
    CHECK_THROWS_AS(confusion_metrics(-1, 1, 0, 0), InvalidError);
}

TEST_CASE("regression metrics definitions") {
    std::vector<double> t{1.0, 2.0, 3.0};
    std::vector<double> same{1.0, 2.0, 3.0};
    RegressionMetrics perfect = regression_metrics(same, t);
    CHECK(perfect.mse == 0.0);
    CHECK(perfect.rmse == 0.0);
    CHECK(perfect.mae == 0.0);

    std::vector<double> offset{3.0, 4.0, 5.0};
    RegressionMetrics off = regression_metrics(offset, t);
    CHECK(off.mse == doctest::Approx(4.0));
    CHECK(off.rmse == doctest::Approx(2.0));
    CHECK(off.mae == doctest::Approx(2.0));
    CHECK(off.mae <= off.rmse);

    // Internal consistency of the reported study numbers: mse 1173 -> rmse 34.25.
    CHECK(std::sqrt(1173.0) == doctest::Approx(34.25).epsilon(0.001));

    std::vector<double> shorter{1.0};
    CHECK_THROWS_AS(regression_metrics(shorter, t), InvalidError);
}

TEST_CASE("k-fold assignment is balanced, exhaustive, and seeded") {
    Dataset data = make_linear(103, 2, 3);
    GbdtParams params;
    params.n_trees = 5;
    params.min_data_in_leaf = 5;
    CvResult r = cross_validate(data, params, Objective::squared, 5, 11);
    CHECK(r.fold_metrics.size() == 5);

    // Fold sizes for n=103, k=5 come out {21, 21, 21, 20, 20}.
    int base = 103 / 5, extra = 103 % 5;
    std::vector<int> sizes;
    for (int f = 0; f < 5; ++f) sizes.push_back(base + (f < extra ? 1 : 0));
    CHECK(sizes == std::vector<int>{21, 21, 21, 20, 20});

    CvResult again = cross_validate(data, params, Objective::squared, 5, 11);
    CHECK(r.mean_metric == again.mean_metric);
    CHECK_THROWS_AS(cross_validate(data, params, Objective::squared, 104, 1), InvalidError);
    CHECK_THROWS_AS(cross_validate(data, params, Objective::squared, 1, 1), InvalidError);

    // Leave-one-out on a small set: every row validated exactly once.
    Dataset tiny = make_linear(12, 2, 9);
    CvResult loo = cross_validate(tiny, params, Objective::squared, 12, 4);
    CHECK(loo.fold_metrics.size() == 12);
}

TEST_CASE("cross-validation MSE is no better than full-data training MSE") {
    GbdtParams params;
    params.n_trees = 20;
    params.min_data_in_leaf = 5;
    for (std::uint64_t seed : {101ull, 202ull, 303ull}) {
        Dataset data = make_linear(150, 3, seed);
        GbdtModel full = train(data, params, Objective::squared);
        std::vector<double> predictions;
        for (const auto& row : data.features) predictions.push_back(full.predict(row));
        double train_mse = regression_metrics(predictions, data.targets).mse;
        double cv_mse = cross_validate(data, params, Objective::squared, 5, seed).mean_metric;
        CHECK(cv_mse >= train_mse);
    }
}

TEST_CASE("grid search enumerates the full product and is deterministic") {
    Dataset data = make_linear(160, 3, 21);
    GbdtParams base;
    base.n_trees = 8;
    base.min_data_in_leaf = 5;

    std::map<std::string, std::vector<double>> grid{
        {"num_leaves", {7, 15}},
        {"min_data_in_leaf", {5, 10}},
        {"lambda_l1", {0.0, 0.5}},
        {"lambda_l2", {0.0, 1.0}},
    };
    GridSearchResult a = grid_search(data, grid, base, Objective::squared, 5, 3);
    CHECK(a.cv_runs == 16);
    GridSearchResult b = grid_search(data, grid, base, Objective::squared, 5, 3);
    CHECK(a.best.num_leaves == b.best.num_leaves);
    CHECK(a.best.min_data_in_leaf == b.best.min_data_in_leaf);
    CHECK(a.best.lambda_l1 == b.best.lambda_l1);
    CHECK(a.best.lambda_l2 == b.best.lambda_l2);
    CHECK(a.best_metric == b.best_metric);

    GridSearchResult single =
        grid_search(data, {{"num_leaves", {9}}}, base, Objective::squared, 5, 3);
    CHECK(single.cv_runs == 1);
    CHECK(single.best.num_leaves == 9);
    CHECK(single.best.min_data_in_leaf == base.min_data_in_leaf);

    CHECK_THROWS_AS(grid_search(data, {}, base, Objective::squared, 5, 3), InvalidError);
    CHECK_THROWS_AS(grid_search(data, {{"max_depth", {3}}}, base, Objective::squared, 5, 3),
                    InvalidError);
}

TEST_CASE("grid search finds a planted optimum") {
    // Deep interaction target: a single-split tree (2 leaves) cannot fit it,
    // so the larger num_leaves candidate must win.
    Rng rng(31);
    Dataset data;
    for (int r = 0; r < 240; ++r) {
        double a = rng.next_unit() * 2, b = rng.next_unit() * 2, c = rng.next_unit() * 2;
        data.features.push_back({a, b, c});
        data.targets.push_back((a > 1 ? 4.0 : 0.0) + (b > 1 ? 2.0 : 0.0) + (c > 1 ? 1.0 : 0.0));
    }
    GbdtParams base;
    base.n_trees = 30;
    base.min_data_in_leaf = 5;
    std::map<std::string, std::vector<double>> grid{{"num_leaves", {2, 16}}};
    GridSearchResult result = grid_search(data, grid, base, Objective::squared, 5, 13);
    CHECK(result.best.num_leaves == 16);
}

TEST_CASE("model serialization round-trips and is byte-stable") {
    Dataset data = make_separable(150, 47);
    GbdtParams params;
    params.n_trees = 10;
    params.min_data_in_leaf = 5;
    GbdtModel model = train(data, params, Objective::logistic);

    std::ostringstream first, second;
    save_model(model, first);
    save_model(train(data, params, Objective::logistic), second);
    CHECK(first.str() == second.str());  // training and serialization determinism

    std::istringstream in(first.str());
    GbdtModel loaded = load_model(in);
    CHECK(loaded.objective == Objective::logistic);
    for (int r = 0; r < data.n_rows(); r += 7)
        CHECK(loaded.predict(data.features[static_cast<size_t>(r)]) ==
              model.predict(data.features[static_cast<size_t>(r)]));

    std::istringstream junk("{\"format\":\"something-else\"}");
    CHECK_THROWS_AS(load_model(junk), ParseError);
}
