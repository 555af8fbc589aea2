#include "regatta/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "regatta/rng.hpp"

namespace regatta::gbdt {

using nlohmann::json;

const char* to_string(Objective o) { return o == Objective::squared ? "squared" : "logistic"; }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double soft_threshold(double g, double lambda) {
    if (g > lambda) return g - lambda;
    if (g < -lambda) return g + lambda;
    return 0.0;
}

double leaf_weight(double sum_grad, double sum_hess, const GbdtParams& p) {
    double denom = sum_hess + p.lambda_l2;
    if (denom <= 1e-12) return 0.0;
    return -soft_threshold(sum_grad, p.lambda_l1) / denom;
}

double leaf_score(double sum_grad, double sum_hess, const GbdtParams& p) {
    double denom = sum_hess + p.lambda_l2;
    if (denom <= 1e-12) return 0.0;
    double st = soft_threshold(sum_grad, p.lambda_l1);
    return st * st / denom;
}

struct Split {
    double gain = -kInf;
    int feature = -1;
    double threshold = 0.0;
};

struct LeafState {
    int node = -1;
    std::vector<int> rows;
    double sum_grad = 0.0;
    double sum_hess = 0.0;
    Split best;
};

// Exact search over sorted feature values. Thresholds fall between distinct
// consecutive values, so equal values never separate.
Split best_split(const Dataset& data, const std::vector<int>& rows,
                 const std::vector<double>& grad, const std::vector<double>& hess,
                 double sum_grad, double sum_hess, const GbdtParams& p) {
    Split best;
    int n = static_cast<int>(rows.size());
    if (n < 2 * p.min_data_in_leaf) return best;
    double parent_score = leaf_score(sum_grad, sum_hess, p);

    std::vector<std::pair<double, int>> order(static_cast<size_t>(n));
    for (int f = 0; f < data.n_features(); ++f) {
        for (int i = 0; i < n; ++i)
            order[static_cast<size_t>(i)] = {data.features[static_cast<size_t>(rows[i])]
                                                          [static_cast<size_t>(f)],
                                             rows[static_cast<size_t>(i)]};
        std::sort(order.begin(), order.end());

        double left_grad = 0.0, left_hess = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            left_grad += grad[static_cast<size_t>(order[static_cast<size_t>(i)].second)];
            left_hess += hess[static_cast<size_t>(order[static_cast<size_t>(i)].second)];
            double v = order[static_cast<size_t>(i)].first;
            double next = order[static_cast<size_t>(i) + 1].first;
            if (v == next) continue;
            int left_n = i + 1;
            int right_n = n - left_n;
            if (left_n < p.min_data_in_leaf || right_n < p.min_data_in_leaf) continue;
            double gain = leaf_score(left_grad, left_hess, p) +
                          leaf_score(sum_grad - left_grad, sum_hess - left_hess, p) -
                          parent_score;
            double threshold = (v + next) / 2.0;
            bool better = gain > best.gain ||
                          (gain == best.gain &&
                           (f < best.feature || (f == best.feature && threshold < best.threshold)));
            if (better) best = {gain, f, threshold};
        }
    }
    return best;
}

DecisionTree fit_tree(const Dataset& data, const std::vector<double>& grad,
                      const std::vector<double>& hess, const GbdtParams& p) {
    DecisionTree tree;
    tree.nodes.push_back({});

    LeafState root;
    root.node = 0;
    root.rows.resize(data.features.size());
    std::iota(root.rows.begin(), root.rows.end(), 0);
    for (int r : root.rows) {
        root.sum_grad += grad[static_cast<size_t>(r)];
        root.sum_hess += hess[static_cast<size_t>(r)];
    }
    root.best = best_split(data, root.rows, grad, hess, root.sum_grad, root.sum_hess, p);

    std::vector<LeafState> leaves{std::move(root)};
    while (static_cast<int>(leaves.size()) < p.num_leaves) {
        // Best-first: expand the leaf with the largest gain (ties: the leaf
        // created earliest, i.e. the lowest node id).
        int pick = -1;
        for (size_t i = 0; i < leaves.size(); ++i) {
            if (leaves[i].best.feature < 0 || leaves[i].best.gain <= 1e-12) continue;
            if (pick < 0 || leaves[i].best.gain > leaves[static_cast<size_t>(pick)].best.gain ||
                (leaves[i].best.gain == leaves[static_cast<size_t>(pick)].best.gain &&
                 leaves[i].node < leaves[static_cast<size_t>(pick)].node))
                pick = static_cast<int>(i);
        }
        if (pick < 0) break;

        LeafState leaf = std::move(leaves[static_cast<size_t>(pick)]);
        leaves.erase(leaves.begin() + pick);

        LeafState left, right;
        for (int r : leaf.rows) {
            bool to_left = data.features[static_cast<size_t>(r)]
                                        [static_cast<size_t>(leaf.best.feature)] <=
                           leaf.best.threshold;
            LeafState& side = to_left ? left : right;
            side.rows.push_back(r);
            side.sum_grad += grad[static_cast<size_t>(r)];
            side.sum_hess += hess[static_cast<size_t>(r)];
        }

        left.node = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        right.node = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});

        TreeNode& parent = tree.nodes[static_cast<size_t>(leaf.node)];
        parent.feature = leaf.best.feature;
        parent.threshold = leaf.best.threshold;
        parent.left = left.node;
        parent.right = right.node;

        left.best = best_split(data, left.rows, grad, hess, left.sum_grad, left.sum_hess, p);
        right.best = best_split(data, right.rows, grad, hess, right.sum_grad, right.sum_hess, p);
        leaves.push_back(std::move(left));
        leaves.push_back(std::move(right));
    }

    for (const LeafState& leaf : leaves) {
        TreeNode& node = tree.nodes[static_cast<size_t>(leaf.node)];
        node.feature = -1;
        node.value = leaf_weight(leaf.sum_grad, leaf.sum_hess, p);
        node.n_data = static_cast<int>(leaf.rows.size());
    }
    return tree;
}

}  // namespace

double DecisionTree::predict(std::span<const double> x) const {
    int node = 0;
    while (nodes[static_cast<size_t>(node)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<size_t>(node)];
        node = x[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<size_t>(node)].value;
}

int DecisionTree::leaf_count() const {
    int count = 0;
    for (const TreeNode& n : nodes)
        if (n.feature < 0) ++count;
    return count;
}

int DecisionTree::min_leaf_data() const {
    int min_n = std::numeric_limits<int>::max();
    for (const TreeNode& n : nodes)
        if (n.feature < 0) min_n = std::min(min_n, n.n_data);
    return min_n;
}

double GbdtModel::predict_raw(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != n_features)
        throw InvalidError("feature vector width does not match the trained model");
    double raw = base_score;
    for (const DecisionTree& tree : trees) raw += params.learning_rate * tree.predict(x);
    return raw;
}

double GbdtModel::predict(std::span<const double> x) const {
    double raw = predict_raw(x);
    return objective == Objective::logistic ? sigmoid(raw) : raw;
}

GbdtModel train(const Dataset& data, const GbdtParams& params, Objective objective) {
    if (data.n_rows() < 1) throw InvalidError("cannot train on an empty dataset");
    if (static_cast<int>(data.targets.size()) != data.n_rows())
        throw InvalidError("feature/target row counts differ");
    for (const auto& row : data.features) {
        if (static_cast<int>(row.size()) != data.n_features())
            throw InvalidError("ragged feature matrix");
        for (double v : row)
            if (std::isnan(v)) throw InvalidError("NaN feature value");
    }
    if (objective == Objective::logistic) {
        bool has0 = false, has1 = false;
        for (double y : data.targets) (y > 0.5 ? has1 : has0) = true;
        if (!has0 || !has1)
            throw InvalidError("logistic training needs both classes present");
    }

    GbdtModel model;
    model.objective = objective;
    model.params = params;
    model.n_features = data.n_features();

    size_t n = static_cast<size_t>(data.n_rows());
    if (objective == Objective::squared) {
        double mean = std::accumulate(data.targets.begin(), data.targets.end(), 0.0) / n;
        model.base_score = mean;
    } else {
        double p = std::accumulate(data.targets.begin(), data.targets.end(), 0.0) / n;
        p = std::clamp(p, 1e-6, 1.0 - 1e-6);
        model.base_score = std::log(p / (1.0 - p));
    }

    std::vector<double> raw(n, model.base_score);
    std::vector<double> grad(n), hess(n);
    auto loss = [&]() {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (objective == Objective::squared) {
                double d = raw[i] - data.targets[i];
                total += d * d;
            } else {
                double p = std::clamp(sigmoid(raw[i]), 1e-12, 1.0 - 1e-12);
                total -= data.targets[i] * std::log(p) + (1 - data.targets[i]) * std::log(1 - p);
            }
        }
        return total / static_cast<double>(n);
    };

    for (int round = 0; round < params.n_trees; ++round) {
        for (size_t i = 0; i < n; ++i) {
            if (objective == Objective::squared) {
                grad[i] = raw[i] - data.targets[i];
                hess[i] = 1.0;
            } else {
                double p = sigmoid(raw[i]);
                grad[i] = p - data.targets[i];
                hess[i] = std::max(p * (1.0 - p), 1e-16);
            }
        }
        DecisionTree tree = fit_tree(data, grad, hess, params);
        for (size_t i = 0; i < n; ++i)
            raw[i] += params.learning_rate * tree.predict(data.features[i]);
        model.trees.push_back(std::move(tree));
        model.train_loss.push_back(loss());
    }
    return model;
}

ClassificationMetrics confusion_metrics(std::int64_t tp, std::int64_t tn, std::int64_t fp,
                                        std::int64_t fn) {
    if (tp < 0 || tn < 0 || fp < 0 || fn < 0)
        throw InvalidError("confusion counters must be >= 0");
    std::int64_t total = tp + tn + fp + fn;
    if (total == 0) throw InvalidError("empty confusion matrix");

    ClassificationMetrics m;
    m.tp = tp;
    m.tn = tn;
    m.fp = fp;
    m.fn = fn;
    auto ratio = [](std::int64_t num, std::int64_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.accuracy = ratio(tp + tn, total);
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.sensitivity = ratio(tn, tn + fp);
    if (auto r = ratio(fp, tp + fn)) m.false_positive_pct_of_positive = 100.0 * *r;
    if (auto r = ratio(fn, tn + fp)) m.false_negative_pct_of_negative = 100.0 * *r;
    return m;
}

RegressionMetrics regression_metrics(std::span<const double> predictions,
                                     std::span<const double> targets) {
    if (predictions.size() != targets.size() || predictions.empty())
        throw InvalidError("regression metrics need equal-length non-empty inputs");
    double se = 0.0, ae = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        double d = predictions[i] - targets[i];
        se += d * d;
        ae += std::abs(d);
    }
    double n = static_cast<double>(predictions.size());
    RegressionMetrics m;
    m.mse = se / n;
    m.rmse = std::sqrt(m.mse);
    m.mae = ae / n;
    return m;
}

namespace {

double score_fold(const GbdtModel& model, const Dataset& data, const std::vector<int>& rows) {
    if (model.objective == Objective::logistic) {
        std::int64_t correct = 0;
        for (int r : rows) {
            double p = model.predict(data.features[static_cast<size_t>(r)]);
            double label = p >= 0.5 ? 1.0 : 0.0;
            if (label == data.targets[static_cast<size_t>(r)]) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(rows.size());
    }
    double se = 0.0;
    for (int r : rows) {
        double d = model.predict(data.features[static_cast<size_t>(r)]) -
                   data.targets[static_cast<size_t>(r)];
        se += d * d;
    }
    return se / static_cast<double>(rows.size());
}

Dataset subset(const Dataset& data, const std::vector<int>& rows) {
    Dataset out;
    for (int r : rows) {
        out.features.push_back(data.features[static_cast<size_t>(r)]);
        out.targets.push_back(data.targets[static_cast<size_t>(r)]);
    }
    return out;
}

}  // namespace

CvResult cross_validate(const Dataset& data, const GbdtParams& params, Objective objective,
                        int k, std::uint64_t seed) {
    if (k < 2) throw InvalidError("cross-validation needs k >= 2");
    if (k > data.n_rows()) throw InvalidError("cross-validation needs k <= n_rows");

    std::vector<int> indices(static_cast<size_t>(data.n_rows()));
    std::iota(indices.begin(), indices.end(), 0);
    Rng rng(seed);
    for (size_t i = indices.size(); i > 1; --i)
        std::swap(indices[i - 1], indices[static_cast<size_t>(rng.below(i))]);

    int base = data.n_rows() / k;
    int extra = data.n_rows() % k;
    CvResult result;
    size_t cursor = 0;
    for (int f = 0; f < k; ++f) {
        size_t size = static_cast<size_t>(base + (f < extra ? 1 : 0));
        std::vector<int> valid(indices.begin() + static_cast<long>(cursor),
                               indices.begin() + static_cast<long>(cursor + size));
        std::vector<int> train_rows;
        for (size_t i = 0; i < indices.size(); ++i)
            if (i < cursor || i >= cursor + size) train_rows.push_back(indices[i]);
        cursor += size;

        GbdtModel model = train(subset(data, train_rows), params, objective);
        result.fold_metrics.push_back(score_fold(model, data, valid));
    }
    result.mean_metric =
        std::accumulate(result.fold_metrics.begin(), result.fold_metrics.end(), 0.0) /
        static_cast<double>(k);
    return result;
}

GridSearchResult grid_search(const Dataset& data,
                             const std::map<std::string, std::vector<double>>& grid,
                             const GbdtParams& base, Objective objective, int k,
                             std::uint64_t seed) {
    if (grid.empty()) throw InvalidError("empty hyperparameter grid");
    static const char* known[] = {"num_leaves", "min_data_in_leaf", "lambda_l1", "lambda_l2"};
    for (const auto& [key, values] : grid) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* n) { return key == n; }) == std::end(known))
            throw InvalidError("unknown grid hyperparameter: " + key);
        if (values.empty()) throw InvalidError("empty value list for " + key);
    }
    auto axis = [&](const char* name, double fallback) {
        auto it = grid.find(name);
        return it != grid.end() ? it->second : std::vector<double>{fallback};
    };
    auto leaves_axis = axis("num_leaves", base.num_leaves);
    auto min_data_axis = axis("min_data_in_leaf", base.min_data_in_leaf);
    auto l1_axis = axis("lambda_l1", base.lambda_l1);
    auto l2_axis = axis("lambda_l2", base.lambda_l2);

    bool maximize = objective == Objective::logistic;
    GridSearchResult result;
    bool first = true;
    for (double leaves : leaves_axis) {
        for (double min_data : min_data_axis) {
            for (double l1 : l1_axis) {
                for (double l2 : l2_axis) {
                    GbdtParams p = base;
                    p.num_leaves = static_cast<int>(leaves);
                    p.min_data_in_leaf = static_cast<int>(min_data);
                    p.lambda_l1 = l1;
                    p.lambda_l2 = l2;
                    double metric = cross_validate(data, p, objective, k, seed).mean_metric;
                    ++result.cv_runs;
                    bool better;
                    if (first) {
                        better = true;
                    } else if (metric != result.best_metric) {
                        better = maximize ? metric > result.best_metric
                                          : metric < result.best_metric;
                    } else {
                        // Prefer the simpler model on exact ties.
                        better = p.num_leaves < result.best.num_leaves ||
                                 (p.num_leaves == result.best.num_leaves &&
                                  p.min_data_in_leaf > result.best.min_data_in_leaf);
                    }
                    if (better) {
                        result.best = p;
                        result.best_metric = metric;
                        first = false;
                    }
                }
            }
        }
    }
    return result;
}

void save_model(const GbdtModel& model, std::ostream& out) {
    json doc;
    doc["format"] = "regatta-gbdt-1";
    doc["objective"] = to_string(model.objective);
    doc["base_score"] = model.base_score;
    doc["n_features"] = model.n_features;
    doc["params"] = {{"num_leaves", model.params.num_leaves},
                     {"min_data_in_leaf", model.params.min_data_in_leaf},
                     {"lambda_l1", model.params.lambda_l1},
                     {"lambda_l2", model.params.lambda_l2},
                     {"learning_rate", model.params.learning_rate},
                     {"n_trees", model.params.n_trees}};
    doc["train_loss"] = model.train_loss;
    json trees = json::array();
    for (const DecisionTree& tree : model.trees) {
        json t;
        for (const TreeNode& n : tree.nodes) {
            t["feature"].push_back(n.feature);
            t["threshold"].push_back(n.threshold);
            t["left"].push_back(n.left);
            t["right"].push_back(n.right);
            t["value"].push_back(n.value);
            t["n_data"].push_back(n.n_data);
        }
        trees.push_back(std::move(t));
    }
    doc["trees"] = std::move(trees);
    out << doc.dump(2) << '\n';
}

void save_model_file(const GbdtModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open model file for write: " + path);
    save_model(model, out);
}

GbdtModel load_model(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    if (doc.value("format", "") != "regatta-gbdt-1")
        throw ParseError("not a regatta GBDT model file");

    GbdtModel model;
    std::string obj = doc.at("objective").get<std::string>();
    model.objective = obj == "logistic" ? Objective::logistic : Objective::squared;
    model.base_score = doc.at("base_score").get<double>();
    model.n_features = doc.at("n_features").get<int>();
    const json& p = doc.at("params");
    model.params.num_leaves = p.at("num_leaves").get<int>();
    model.params.min_data_in_leaf = p.at("min_data_in_leaf").get<int>();
    model.params.lambda_l1 = p.at("lambda_l1").get<double>();
    model.params.lambda_l2 = p.at("lambda_l2").get<double>();
    model.params.learning_rate = p.at("learning_rate").get<double>();
    model.params.n_trees = p.at("n_trees").get<int>();
    model.train_loss = doc.value("train_loss", std::vector<double>{});
    for (const json& t : doc.at("trees")) {
        DecisionTree tree;
        size_t count = t.at("feature").size();
        for (size_t i = 0; i < count; ++i) {
            TreeNode n;
            n.feature = t.at("feature")[i].get<int>();
            n.threshold = t.at("threshold")[i].get<double>();
            n.left = t.at("left")[i].get<int>();
            n.right = t.at("right")[i].get<int>();
            n.value = t.at("value")[i].get<double>();
            n.n_data = t.at("n_data")[i].get<int>();
            tree.nodes.push_back(n);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

GbdtModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    return load_model(in);
}

}  // namespace regatta::gbdt
