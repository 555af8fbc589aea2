#include "regatta/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace regatta {

std::vector<double> featurize(const Chromosome& ch, const FeatureEncoding& enc) {
    if (static_cast<int>(ch.waypoints.size()) > enc.max_len)
        throw InvalidError("chromosome longer than the feature encoding width");
    std::vector<double> features(static_cast<size_t>(enc.max_len), 0.0);
    for (size_t i = 0; i < ch.waypoints.size(); ++i) {
        const Cell& c = ch.waypoints[i];
        features[i] = static_cast<double>(c.y) * enc.court_width + c.x + 1;
    }
    return features;
}

CostLabel label(double normalized_cost, const GateConfig& gate) {
    return normalized_cost > gate.threshold() ? CostLabel::bad : CostLabel::good;
}

SurrogateState::SurrogateState(FeatureEncoding encoding, GateConfig gate,
                               gbdt::GbdtParams params, int scenario_count, std::uint64_t seed)
    : encoding_(encoding),
      gate_(gate),
      params_(params),
      scenario_count_(scenario_count),
      seed_(seed),
      audit_rng_(derive_seed(seed, 0xA0D17)) {}

void SurrogateState::ingest_generation(const std::vector<Individual>& pop) {
    for (const Individual& ind : pop) {
        if (ind.evaluated != EvalState::true_eval || !ind.aggregate_cost) continue;
        std::string key = cache_key(ind.chromosome);
        if (!ingested_.insert(std::move(key)).second) continue;
        rows_.features.push_back(featurize(ind.chromosome, encoding_));
        rows_.targets.push_back(*ind.aggregate_cost / scenario_count_);
    }
}

void SurrogateState::retrain() {
    ++retrains_;
    if (rows_.n_rows() < gate_.min_train_rows) return;

    // Deterministic shuffled 80/20 split, reshuffled per retrain.
    std::vector<int> indices(static_cast<size_t>(rows_.n_rows()));
    std::iota(indices.begin(), indices.end(), 0);
    Rng rng(derive_seed(seed_, 0x5B117, static_cast<std::uint64_t>(retrains_)));
    for (size_t i = indices.size(); i > 1; --i)
        std::swap(indices[i - 1], indices[static_cast<size_t>(rng.below(i))]);
    size_t train_n = indices.size() - indices.size() / 5;

    gbdt::Dataset train_cost, train_cls;
    for (size_t i = 0; i < train_n; ++i) {
        const auto& row = rows_.features[static_cast<size_t>(indices[i])];
        double cost = rows_.targets[static_cast<size_t>(indices[i])];
        train_cost.features.push_back(row);
        train_cost.targets.push_back(cost);
        train_cls.features.push_back(row);
        train_cls.targets.push_back(label(cost, gate_) == CostLabel::bad ? 1.0 : 0.0);
    }

    regressor_ = gbdt::train(train_cost, params_, gbdt::Objective::squared);

    bool has_good = false, has_bad = false;
    for (double y : train_cls.targets) (y > 0.5 ? has_bad : has_good) = true;
    if (!has_good || !has_bad) {
        active_ = false;
        return;
    }

    gbdt::GbdtParams cls_params = params_;
    if (gate_.tune_below_rows > 0 && rows_.n_rows() < gate_.tune_below_rows) {
        // Early generations: a small grid over the four tunables instead of
        // trusting the defaults on a thin dataset.
        std::map<std::string, std::vector<double>> grid{
            {"num_leaves", {15, 31}},
            {"min_data_in_leaf", {5, 20}},
        };
        cls_params = gbdt::grid_search(train_cls, grid, params_, gbdt::Objective::logistic, 5,
                                       derive_seed(seed_, 0x6D1D, retrains_))
                         .best;
    }
    classifier_ = gbdt::train(train_cls, cls_params, gbdt::Objective::logistic);

    int correct = 0, holdout_n = 0;
    for (size_t i = train_n; i < indices.size(); ++i) {
        const auto& row = rows_.features[static_cast<size_t>(indices[i])];
        double cost = rows_.targets[static_cast<size_t>(indices[i])];
        double want = label(cost, gate_) == CostLabel::bad ? 1.0 : 0.0;
        double got = classifier_->predict(row) >= 0.5 ? 1.0 : 0.0;
        if (want == got) ++correct;
        ++holdout_n;
    }
    last_holdout_accuracy_ =
        holdout_n > 0 ? static_cast<double>(correct) / holdout_n : 0.0;
    active_ = last_holdout_accuracy_ >= gate_.accuracy_gate;
}

std::optional<double> SurrogateState::gate_or_forecast(const Chromosome& ch) {
    if (!active_) return std::nullopt;
    if (!regressor_) throw InvalidError("surrogate active without a regressor");
    std::vector<double> features = featurize(ch, encoding_);
    if (classifier_->predict(features) < 0.5) return std::nullopt;  // predicted good

    double forecast = regressor_->predict(features);
    ++gated_out_;
    ++forecasts_;
    if (gate_.audit_fraction > 0 && audit_rng_.chance(gate_.audit_fraction))
        pending_audits_.emplace_back(ch, forecast);
    return forecast * scenario_count_;
}

std::vector<std::pair<Chromosome, double>> SurrogateState::take_pending_audits() {
    return std::exchange(pending_audits_, {});
}

void SurrogateState::record_audit(double forecast_cost, double true_cost) {
    audits_.push_back({forecast_cost, true_cost});
}

SurrogateReport SurrogateState::fn_recovery_report(double error_band) const {
    SurrogateReport report;
    report.error_band = error_band;
    report.audited = static_cast<int>(audits_.size());
    for (const AuditRecord& a : audits_) {
        if (label(a.true_cost, gate_) != CostLabel::good) continue;
        ++report.false_negatives;
        if (std::abs(a.forecast_cost - a.true_cost) < error_band) ++report.recovered;
    }
    return report;
}

OfflineStudy offline_study(const gbdt::Dataset& rows, const GateConfig& gate,
                           const gbdt::GbdtParams& params, double band_fraction,
                           std::uint64_t seed) {
    if (rows.n_rows() < 10) throw InvalidError("offline study needs at least 10 rows");

    std::vector<int> indices(static_cast<size_t>(rows.n_rows()));
    std::iota(indices.begin(), indices.end(), 0);
    Rng rng(derive_seed(seed, 0x0FF11E));
    for (size_t i = indices.size(); i > 1; --i)
        std::swap(indices[i - 1], indices[static_cast<size_t>(rng.below(i))]);
    size_t train_n = indices.size() - indices.size() / 5;

    gbdt::Dataset train_cost, train_cls;
    for (size_t i = 0; i < train_n; ++i) {
        const auto& row = rows.features[static_cast<size_t>(indices[i])];
        double cost = rows.targets[static_cast<size_t>(indices[i])];
        train_cost.features.push_back(row);
        train_cost.targets.push_back(cost);
        train_cls.features.push_back(row);
        train_cls.targets.push_back(label(cost, gate) == CostLabel::bad ? 1.0 : 0.0);
    }

    OfflineStudy study;
    study.train_rows = static_cast<int>(train_n);
    study.holdout_rows = static_cast<int>(indices.size() - train_n);
    study.regressor = gbdt::train(train_cost, params, gbdt::Objective::squared);
    study.classifier = gbdt::train(train_cls, params, gbdt::Objective::logistic);

    std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
    std::vector<double> predictions, truths;
    int within_band = 0;
    double cost_sum = 0.0;
    for (size_t i = train_n; i < indices.size(); ++i) {
        const auto& row = rows.features[static_cast<size_t>(indices[i])];
        double cost = rows.targets[static_cast<size_t>(indices[i])];
        bool want_bad = label(cost, gate) == CostLabel::bad;
        bool got_bad = study.classifier.predict(row) >= 0.5;
        if (want_bad && got_bad) ++tp;
        if (!want_bad && !got_bad) ++tn;
        if (!want_bad && got_bad) ++fp;
        if (want_bad && !got_bad) ++fn;

        double forecast = study.regressor.predict(row);
        predictions.push_back(forecast);
        truths.push_back(cost);
        cost_sum += cost;
        if (std::abs(forecast - cost) <= band_fraction * std::abs(cost)) ++within_band;
    }
    study.confusion = gbdt::confusion_metrics(tp, tn, fp, fn);
    study.classifier_accuracy = study.confusion.accuracy.value_or(0.0);
    study.regression = gbdt::regression_metrics(predictions, truths);
    study.mean_cost = cost_sum / static_cast<double>(study.holdout_rows);
    study.within_band_fraction =
        static_cast<double>(within_band) / static_cast<double>(study.holdout_rows);
    return study;
}

}  // namespace regatta
