#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "regatta/eval.hpp"
#include "regatta/evo.hpp"
#include "regatta/gbdt.hpp"

namespace regatta {

// Chromosome -> fixed-width feature vector. Cells are labeled with ordered
// natural numbers (left to right, bottom up): label = y * width + x + 1.
// Vectors are right-padded with 0 to max_len.
struct FeatureEncoding {
    int court_width = 0;
    int court_height = 0;
    int max_len = 0;
};

std::vector<double> featurize(const Chromosome& ch, const FeatureEncoding& enc);

enum class CostLabel : int { good = 0, bad = 1 };

// Labeling threshold and in-line training policy. Costs here are always
// per-scenario-normalized (aggregate / scenario count), so epsilon does not
// depend on how many scenarios a run uses.
struct GateConfig {
    double base_cost = 0.0;        // normalized cost of s_w0
    double epsilon = 0.0;          // a solution is bad iff cost > base_cost + epsilon
    double accuracy_gate = 0.75;   // holdout accuracy needed to activate gating
    int min_train_rows = 500;
    int tune_below_rows = 1500;    // grid-search hyperparameters below this; 0 disables
    double audit_fraction = 0.05;  // share of gated-out individuals re-checked truly

    double threshold() const { return base_cost + epsilon; }
};

CostLabel label(double normalized_cost, const GateConfig& gate);

struct AuditRecord {
    double forecast_cost = 0.0;  // normalized
    double true_cost = 0.0;      // normalized
};

struct SurrogateReport {
    int audited = 0;
    int false_negatives = 0;   // truly good but gated out
    int recovered = 0;         // of those, forecast within the error band
    double error_band = 50.0;  // normalized cost units
};

// Accumulated training rows plus the two models and the gating flag. Rows
// come only from true evaluations; forecasts never feed back into training.
class SurrogateState {
   public:
    SurrogateState(FeatureEncoding encoding, GateConfig gate, gbdt::GbdtParams params,
                   int scenario_count, std::uint64_t seed);

    // Adds one (features, cost, label) row per newly seen true-evaluated
    // chromosome. Forecast-valued individuals are skipped.
    void ingest_generation(const std::vector<Individual>& pop);

    // 80/20 split, trains classifier and regressor, updates the active flag.
    // No-op until min_train_rows rows exist.
    void retrain();

    // Gate for evaluate_population: nullopt while inactive or for
    // predicted-good chromosomes; otherwise the forecast aggregate cost.
    std::optional<double> gate_or_forecast(const Chromosome& ch);

    // Chromosomes sampled for a true re-check of their forecasts; the caller
    // computes the true costs and reports them back via record_audit.
    std::vector<std::pair<Chromosome, double>> take_pending_audits();
    void record_audit(double forecast_cost, double true_cost);

    SurrogateReport fn_recovery_report(double error_band = 50.0) const;

    bool active() const { return active_; }
    double last_holdout_accuracy() const { return last_holdout_accuracy_; }
    int row_count() const { return rows_.n_rows(); }
    std::uint64_t gated_out() const { return gated_out_; }
    std::uint64_t forecast_count() const { return forecasts_; }
    const GateConfig& gate_config() const { return gate_; }
    const gbdt::GbdtModel* classifier() const {
        return classifier_ ? &*classifier_ : nullptr;
    }
    const gbdt::GbdtModel* regressor() const { return regressor_ ? &*regressor_ : nullptr; }

   private:
    FeatureEncoding encoding_;
    GateConfig gate_;
    gbdt::GbdtParams params_;
    int scenario_count_;
    std::uint64_t seed_;
    int retrains_ = 0;

    gbdt::Dataset rows_;  // targets hold the normalized cost
    std::unordered_set<std::string> ingested_;

    std::optional<gbdt::GbdtModel> classifier_;
    std::optional<gbdt::GbdtModel> regressor_;
    bool active_ = false;
    double last_holdout_accuracy_ = 0.0;

    Rng audit_rng_;
    std::vector<std::pair<Chromosome, double>> pending_audits_;
    std::vector<AuditRecord> audits_;
    std::uint64_t gated_out_ = 0;
    std::uint64_t forecasts_ = 0;
};

// Offline study artifacts: split once, train both models, measure.
struct OfflineStudy {
    int train_rows = 0;
    int holdout_rows = 0;
    double classifier_accuracy = 0.0;
    gbdt::ClassificationMetrics confusion;
    gbdt::RegressionMetrics regression;
    double mean_cost = 0.0;
    double within_band_fraction = 0.0;  // holdout forecasts within band_fraction of truth
    gbdt::GbdtModel classifier;
    gbdt::GbdtModel regressor;
};

OfflineStudy offline_study(const gbdt::Dataset& rows, const GateConfig& gate,
                           const gbdt::GbdtParams& params, double band_fraction,
                           std::uint64_t seed);

}  // namespace regatta
