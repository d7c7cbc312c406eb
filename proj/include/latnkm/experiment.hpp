#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "latnkm/data_io.hpp"
#include "latnkm/metrics.hpp"

namespace latnkm {

enum class PredictiveMode { LA, LLA };

std::string to_string(PredictiveMode m);
PredictiveMode predictive_mode_from_string(const std::string& name);

/// Declarative description of one experiment. Populated from a JSON config
/// file and/or CLI flags; flags win.
struct ExperimentConfig {
    std::string dataset = "synthetic-cubic";  // path to CSV or "synthetic-cubic"
    std::string target_column;                // empty: last column
    int rank = 2;
    int local_dim = 4;
    HessianVariant variant = HessianVariant::LastCore;
    double threshold = 0.0;
    bool threshold_relative = false;
    PredictiveMode mode = PredictiveMode::LLA;
    int mc_samples = 500;
    int epochs = 25;
    int vi_rounds = 5;
    double fixed_beta = -1.0;   // <= 0: learned via VI
    double fixed_gamma = -1.0;  // <= 0: learned via VI
    double init_gamma = 1e-6;   // starting plug-in weight precision
    double train_frac = 0.9;
    int repeats = 1;
    std::uint64_t seed = 0;
    bool drop_constant = false;
    bool raw_scale = false;  // report metrics on the raw target scale

    void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

/// Train/test pair per the config: synthetic-cubic generation or a seeded
/// standardized split of the CSV dataset.
std::pair<Dataset, Dataset> prepare_data(const ExperimentConfig& cfg, std::uint64_t seed);

BayesConfig bayes_config(const ExperimentConfig& cfg, std::uint64_t seed);

/// One predictive distribution per test row, in the configured mode.
std::vector<PredictiveDist> predict_all(const LaplacePosterior& post, const Matrix& X_test,
                                        PredictiveMode mode, int mc_samples, std::uint64_t seed);

struct RunResult {
    std::uint64_t seed = 0;
    MetricReport report;
};

/// Full pipeline for one seed: data, fit_bayes, predict, metrics.
RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

/// Posterior artifact (de)serialization; versioned schema, refuses mismatches.
nlohmann::json artifact_to_json(const LaplacePosterior& post, const ExperimentConfig& cfg,
                                const std::optional<Standardizer>& st);
LaplacePosterior artifact_from_json(const nlohmann::json& j, ExperimentConfig* cfg_out = nullptr,
                                    std::optional<Standardizer>* st_out = nullptr);
void save_artifact(const std::string& path, const LaplacePosterior& post,
                   const ExperimentConfig& cfg, const std::optional<Standardizer>& st);
LaplacePosterior load_artifact(const std::string& path, ExperimentConfig* cfg_out = nullptr,
                               std::optional<Standardizer>* st_out = nullptr);

struct Summary {
    MetricReport mean;
    MetricReport stddev;
    std::vector<RunResult> runs;
};

/// Repeats the experiment with seeds base_seed + i and aggregates mean/std.
Summary run_repeats(const ExperimentConfig& cfg);

nlohmann::json summary_to_json(const Summary& s, const ExperimentConfig& cfg);
std::string summary_to_text(const Summary& s, const ExperimentConfig& cfg);

struct CvCell {
    int rank = 0;
    int local_dim = 0;
    double threshold = 0.0;
    double val_nll = 0.0;
    bool failed = false;
    std::string error;
};

struct CvResult {
    CvCell best;
    std::vector<CvCell> table;
};

/// k-fold cross-validation over (rank, local_dim, threshold) grids on the
/// training split; selects by validation NLL, ties broken by smaller rank,
/// then smaller local_dim, then larger threshold.
CvResult cross_validate(const ExperimentConfig& cfg, const std::vector<int>& ranks,
                        const std::vector<int>& local_dims, const std::vector<double>& thresholds,
                        int folds = 5);

struct SweepRow {
    HessianVariant variant;
    double threshold = 0.0;
    MetricReport report;
    bool skipped = false;
    std::string note;
};

/// One row per Hessian variant x threshold; the Full variant is skipped with
/// a note when DIR exceeds the dense cap.
std::vector<SweepRow> sweep_hessian(const ExperimentConfig& cfg,
                                    const std::vector<double>& thresholds);

}  // namespace latnkm
