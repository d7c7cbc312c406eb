#include "latnkm/experiment.hpp"

#include <nlohmann/json.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace latnkm {

using json = nlohmann::json;

std::string to_string(PredictiveMode m) { return m == PredictiveMode::LA ? "la" : "lla"; }

PredictiveMode predictive_mode_from_string(const std::string& name) {
    if (name == "la") return PredictiveMode::LA;
    if (name == "lla") return PredictiveMode::LLA;
    throw ConfigError("unknown predictive mode: " + name);
}

void ExperimentConfig::validate() const {
    if (rank < 1) throw ConfigError("rank must be >= 1");
    if (local_dim < 1) throw ConfigError("local_dim must be >= 1");
    if (mc_samples < 1) throw ConfigError("samples must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (vi_rounds < 0) throw ConfigError("vi_rounds must be >= 0");
    if (!(train_frac > 0 && train_frac < 1)) throw ConfigError("train_frac must lie in (0, 1)");
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    if (vi_rounds == 0 && (fixed_beta <= 0 || fixed_gamma <= 0))
        throw ConfigError("vi_rounds = 0 requires fixed beta and gamma");
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("dataset", cfg.dataset);
    get("target_column", cfg.target_column);
    get("rank", cfg.rank);
    get("local_dim", cfg.local_dim);
    if (j.contains("hessian")) cfg.variant = hessian_variant_from_string(j.at("hessian"));
    get("threshold", cfg.threshold);
    get("threshold_relative", cfg.threshold_relative);
    if (j.contains("mode")) cfg.mode = predictive_mode_from_string(j.at("mode"));
    get("samples", cfg.mc_samples);
    get("epochs", cfg.epochs);
    get("vi_rounds", cfg.vi_rounds);
    get("beta", cfg.fixed_beta);
    get("gamma", cfg.fixed_gamma);
    get("init_gamma", cfg.init_gamma);
    get("train_frac", cfg.train_frac);
    get("repeats", cfg.repeats);
    get("seed", cfg.seed);
    get("drop_constant", cfg.drop_constant);
    get("raw_scale", cfg.raw_scale);
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    return json{{"dataset", cfg.dataset},
                {"target_column", cfg.target_column},
                {"rank", cfg.rank},
                {"local_dim", cfg.local_dim},
                {"hessian", to_string(cfg.variant)},
                {"threshold", cfg.threshold},
                {"threshold_relative", cfg.threshold_relative},
                {"mode", to_string(cfg.mode)},
                {"samples", cfg.mc_samples},
                {"epochs", cfg.epochs},
                {"vi_rounds", cfg.vi_rounds},
                {"beta", cfg.fixed_beta},
                {"gamma", cfg.fixed_gamma},
                {"init_gamma", cfg.init_gamma},
                {"train_frac", cfg.train_frac},
                {"repeats", cfg.repeats},
                {"seed", cfg.seed},
                {"drop_constant", cfg.drop_constant},
                {"raw_scale", cfg.raw_scale}};
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    return config_from_json(j);
}

namespace {

// The unit-norm polynomial map degrades badly once |x| grows past 1 (the
// normalizing denominator then swamps the high-order terms), so the pipeline
// affinely maps every input column into [-0.25, 0.25] using the training
// range. The map is folded into the standardizer so artifacts carry it along.
void scale_input_range(Dataset& train, Dataset& test) {
    const Index cols = train.X.cols();
    Standardizer st;
    if (train.standardizer) {
        st = *train.standardizer;
    } else {
        st.x_mean = Vector::Zero(cols);
        st.x_std = Vector::Ones(cols);
    }
    for (Index c = 0; c < cols; ++c) {
        const double lo = train.X.col(c).minCoeff();
        const double hi = train.X.col(c).maxCoeff();
        const double span = 2.0 * (hi - lo);
        if (span <= 0) throw InvalidData("constant feature column " + std::to_string(c));
        train.X.col(c) = (train.X.col(c).array() - (lo + hi) / 2.0) / span;
        test.X.col(c) = (test.X.col(c).array() - (lo + hi) / 2.0) / span;
        // Compose the affine maps: x -> (x - mean)/std -> (z - center)/span.
        st.x_mean[c] += st.x_std[c] * (lo + hi) / 2.0;
        st.x_std[c] *= span;
    }
    train.standardizer = st;
    test.standardizer = st;
}

}  // namespace

std::pair<Dataset, Dataset> prepare_data(const ExperimentConfig& cfg, std::uint64_t seed) {
    auto [train, test] = [&] {
        if (cfg.dataset == "synthetic-cubic") return gen_cubic(seed);
        const Dataset ds = load_csv(cfg.dataset, cfg.target_column);
        return split(ds, cfg.train_frac, seed, /*standardize=*/true, cfg.drop_constant);
    }();
    scale_input_range(train, test);
    return {std::move(train), std::move(test)};
}

BayesConfig bayes_config(const ExperimentConfig& cfg, std::uint64_t seed) {
    BayesConfig bc;
    bc.train.epochs = cfg.epochs;
    bc.train.seed = seed;
    bc.train.beta = cfg.fixed_beta > 0 ? cfg.fixed_beta : 1.0;
    bc.train.gamma = cfg.fixed_gamma > 0 ? cfg.fixed_gamma : cfg.init_gamma;
    bc.vi_rounds = cfg.vi_rounds;
    bc.variant = cfg.variant;
    bc.t_hat = cfg.threshold;
    bc.threshold_relative = cfg.threshold_relative;
    if (cfg.fixed_beta > 0) bc.fixed_beta = cfg.fixed_beta;
    if (cfg.fixed_gamma > 0) bc.fixed_gamma = cfg.fixed_gamma;
    return bc;
}

std::vector<PredictiveDist> predict_all(const LaplacePosterior& post, const Matrix& X_test,
                                        PredictiveMode mode, int mc_samples, std::uint64_t seed) {
    std::vector<PredictiveDist> dists;
    dists.reserve(static_cast<std::size_t>(X_test.rows()));
    for (Index i = 0; i < X_test.rows(); ++i) {
        const Vector x = X_test.row(i).transpose();
        if (mode == PredictiveMode::LLA)
            dists.push_back(predict_lla(post, x));
        else
            dists.push_back(predict_la(post, x, mc_samples, seed + static_cast<std::uint64_t>(i)));
    }
    return dists;
}

namespace {

/// Rescales a predictive distribution from the standardized to the raw scale.
PredictiveDist unstandardize(const PredictiveDist& dist, const Standardizer& st) {
    PredictiveDist out = dist;
    const double s2 = st.y_std * st.y_std;
    if (dist.kind == PredictiveDist::Kind::Gaussian) {
        out.mean = st.untransform_y(dist.mean);
        out.variance = dist.variance * s2;
    } else {
        for (double& mu : out.component_means) mu = st.untransform_y(mu);
        out.component_variance = dist.component_variance * s2;
    }
    return out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    auto [train, test] = prepare_data(cfg, seed);
    const FeatureMapSpec spec{cfg.local_dim};
    const LaplacePosterior post = fit_bayes(train.X, train.y, spec, cfg.rank, bayes_config(cfg, seed));

    std::vector<PredictiveDist> dists =
        predict_all(post, test.X, cfg.mode, cfg.mc_samples, seed + 0x5e5aULL);
    Vector targets = test.y;
    if (cfg.raw_scale && test.standardizer) {
        for (auto& d : dists) d = unstandardize(d, *test.standardizer);
        targets = test.standardizer->untransform_y(targets);
    }

    RunResult result;
    result.seed = seed;
    result.report = compute_report(dists, targets, default_rce_levels(), seed);
    return result;
}

Summary run_repeats(const ExperimentConfig& cfg) {
    cfg.validate();
    Summary summary;
    for (int i = 0; i < cfg.repeats; ++i)
        summary.runs.push_back(run_experiment(cfg, cfg.seed + static_cast<std::uint64_t>(i)));

    auto aggregate = [&](auto&& pick, double& mean, double& sd) {
        double acc = 0.0;
        for (const RunResult& r : summary.runs) acc += pick(r.report);
        mean = acc / static_cast<double>(summary.runs.size());
        double var = 0.0;
        for (const RunResult& r : summary.runs) {
            const double d = pick(r.report) - mean;
            var += d * d;
        }
        sd = summary.runs.size() > 1
                 ? std::sqrt(var / static_cast<double>(summary.runs.size() - 1))
                 : 0.0;
    };
    aggregate([](const MetricReport& r) { return r.rmse; }, summary.mean.rmse, summary.stddev.rmse);
    aggregate([](const MetricReport& r) { return r.nll; }, summary.mean.nll, summary.stddev.nll);
    aggregate([](const MetricReport& r) { return r.ecp95; }, summary.mean.ecp95,
              summary.stddev.ecp95);
    aggregate([](const MetricReport& r) { return r.wcpi95; }, summary.mean.wcpi95,
              summary.stddev.wcpi95);
    aggregate([](const MetricReport& r) { return r.rce; }, summary.mean.rce, summary.stddev.rce);
    return summary;
}

namespace {

json report_to_json(const MetricReport& r) {
    json cov = json::array();
    for (const auto& [level, c] : r.coverage_table) cov.push_back({{"level", level}, {"coverage", c}});
    return json{{"rmse", r.rmse},   {"nll", r.nll},           {"ecp95", r.ecp95},
                {"wcpi95", r.wcpi95}, {"rce", r.rce},         {"coverage_table", cov}};
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Vector vector_from_json(const json& j) {
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
    return v;
}

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows()},
                {"cols", m.cols()},
                {"data", vector_to_json(Eigen::Map<const Vector>(m.data(), m.size()))}};
}

Matrix matrix_from_json(const json& j) {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const Vector data = vector_from_json(j.at("data"));
    if (data.size() != rows * cols) throw FormatError("artifact matrix size mismatch");
    return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

}  // namespace

json summary_to_json(const Summary& s, const ExperimentConfig& cfg) {
    json runs = json::array();
    for (const RunResult& r : s.runs)
        runs.push_back({{"seed", r.seed}, {"metrics", report_to_json(r.report)}});
    return json{{"schema", "latnkm-metrics"},
                {"version", 1},
                {"config", config_to_json(cfg)},
                {"runs", runs},
                {"mean", report_to_json(s.mean)},
                {"std", report_to_json(s.stddev)}};
}

std::string summary_to_text(const Summary& s, const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "dataset=" << cfg.dataset << " hessian=" << to_string(cfg.variant)
       << " mode=" << to_string(cfg.mode) << " R=" << cfg.rank << " I=" << cfg.local_dim
       << " t_hat=" << cfg.threshold << (cfg.threshold_relative ? " (relative)" : "") << "\n";
    os << "seed        rmse        nll      ecp95     wcpi95        rce\n";
    auto row = [&os](const std::string& label, const MetricReport& r) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-8s %9.4f  %9.4f  %9.4f  %9.4f  %9.4f\n", label.c_str(),
                      r.rmse, r.nll, r.ecp95, r.wcpi95, r.rce);
        os << buf;
    };
    for (const RunResult& r : s.runs) row(std::to_string(r.seed), r.report);
    row("mean", s.mean);
    row("std", s.stddev);
    return os.str();
}

json artifact_to_json(const LaplacePosterior& post, const ExperimentConfig& cfg,
                      const std::optional<Standardizer>& st) {
    json cores = json::array();
    for (const Matrix& core : post.mean.cores) cores.push_back(matrix_to_json(core));
    json factors = json::array();
    for (const TruncatedEig& f : post.factors)
        factors.push_back({{"offset", f.offset},
                           {"dim", f.dim},
                           {"t_hat", f.t_hat},
                           {"values", vector_to_json(f.values)},
                           {"vectors", matrix_to_json(f.vectors)}});
    json standardizer = nullptr;
    if (st)
        standardizer = json{{"x_mean", vector_to_json(st->x_mean)},
                            {"x_std", vector_to_json(st->x_std)},
                            {"y_mean", st->y_mean},
                            {"y_std", st->y_std}};
    return json{{"schema", "latnkm-artifact"},
                {"version", 1},
                {"config", config_to_json(cfg)},
                {"local_dim", post.mean.spec.local_dim},
                {"cores", cores},
                {"variant", to_string(post.variant)},
                {"beta", post.beta},
                {"gamma", post.gamma},
                {"t_hat", post.t_hat},
                {"q_beta", {{"a", post.q_beta.a}, {"b", post.q_beta.b}}},
                {"q_gamma", {{"a", post.q_gamma.a}, {"b", post.q_gamma.b}}},
                {"factors", factors},
                {"loss_trace", post.loss_trace},
                {"standardizer", standardizer}};
}

LaplacePosterior artifact_from_json(const json& j, ExperimentConfig* cfg_out,
                                    std::optional<Standardizer>* st_out) {
    if (j.value("schema", "") != "latnkm-artifact")
        throw FormatError("not a latnkm artifact file");
    if (j.value("version", -1) != 1)
        throw FormatError("unsupported artifact version " + std::to_string(j.value("version", -1)));

    LaplacePosterior post;
    post.mean.spec.local_dim = j.at("local_dim").get<int>();
    for (const json& c : j.at("cores")) post.mean.cores.push_back(matrix_from_json(c));
    post.variant = hessian_variant_from_string(j.at("variant"));
    post.beta = j.at("beta").get<double>();
    post.gamma = j.at("gamma").get<double>();
    post.t_hat = j.at("t_hat").get<double>();
    post.q_beta = {j.at("q_beta").at("a").get<double>(), j.at("q_beta").at("b").get<double>()};
    post.q_gamma = {j.at("q_gamma").at("a").get<double>(), j.at("q_gamma").at("b").get<double>()};
    for (const json& f : j.at("factors")) {
        TruncatedEig eig;
        eig.offset = f.at("offset").get<Index>();
        eig.dim = f.at("dim").get<Index>();
        eig.t_hat = f.at("t_hat").get<double>();
        eig.values = vector_from_json(f.at("values"));
        eig.vectors = matrix_from_json(f.at("vectors"));
        post.factors.push_back(std::move(eig));
    }
    post.loss_trace = j.at("loss_trace").get<std::vector<double>>();

    if (cfg_out) *cfg_out = config_from_json(j.at("config"));
    if (st_out) {
        *st_out = std::nullopt;
        if (!j.at("standardizer").is_null()) {
            Standardizer st;
            st.x_mean = vector_from_json(j.at("standardizer").at("x_mean"));
            st.x_std = vector_from_json(j.at("standardizer").at("x_std"));
            st.y_mean = j.at("standardizer").at("y_mean").get<double>();
            st.y_std = j.at("standardizer").at("y_std").get<double>();
            *st_out = st;
        }
    }
    return post;
}

void save_artifact(const std::string& path, const LaplacePosterior& post,
                   const ExperimentConfig& cfg, const std::optional<Standardizer>& st) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write artifact: " + path);
    out << artifact_to_json(post, cfg, st).dump(2) << "\n";
}

LaplacePosterior load_artifact(const std::string& path, ExperimentConfig* cfg_out,
                               std::optional<Standardizer>* st_out) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open artifact: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw FormatError(std::string("artifact parse failure: ") + e.what());
    }
    return artifact_from_json(j, cfg_out, st_out);
}

CvResult cross_validate(const ExperimentConfig& cfg, const std::vector<int>& ranks,
                        const std::vector<int>& local_dims, const std::vector<double>& thresholds,
                        int folds) {
    if (ranks.empty() || local_dims.empty() || thresholds.empty())
        throw ConfigError("cross-validation grids must be nonempty");
    if (folds < 2) throw ConfigError("need at least 2 folds");

    auto [train, test] = prepare_data(cfg, cfg.seed);
    (void)test;
    const Index n = train.X.rows();
    if (n < folds) throw InvalidData("fewer training rows than folds");

    // Deterministic fold assignment.
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(perm.begin(), perm.end(), rng);

    CvResult result;
    for (int R : ranks) {
        for (int I : local_dims) {
            for (double t : thresholds) {
                CvCell cell{R, I, t, 0.0, false, ""};
                try {
                    double acc = 0.0;
                    for (int f = 0; f < folds; ++f) {
                        std::vector<Index> val_rows, fit_rows;
                        for (Index i = 0; i < n; ++i) {
                            if (static_cast<int>(i % folds) == f)
                                val_rows.push_back(perm[static_cast<std::size_t>(i)]);
                            else
                                fit_rows.push_back(perm[static_cast<std::size_t>(i)]);
                        }
                        auto take = [&](const std::vector<Index>& rows) {
                            Matrix x(static_cast<Index>(rows.size()), train.X.cols());
                            Vector y(static_cast<Index>(rows.size()));
                            for (std::size_t i = 0; i < rows.size(); ++i) {
                                x.row(static_cast<Index>(i)) = train.X.row(rows[i]);
                                y[static_cast<Index>(i)] = train.y[rows[i]];
                            }
                            return std::make_pair(x, y);
                        };
                        const auto [x_fit, y_fit] = take(fit_rows);
                        const auto [x_val, y_val] = take(val_rows);

                        ExperimentConfig cell_cfg = cfg;
                        cell_cfg.rank = R;
                        cell_cfg.local_dim = I;
                        cell_cfg.threshold = t;
                        const FeatureMapSpec spec{I};
                        const LaplacePosterior post = fit_bayes(
                            x_fit, y_fit, spec, R,
                            bayes_config(cell_cfg, cfg.seed + static_cast<std::uint64_t>(f)));
                        const auto dists = predict_all(post, x_val, cfg.mode, cfg.mc_samples,
                                                       cfg.seed + static_cast<std::uint64_t>(f));
                        acc += nll(dists, y_val);
                    }
                    cell.val_nll = acc / static_cast<double>(folds);
                } catch (const std::exception& e) {
                    cell.failed = true;
                    cell.error = e.what();
                }
                result.table.push_back(cell);
            }
        }
    }

    auto better = [](const CvCell& a, const CvCell& b) {
        if (a.failed != b.failed) return !a.failed;
        if (a.val_nll != b.val_nll) return a.val_nll < b.val_nll;
        if (a.rank != b.rank) return a.rank < b.rank;
        if (a.local_dim != b.local_dim) return a.local_dim < b.local_dim;
        return a.threshold > b.threshold;
    };
    result.best = *std::min_element(result.table.begin(), result.table.end(), better);
    if (result.best.failed) throw NumericalError("every cross-validation cell failed");
    return result;
}

std::vector<SweepRow> sweep_hessian(const ExperimentConfig& cfg,
                                    const std::vector<double>& thresholds) {
    auto [train, test] = prepare_data(cfg, cfg.seed);
    const FeatureMapSpec spec{cfg.local_dim};
    const FeatureSet fs = build_features(train.X, spec);

    // Fit once; the MAP estimate and hyperparameters are shared across variants.
    ExperimentConfig base_cfg = cfg;
    base_cfg.variant = HessianVariant::Diag;
    base_cfg.threshold = 0.0;
    base_cfg.threshold_relative = false;
    const LaplacePosterior base = fit_bayes(train.X, train.y, spec, cfg.rank,
                                            bayes_config(base_cfg, cfg.seed));

    const BayesConfig bc = bayes_config(cfg, cfg.seed);
    const std::vector<HessianVariant> variants = {HessianVariant::Full, HessianVariant::GGN,
                                                  HessianVariant::Block, HessianVariant::Diag,
                                                  HessianVariant::LastCore};
    std::vector<SweepRow> rows;
    for (HessianVariant variant : variants) {
        if ((variant == HessianVariant::Full || variant == HessianVariant::GGN) &&
            base.mean.parameter_count() > bc.dense_cap) {
            for (double t : thresholds)
                rows.push_back({variant, t, {}, true, "skipped: DIR exceeds dense cap"});
            continue;
        }
        HessianMatrix h;
        switch (variant) {
            case HessianVariant::Full:
                h = full_hessian(base.mean, fs, train.y, base.beta, base.gamma, bc.dense_cap);
                break;
            case HessianVariant::GGN:
                h = ggn_hessian(base.mean, fs, train.y, base.beta, base.gamma, bc.dense_cap);
                break;
            default:
                h = structured_hessian(base.mean, fs, train.y, base.beta, base.gamma, variant,
                                       bc.dense_cap);
                break;
        }
        const double lambda_max = max_eigenvalue(h);
        for (double t : thresholds) {
            const double t_abs = cfg.threshold_relative ? t * lambda_max : t;
            LaplacePosterior post = base;
            post.variant = variant;
            post.t_hat = t_abs;
            post.factors = truncated_eig(h, t_abs);

            SweepRow row;
            row.variant = variant;
            row.threshold = t;
            const auto dists =
                predict_all(post, test.X, cfg.mode, cfg.mc_samples, cfg.seed + 0x5e5aULL);
            row.report = compute_report(dists, test.y, default_rce_levels(), cfg.seed);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace latnkm
