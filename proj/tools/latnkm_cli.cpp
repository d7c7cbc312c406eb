// Experiment runner for the LA-TNKM library: fit, eval, cv, sweep-hessian, synth.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "latnkm/experiment.hpp"

namespace {

using latnkm::ExperimentConfig;
using json = nlohmann::json;

struct Overrides {
    std::string config_path;
    std::string dataset, target, hessian, mode, out = "latnkm_out";
    int rank = 0, local_dim = 0, samples = 0, epochs = 0, vi_rounds = -1, repeats = 0;
    double threshold = std::nan(""), beta = std::nan(""), gamma = std::nan("");
    double train_frac = std::nan("");
    std::uint64_t seed = 0;
    bool threshold_relative = false, raw_scale = false, drop_constant = false;
    std::vector<int> rank_grid, local_dim_grid;
    std::vector<double> threshold_grid;
    int folds = 5;
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config_path, "JSON config file; flags override its values");
    sub->add_option("--dataset", o.dataset, "CSV path or 'synthetic-cubic'");
    sub->add_option("--target", o.target, "target column name (default: last column)");
    sub->add_option("--rank", o.rank, "CPD rank R");
    sub->add_option("--local-dim", o.local_dim, "basis functions per dimension I");
    sub->add_option("--hessian", o.hessian, "full|ggn|block|diag|last");
    sub->add_option("--threshold", o.threshold, "eigenvalue truncation threshold t_hat");
    sub->add_flag("--threshold-relative", o.threshold_relative,
                  "interpret threshold as a multiple of the largest eigenvalue");
    sub->add_option("--mode", o.mode, "predictive mode: la|lla");
    sub->add_option("--samples", o.samples, "Monte-Carlo samples S for LA");
    sub->add_option("--epochs", o.epochs, "ALS epochs E");
    sub->add_option("--vi-rounds", o.vi_rounds, "variational rounds T (0: fixed hyperparameters)");
    sub->add_option("--beta", o.beta, "fixed noise precision (skips its VI update)");
    sub->add_option("--gamma", o.gamma, "fixed weight precision (skips its VI update)");
    sub->add_option("--train-frac", o.train_frac, "training fraction of the split");
    sub->add_option("--repeats", o.repeats, "number of repeated runs (seeds seed+i)");
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("--out", o.out, "output path prefix");
    sub->add_flag("--raw-scale", o.raw_scale, "report metrics on the raw target scale");
    sub->add_flag("--drop-constant", o.drop_constant, "drop constant feature columns");
}

ExperimentConfig resolve(const CLI::App* sub, const Overrides& o) {
    ExperimentConfig cfg;
    if (!o.config_path.empty()) cfg = latnkm::load_config(o.config_path);
    if (sub->count("--dataset")) cfg.dataset = o.dataset;
    if (sub->count("--target")) cfg.target_column = o.target;
    if (sub->count("--rank")) cfg.rank = o.rank;
    if (sub->count("--local-dim")) cfg.local_dim = o.local_dim;
    if (sub->count("--hessian")) cfg.variant = latnkm::hessian_variant_from_string(o.hessian);
    if (sub->count("--threshold")) cfg.threshold = o.threshold;
    if (sub->count("--threshold-relative")) cfg.threshold_relative = true;
    if (sub->count("--mode")) cfg.mode = latnkm::predictive_mode_from_string(o.mode);
    if (sub->count("--samples")) cfg.mc_samples = o.samples;
    if (sub->count("--epochs")) cfg.epochs = o.epochs;
    if (sub->count("--vi-rounds")) cfg.vi_rounds = o.vi_rounds;
    if (sub->count("--beta")) cfg.fixed_beta = o.beta;
    if (sub->count("--gamma")) cfg.fixed_gamma = o.gamma;
    if (sub->count("--train-frac")) cfg.train_frac = o.train_frac;
    if (sub->count("--repeats")) cfg.repeats = o.repeats;
    if (sub->count("--seed")) cfg.seed = o.seed;
    if (sub->count("--raw-scale")) cfg.raw_scale = true;
    if (sub->count("--drop-constant")) cfg.drop_constant = true;
    cfg.validate();
    return cfg;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw latnkm::FormatError("cannot write output file: " + path);
    out << text;
}

int cmd_fit(const CLI::App* sub, const Overrides& o) {
    const ExperimentConfig cfg = resolve(sub, o);
    auto [train, test] = latnkm::prepare_data(cfg, cfg.seed);
    (void)test;
    const latnkm::FeatureMapSpec spec{cfg.local_dim};
    const auto post = latnkm::fit_bayes(train.X, train.y, spec, cfg.rank,
                                        latnkm::bayes_config(cfg, cfg.seed));
    latnkm::save_artifact(o.out, post, cfg, train.standardizer);
    std::cout << "wrote artifact: " << o.out << " (retained eigenpairs: " << post.retained()
              << ", E[beta]=" << post.beta << ", E[gamma]=" << post.gamma << ")\n";
    return 0;
}

int cmd_eval(const CLI::App* sub, const Overrides& o) {
    const ExperimentConfig cfg = resolve(sub, o);
    const latnkm::Summary summary = latnkm::run_repeats(cfg);
    const std::string text = latnkm::summary_to_text(summary, cfg);
    std::cout << text;
    write_file(o.out + ".txt", text);
    write_file(o.out + ".json", latnkm::summary_to_json(summary, cfg).dump(2) + "\n");
    return 0;
}

int cmd_cv(const CLI::App* sub, const Overrides& o) {
    ExperimentConfig cfg = resolve(sub, o);
    std::vector<int> ranks = o.rank_grid.empty() ? std::vector<int>{cfg.rank} : o.rank_grid;
    std::vector<int> dims =
        o.local_dim_grid.empty() ? std::vector<int>{cfg.local_dim} : o.local_dim_grid;
    std::vector<double> thresholds =
        o.threshold_grid.empty() ? std::vector<double>{cfg.threshold} : o.threshold_grid;

    const latnkm::CvResult result = latnkm::cross_validate(cfg, ranks, dims, thresholds, o.folds);

    std::ostringstream table;
    table << "# k=" << o.folds << "-fold CV on the training split, selected by validation NLL\n";
    table << "rank  local_dim  threshold      val_nll  status\n";
    json cells = json::array();
    for (const auto& c : result.table) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%4d  %9d  %9.3g  %11.4f  %s\n", c.rank, c.local_dim,
                      c.threshold, c.val_nll, c.failed ? c.error.c_str() : "ok");
        table << buf;
        cells.push_back({{"rank", c.rank},
                         {"local_dim", c.local_dim},
                         {"threshold", c.threshold},
                         {"val_nll", c.val_nll},
                         {"failed", c.failed},
                         {"error", c.error}});
    }
    table << "best: rank=" << result.best.rank << " local_dim=" << result.best.local_dim
          << " threshold=" << result.best.threshold << " val_nll=" << result.best.val_nll << "\n";
    std::cout << table.str();
    write_file(o.out + ".txt", table.str());

    cfg.rank = result.best.rank;
    cfg.local_dim = result.best.local_dim;
    cfg.threshold = result.best.threshold;
    write_file(o.out + ".json", json{{"schema", "latnkm-cv"},
                                     {"version", 1},
                                     {"folds", o.folds},
                                     {"cells", cells},
                                     {"best", latnkm::config_to_json(cfg)}}
                                    .dump(2) +
                                    "\n");
    return 0;
}

int cmd_sweep(const CLI::App* sub, const Overrides& o) {
    const ExperimentConfig cfg = resolve(sub, o);
    const std::vector<double> thresholds =
        o.threshold_grid.empty() ? std::vector<double>{cfg.threshold} : o.threshold_grid;
    const auto rows = latnkm::sweep_hessian(cfg, thresholds);

    std::ostringstream table;
    table << "variant  threshold       rmse        nll        rce  note\n";
    json jrows = json::array();
    for (const auto& r : rows) {
        char buf[200];
        if (r.skipped)
            std::snprintf(buf, sizeof(buf), "%-7s  %9.3g  %9s  %9s  %9s  %s\n",
                          latnkm::to_string(r.variant).c_str(), r.threshold, "-", "-", "-",
                          r.note.c_str());
        else
            std::snprintf(buf, sizeof(buf), "%-7s  %9.3g  %9.4f  %9.4f  %9.4f\n",
                          latnkm::to_string(r.variant).c_str(), r.threshold, r.report.rmse,
                          r.report.nll, r.report.rce);
        table << buf;
        jrows.push_back({{"variant", latnkm::to_string(r.variant)},
                         {"threshold", r.threshold},
                         {"rmse", r.report.rmse},
                         {"nll", r.report.nll},
                         {"rce", r.report.rce},
                         {"skipped", r.skipped},
                         {"note", r.note}});
    }
    std::cout << table.str();
    write_file(o.out + ".txt", table.str());
    write_file(o.out + ".json",
               json{{"schema", "latnkm-sweep"}, {"version", 1}, {"rows", jrows}}.dump(2) + "\n");
    return 0;
}

int cmd_synth(const CLI::App* sub, const Overrides& o) {
    std::uint64_t seed = sub->count("--seed") ? o.seed : 0;
    auto [train, test] = latnkm::gen_cubic(seed);
    auto dump = [](const latnkm::Dataset& ds, const std::string& path) {
        std::ostringstream os;
        os << "x,y\n";
        os.precision(17);
        for (latnkm::Index i = 0; i < ds.X.rows(); ++i)
            os << ds.X(i, 0) << "," << ds.y[i] << "\n";
        write_file(path, os.str());
    };
    dump(train, o.out + "_train.csv");
    dump(test, o.out + "_test.csv");
    std::cout << "wrote " << o.out << "_train.csv (N=20) and " << o.out << "_test.csv (N=100)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian tensor network kernel machine (Laplace approximation) runner"};
    app.require_subcommand(1);

    Overrides o;
    CLI::App* fit = app.add_subcommand("fit", "train a posterior and write a model artifact");
    CLI::App* eval = app.add_subcommand("eval", "run repeated fit/evaluate cycles and report metrics");
    CLI::App* cv = app.add_subcommand("cv", "grid cross-validation over rank, local_dim, threshold");
    CLI::App* sweep = app.add_subcommand("sweep-hessian", "compare all Hessian variants");
    CLI::App* synth = app.add_subcommand("synth", "write the synthetic cubic dataset as CSV");
    for (CLI::App* sub : {fit, eval, cv, sweep, synth}) add_common(sub, o);
    for (CLI::App* sub : {cv, sweep}) {
        sub->add_option("--threshold-grid", o.threshold_grid, "comma-separated threshold grid")
            ->delimiter(',');
    }
    cv->add_option("--rank-grid", o.rank_grid, "comma-separated rank grid")->delimiter(',');
    cv->add_option("--local-dim-grid", o.local_dim_grid, "comma-separated local_dim grid")
        ->delimiter(',');
    cv->add_option("--folds", o.folds, "number of CV folds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit, o);
        if (eval->parsed()) return cmd_eval(eval, o);
        if (cv->parsed()) return cmd_cv(cv, o);
        if (sweep->parsed()) return cmd_sweep(sweep, o);
        if (synth->parsed()) return cmd_synth(synth, o);
    } catch (const latnkm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const latnkm::FormatError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const latnkm::InvalidData& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const latnkm::Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
