#include "latnkm/map_trainer.hpp"

#include <cmath>
#include <random>

namespace latnkm {

double loss(const CpdModel& model, const FeatureSet& fs, const Vector& y, double beta,
            double gamma) {
    if (y.size() != fs.samples()) throw ShapeError("target length does not match sample count");
    const Vector f = model_response(model, fs);
    return 0.5 * beta * (y - f).squaredNorm() + 0.5 * gamma * model.parameters().squaredNorm();
}

void als_core_update(CpdModel& model, const FeatureSet& fs, const Vector& y, int d, double beta,
                     double gamma) {
    if (beta <= 0) throw ConfigError("beta must be positive");
    const Matrix a = design_matrix(model, fs, d);
    Matrix gram = a.transpose() * a;
    gram.diagonal().array() += gamma / beta;

    Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw SolverError("ALS core system not positive definite; gamma too small for data scale");
    const Vector v = ldlt.solve(a.transpose() * y);
    if (!v.allFinite())
        throw SolverError("ALS core solve produced non-finite values");

    model.cores[d] =
        Eigen::Map<const Matrix>(v.data(), model.local_dim(), model.rank());
}

MapEstimate fit_map(const FeatureSet& fs, const Vector& y, const TrainConfig& cfg,
                    const FeatureMapSpec& spec, int rank) {
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (rank < 1) throw ConfigError("rank must be >= 1");
    if (fs.samples() < 1) throw InvalidData("empty training set");

    const int D = fs.dims();
    const int I = spec.local_dim;
    const double scale = cfg.init_scale > 0 ? cfg.init_scale : 1.0 / std::sqrt(double(rank));

    MapEstimate est;
    est.model.spec = spec;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, scale);
    est.model.cores.resize(D);
    for (int d = 0; d < D; ++d) {
        Matrix core(I, rank);
        for (Index c = 0; c < core.cols(); ++c)
            for (Index r = 0; r < core.rows(); ++r) core(r, c) = gauss(rng);
        est.model.cores[d] = std::move(core);
    }

    double prev_sweep_loss = loss(est.model, fs, y, cfg.beta, cfg.gamma);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (int d = 0; d < D; ++d) {
            als_core_update(est.model, fs, y, d, cfg.beta, cfg.gamma);
            est.loss_trace.push_back(loss(est.model, fs, y, cfg.beta, cfg.gamma));
        }
        const double sweep_loss = est.loss_trace.back();
        if (std::abs(prev_sweep_loss - sweep_loss) < cfg.rel_tol * (1.0 + std::abs(sweep_loss)))
            break;
        prev_sweep_loss = sweep_loss;
    }
    est.final_loss = est.loss_trace.back();
    return est;
}

MapEstimate fit_map(const Matrix& X, const Vector& y, const TrainConfig& cfg,
                    const FeatureMapSpec& spec, int rank) {
    return fit_map(build_features(X, spec), y, cfg, spec, rank);
}

}  // namespace latnkm
