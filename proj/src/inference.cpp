#include "latnkm/inference.hpp"

#include <cmath>
#include <random>

namespace latnkm {

GammaPosterior update_beta(GammaPosterior q, Index n_samples, double expected_sq_residual) {
    if (expected_sq_residual < 0) throw InvalidData("negative expected squared residual");
    q.a += 0.5 * static_cast<double>(n_samples);
    q.b += 0.5 * expected_sq_residual;
    return q;
}

GammaPosterior update_gamma(GammaPosterior q, int D, int I, int R, double expected_sq_norm) {
    if (expected_sq_norm < 0) throw InvalidData("negative expected squared norm");
    q.a += 0.5 * static_cast<double>(D) * I * R;
    q.b += 0.5 * expected_sq_norm;
    return q;
}

Index LaplacePosterior::retained() const {
    Index total = 0;
    for (const TruncatedEig& f : factors) total += f.retained();
    return total;
}

LaplacePosterior fit_bayes(const Matrix& X, const Vector& y, const FeatureMapSpec& spec, int rank,
                           const BayesConfig& cfg) {
    if (cfg.vi_rounds < 0) throw ConfigError("vi_rounds must be >= 0");
    const FeatureSet fs = build_features(X, spec);

    LaplacePosterior post;
    post.variant = cfg.variant;
    post.q_beta = {cfg.hyperprior_a, cfg.hyperprior_b};
    post.q_gamma = {cfg.hyperprior_a, cfg.hyperprior_b};

    double beta = cfg.fixed_beta.value_or(cfg.train.beta);
    double gamma = cfg.fixed_gamma.value_or(cfg.train.gamma);

    MapEstimate est;
    const int rounds = std::max(cfg.vi_rounds, 1);
    for (int t = 0; t < rounds; ++t) {
        TrainConfig train = cfg.train;
        train.beta = beta;
        train.gamma = gamma;
        est = fit_map(fs, y, train, spec, rank);
        post.loss_trace.insert(post.loss_trace.end(), est.loss_trace.begin(),
                               est.loss_trace.end());
        if (t >= cfg.vi_rounds) break;  // T = 0: single fixed-hyperparameter fit

        // Plug-in expectations at the current MAP.
        const double sq_residual = (y - model_response(est.model, fs)).squaredNorm();
        const double sq_norm = est.model.parameters().squaredNorm();
        post.q_beta = update_beta(post.q_beta, y.size(), sq_residual);
        post.q_gamma = update_gamma(post.q_gamma, est.model.dims(), est.model.local_dim(),
                                    est.model.rank(), sq_norm);
        if (!cfg.fixed_beta) beta = post.q_beta.mean();
        if (!cfg.fixed_gamma) gamma = post.q_gamma.mean();
    }

    post.mean = est.model;
    post.beta = beta;
    post.gamma = gamma;

    HessianMatrix h;
    switch (cfg.variant) {
        case HessianVariant::Full:
            h = full_hessian(post.mean, fs, y, beta, gamma, cfg.dense_cap);
            break;
        case HessianVariant::GGN:
            h = ggn_hessian(post.mean, fs, y, beta, gamma, cfg.dense_cap);
            break;
        default:
            h = structured_hessian(post.mean, fs, y, beta, gamma, cfg.variant, cfg.dense_cap);
            break;
    }
    post.t_hat = cfg.threshold_relative ? cfg.t_hat * max_eigenvalue(h) : cfg.t_hat;
    if (cfg.variant == HessianVariant::Full && post.t_hat <= 0)
        throw ConfigError("Full Hessian may be indefinite; requires t_hat > 0");
    post.factors = truncated_eig(h, post.t_hat);
    return post;
}

std::vector<Vector> sample_posterior(const LaplacePosterior& post, int S, std::uint64_t seed) {
    if (S < 1) throw ConfigError("sample count must be >= 1");
    const Vector mean = post.mean.parameters();
    std::vector<Vector> samples(S, mean);
    for (int s = 0; s < S; ++s) {
        std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(s)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (const TruncatedEig& f : post.factors) {
            for (Index j = 0; j < f.retained(); ++j) {
                const double eps = gauss(rng);
                samples[s].segment(f.offset, f.dim) +=
                    (eps / std::sqrt(f.values[j])) * f.vectors.col(j);
            }
        }
    }
    return samples;
}

}  // namespace latnkm
