#pragma once

#include <optional>

#include "latnkm/hessian.hpp"
#include "latnkm/map_trainer.hpp"

namespace latnkm {

/// Gamma(a, b) in shape/rate parameterization; mean a/b.
struct GammaPosterior {
    double a = 1e-6;
    double b = 1e-6;

    double mean() const { return a / b; }
};

/// Variational update for the noise precision: a += N/2, b += E||y - f||^2 / 2.
GammaPosterior update_beta(GammaPosterior q, Index n_samples, double expected_sq_residual);

/// Variational update for the weight precision: a += DIR/2, b += E[v'v] / 2.
GammaPosterior update_gamma(GammaPosterior q, int D, int I, int R, double expected_sq_norm);

struct BayesConfig {
    TrainConfig train;  // train.beta / train.gamma are starting plug-in values
    int vi_rounds = 5;  // T; 0 keeps the hyperparameters fixed
    HessianVariant variant = HessianVariant::LastCore;
    double t_hat = 0.0;
    bool threshold_relative = false;  // t_hat multiplies the largest eigenvalue
    std::optional<double> fixed_beta;
    std::optional<double> fixed_gamma;
    double hyperprior_a = 1e-6;
    double hyperprior_b = 1e-6;
    Index dense_cap = 5000;
};

struct LaplacePosterior {
    CpdModel mean;                      // cores at v*
    std::vector<TruncatedEig> factors;  // one per covered block
    HessianVariant variant = HessianVariant::LastCore;
    GammaPosterior q_beta, q_gamma;
    double beta = 1.0;   // plug-in E[beta] used for the Hessian and predictive
    double gamma = 0.0;  // plug-in E[gamma]
    double t_hat = 0.0;  // absolute threshold actually applied
    std::vector<double> loss_trace;

    Index retained() const;
};

/// Alternates ALS MAP fits with variational Gamma updates, then assembles the
/// Laplace posterior: Hessian of the chosen variant at v*, truncated at t_hat.
LaplacePosterior fit_bayes(const Matrix& X, const Vector& y, const FeatureMapSpec& spec, int rank,
                           const BayesConfig& cfg);

/// Draws S parameter vectors v_s = v* + sum_j lambda_j^{-1/2} eps_sj u_j.
/// Coordinates outside the variant's coverage stay fixed at v*. Sample s
/// derives its RNG stream from (seed, s) only.
std::vector<Vector> sample_posterior(const LaplacePosterior& post, int S, std::uint64_t seed);

}  // namespace latnkm
