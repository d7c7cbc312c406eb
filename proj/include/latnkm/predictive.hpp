#pragma once

#include <utility>

#include "latnkm/inference.hpp"

namespace latnkm {

/// Predictive distribution for one test point: a Gaussian (LLA) or an
/// equal-weight Gaussian mixture of S components (LA).
struct PredictiveDist {
    enum class Kind { Gaussian, Mixture };

    Kind kind = Kind::Gaussian;
    double mean = 0.0;      // Gaussian mean
    double variance = 0.0;  // Gaussian variance (includes observation noise)
    std::vector<double> component_means;
    double component_variance = 0.0;  // per-component observation noise 1/E[beta]
};

/// Gradient of f with respect to the covered parameters at the model's
/// current cores: block d = z^(d)(x) kron-ordered with phi^(d)(x), i.e. the
/// single-row design matrix. LastCore returns only block D.
Vector grad_f(const CpdModel& model, const Vector& x, HessianVariant variant);

/// Closed-form linearized predictive: mean f(x, v*), variance
/// sum_j lambda_j^{-1} (u_j' g)^2 + 1/E[beta], accumulated per factor.
PredictiveDist predict_lla(const LaplacePosterior& post, const Vector& x);

/// Monte-Carlo predictive: mixture of Gaussians at f(x, v_s) with variance
/// 1/E[beta], over S posterior samples.
PredictiveDist predict_la(const LaplacePosterior& post, const Vector& x, int S,
                          std::uint64_t seed);

/// Log predictive density at y; mixtures use a log-mean-exp over components.
double log_density(const PredictiveDist& dist, double y);

/// Predictive mean (mixture: average of component means).
double predictive_mean(const PredictiveDist& dist);

/// Central credible interval. Gaussian intervals are analytic; mixture
/// intervals use seeded component resampling and empirical percentiles.
std::pair<double, double> interval(const PredictiveDist& dist, double level,
                                   std::uint64_t seed = 0, int draws = 2000);

/// Standard normal quantile, exposed for the metric suite.
double normal_quantile(double p);

}  // namespace latnkm
