#pragma once

#include <cstdint>
#include <vector>

#include "latnkm/cpd.hpp"

namespace latnkm {

struct TrainConfig {
    int epochs = 25;          // ALS sweeps E
    double beta = 1.0;        // noise precision
    double gamma = 1e-6;      // weight precision
    std::uint64_t seed = 0;
    double init_scale = -1.0;  // < 0 means the default 1/sqrt(R)
    double rel_tol = 1e-8;     // early stop on relative loss change per sweep
};

struct MapEstimate {
    CpdModel model;
    double final_loss = 0.0;
    std::vector<double> loss_trace;  // one entry per core update
};

/// Regularized loss J(v) = (beta/2) ||y - f||^2 + (gamma/2) ||v||^2.
double loss(const CpdModel& model, const FeatureSet& fs, const Vector& y, double beta,
            double gamma);

/// Exact ridge solve for core d with the others fixed:
/// vec(V^(d)) = (A'A + (gamma/beta) I)^{-1} A' y.
void als_core_update(CpdModel& model, const FeatureSet& fs, const Vector& y, int d, double beta,
                     double gamma);

/// Seeded Gaussian initialization followed by E sweeps of d = 1..D updates.
MapEstimate fit_map(const FeatureSet& fs, const Vector& y, const TrainConfig& cfg,
                    const FeatureMapSpec& spec, int rank);

MapEstimate fit_map(const Matrix& X, const Vector& y, const TrainConfig& cfg,
                    const FeatureMapSpec& spec, int rank);

}  // namespace latnkm
