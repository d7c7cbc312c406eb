#pragma once

#include <random>

#include "latnkm/cpd.hpp"
#include "latnkm/map_trainer.hpp"

namespace test_helpers {

inline latnkm::Matrix random_inputs(int n, int d, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> unif(-scale, scale);
    latnkm::Matrix x(n, d);
    for (latnkm::Index i = 0; i < x.size(); ++i) x.data()[i] = unif(rng);
    return x;
}

inline latnkm::CpdModel random_model(int d, int local_dim, int rank, std::mt19937_64& rng,
                                     double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    latnkm::CpdModel model;
    model.spec.local_dim = local_dim;
    model.cores.resize(d);
    for (auto& core : model.cores) {
        core.resize(local_dim, rank);
        for (latnkm::Index i = 0; i < core.size(); ++i) core.data()[i] = gauss(rng);
    }
    return model;
}

/// Loss as a function of the stacked parameter vector, for the FD oracles.
inline auto loss_closure(const latnkm::CpdModel& model, const latnkm::FeatureSet& fs,
                         const latnkm::Vector& y, double beta, double gamma) {
    return [m = model, &fs, &y, beta, gamma](const latnkm::Vector& v) mutable {
        m.set_parameters(v);
        return latnkm::loss(m, fs, y, beta, gamma);
    };
}

}  // namespace test_helpers
