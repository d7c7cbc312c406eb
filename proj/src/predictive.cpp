#include "latnkm/predictive.hpp"

#include <boost/math/distributions/normal.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace latnkm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double gaussian_log_pdf(double y, double mean, double variance) {
    if (variance <= 0) throw NumericalError("nonpositive predictive variance");
    const double d = y - mean;
    return -0.5 * (kLog2Pi + std::log(variance) + d * d / variance);
}

/// Single-point response f(x, v) for the model's current cores.
double point_response(const CpdModel& model, const Vector& x) {
    double f = 0.0;
    Vector prod = Vector::Ones(model.rank());
    for (int d = 0; d < model.dims(); ++d) {
        const Vector phi = feature_row(x[d], model.spec);
        prod.array() *= (model.cores[d].transpose() * phi).array();
    }
    f = prod.sum();
    return f;
}

}  // namespace

Vector grad_f(const CpdModel& model, const Vector& x, HessianVariant variant) {
    if (x.size() != model.dims()) throw ShapeError("test point dimension mismatch");
    const int D = model.dims();
    const int I = model.local_dim();
    const int R = model.rank();

    std::vector<Vector> phi(D), w(D);
    for (int d = 0; d < D; ++d) {
        phi[d] = feature_row(x[d], model.spec);
        w[d] = model.cores[d].transpose() * phi[d];  // length R
    }

    const int first = (variant == HessianVariant::LastCore) ? D - 1 : 0;
    Vector g(static_cast<Index>(D - first) * I * R);
    for (int d = first; d < D; ++d) {
        Vector z = Vector::Ones(R);
        for (int k = 0; k < D; ++k)
            if (k != d) z.array() *= w[k].array();
        for (int r = 0; r < R; ++r)
            g.segment(static_cast<Index>(d - first) * I * R + static_cast<Index>(I) * r, I) =
                z[r] * phi[d];
    }
    return g;
}

PredictiveDist predict_lla(const LaplacePosterior& post, const Vector& x) {
    PredictiveDist dist;
    dist.kind = PredictiveDist::Kind::Gaussian;
    dist.mean = point_response(post.mean, x);

    const Vector g = grad_f(post.mean, x, HessianVariant::GGN);  // full DIR gradient
    double var = 1.0 / post.beta;
    for (const TruncatedEig& f : post.factors) {
        const auto g_block = g.segment(f.offset, f.dim);
        for (Index j = 0; j < f.retained(); ++j) {
            const double proj = f.vectors.col(j).dot(g_block);
            var += proj * proj / f.values[j];
        }
    }
    dist.variance = var;
    return dist;
}

PredictiveDist predict_la(const LaplacePosterior& post, const Vector& x, int S,
                          std::uint64_t seed) {
    PredictiveDist dist;
    dist.kind = PredictiveDist::Kind::Mixture;
    dist.component_variance = 1.0 / post.beta;

    const std::vector<Vector> samples = sample_posterior(post, S, seed);
    dist.component_means.reserve(samples.size());
    CpdModel m = post.mean;
    for (const Vector& v : samples) {
        m.set_parameters(v);
        dist.component_means.push_back(point_response(m, x));
    }
    return dist;
}

double log_density(const PredictiveDist& dist, double y) {
    if (dist.kind == PredictiveDist::Kind::Gaussian)
        return gaussian_log_pdf(y, dist.mean, dist.variance);

    // log-mean-exp over equally weighted components
    double max_lp = -std::numeric_limits<double>::infinity();
    std::vector<double> lps;
    lps.reserve(dist.component_means.size());
    for (double mu : dist.component_means) {
        lps.push_back(gaussian_log_pdf(y, mu, dist.component_variance));
        max_lp = std::max(max_lp, lps.back());
    }
    double acc = 0.0;
    for (double lp : lps) acc += std::exp(lp - max_lp);
    return max_lp + std::log(acc / static_cast<double>(lps.size()));
}

double predictive_mean(const PredictiveDist& dist) {
    if (dist.kind == PredictiveDist::Kind::Gaussian) return dist.mean;
    double acc = 0.0;
    for (double mu : dist.component_means) acc += mu;
    return acc / static_cast<double>(dist.component_means.size());
}

double normal_quantile(double p) {
    static const boost::math::normal_distribution<double> unit(0.0, 1.0);
    return boost::math::quantile(unit, p);
}

std::pair<double, double> interval(const PredictiveDist& dist, double level, std::uint64_t seed,
                                   int draws) {
    if (!(level > 0 && level < 1)) throw ConfigError("interval level must lie in (0, 1)");

    if (dist.kind == PredictiveDist::Kind::Gaussian) {
        const double z = normal_quantile(0.5 * (1.0 + level));
        const double sigma = std::sqrt(dist.variance);
        return {dist.mean - z * sigma, dist.mean + z * sigma};
    }

    // Empirical percentiles of component-resampled draws.
    std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(0x1f2e3d4cULL)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, dist.component_means.size() - 1);
    std::normal_distribution<double> gauss(0.0, std::sqrt(dist.component_variance));

    std::vector<double> sample(static_cast<std::size_t>(draws));
    for (double& s : sample) s = dist.component_means[pick(rng)] + gauss(rng);
    std::sort(sample.begin(), sample.end());

    auto percentile = [&](double q) {
        const double idx = q * static_cast<double>(sample.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(idx);
        const std::size_t hi = std::min(lo + 1, sample.size() - 1);
        const double frac = idx - static_cast<double>(lo);
        return sample[lo] * (1.0 - frac) + sample[hi] * frac;
    };
    return {percentile(0.5 * (1.0 - level)), percentile(0.5 * (1.0 + level))};
}

}  // namespace latnkm
