#include "latnkm/metrics.hpp"

#include <cmath>

namespace latnkm {

std::vector<double> default_rce_levels() {
    std::vector<double> levels;
    for (int k = 0; k < 10; ++k) levels.push_back(0.50 + 0.05 * k);
    return levels;
}

double rmse(const Vector& y, const Vector& yhat) {
    if (y.size() != yhat.size()) throw ShapeError("rmse: length mismatch");
    if (y.size() == 0) throw InvalidData("rmse: empty input");
    return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

double nll(const std::vector<PredictiveDist>& dists, const Vector& y) {
    if (static_cast<Index>(dists.size()) != y.size())
        throw ShapeError("nll: one distribution per target required");
    double acc = 0.0;
    for (Index i = 0; i < y.size(); ++i) acc -= log_density(dists[i], y[i]);
    return acc / static_cast<double>(y.size());
}

double coverage(const std::vector<PredictiveDist>& dists, const Vector& y, double level,
                std::uint64_t interval_seed) {
    if (static_cast<Index>(dists.size()) != y.size()) throw ShapeError("coverage: length mismatch");
    Index hit = 0;
    for (Index i = 0; i < y.size(); ++i) {
        const auto [lo, hi] = interval(dists[i], level, interval_seed + static_cast<std::uint64_t>(i));
        if (y[i] >= lo && y[i] <= hi) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(y.size());
}

double wcpi(const std::vector<PredictiveDist>& dists, double level, std::uint64_t interval_seed) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dists.size(); ++i) {
        const auto [lo, hi] = interval(dists[i], level, interval_seed + static_cast<std::uint64_t>(i));
        acc += hi - lo;
    }
    return acc / static_cast<double>(dists.size());
}

double rce(const std::vector<PredictiveDist>& dists, const Vector& y,
           const std::vector<double>& levels, std::uint64_t interval_seed) {
    if (levels.empty()) throw ConfigError("rce: empty level grid");
    double acc = 0.0;
    for (double level : levels) acc += std::abs(coverage(dists, y, level, interval_seed) - level);
    return acc / static_cast<double>(levels.size());
}

MetricReport compute_report(const std::vector<PredictiveDist>& dists, const Vector& y,
                            const std::vector<double>& rce_levels, std::uint64_t interval_seed) {
    MetricReport report;
    Vector yhat(y.size());
    for (Index i = 0; i < y.size(); ++i) yhat[i] = predictive_mean(dists[i]);
    report.rmse = rmse(y, yhat);
    report.nll = nll(dists, y);
    report.ecp95 = coverage(dists, y, 0.95, interval_seed);
    report.wcpi95 = wcpi(dists, 0.95, interval_seed);
    double acc = 0.0;
    for (double level : rce_levels) {
        const double c = coverage(dists, y, level, interval_seed);
        report.coverage_table.emplace_back(level, c);
        acc += std::abs(c - level);
    }
    report.rce = acc / static_cast<double>(rce_levels.size());
    return report;
}

}  // namespace latnkm
