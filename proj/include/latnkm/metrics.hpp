#pragma once

#include <vector>

#include "latnkm/predictive.hpp"

namespace latnkm {

/// Nominal coverage levels used by the calibration error, 0.50 ... 0.95.
std::vector<double> default_rce_levels();

struct MetricReport {
    double rmse = 0.0;
    double nll = 0.0;
    double ecp95 = 0.0;
    double wcpi95 = 0.0;
    double rce = 0.0;
    std::vector<std::pair<double, double>> coverage_table;  // (level, empirical coverage)
};

double rmse(const Vector& y, const Vector& yhat);

/// Mean negative log predictive density.
double nll(const std::vector<PredictiveDist>& dists, const Vector& y);

/// Fraction of targets inside the central `level` credible intervals.
double coverage(const std::vector<PredictiveDist>& dists, const Vector& y, double level,
                std::uint64_t interval_seed = 0);

/// Mean width of the central `level` credible intervals.
double wcpi(const std::vector<PredictiveDist>& dists, double level,
            std::uint64_t interval_seed = 0);

/// Mean absolute gap between nominal and empirical coverage over the levels.
double rce(const std::vector<PredictiveDist>& dists, const Vector& y,
           const std::vector<double>& levels = default_rce_levels(),
           std::uint64_t interval_seed = 0);

MetricReport compute_report(const std::vector<PredictiveDist>& dists, const Vector& y,
                            const std::vector<double>& rce_levels = default_rce_levels(),
                            std::uint64_t interval_seed = 0);

}  // namespace latnkm
