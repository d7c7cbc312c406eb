#pragma once

#include <optional>
#include <string>
#include <utility>

#include "latnkm/types.hpp"

namespace latnkm {

/// Per-column affine transform fitted on the training split only.
struct Standardizer {
    Vector x_mean, x_std;
    double y_mean = 0.0, y_std = 1.0;

    Matrix transform_x(const Matrix& x) const;
    Vector transform_y(const Vector& y) const;
    Vector untransform_y(const Vector& y) const;
    double untransform_y(double y) const;
};

struct Dataset {
    Matrix X;
    Vector y;
    std::string name;
    std::optional<Standardizer> standardizer;  // set on standardized splits
};

/// Parses a comma-separated file with a mandatory header row. The target is
/// selected by column name; an empty name means the last column.
Dataset load_csv(const std::string& path, const std::string& target_column = "");

/// Seeded uniform split; when `standardize` is set, fits a Standardizer on
/// the training rows and applies it to both sides. Constant feature columns
/// are an error unless `drop_constant` is set.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_frac, std::uint64_t seed,
                                  bool standardize = true, bool drop_constant = false);

/// Synthetic cubic regression task: 20 training points with x ~ U[-4, 4],
/// 100 test points with x ~ U[-5, 5], y = x^3 + N(0, 3^2). No normalization.
/// `noiseless` zeroes the noise term (test support).
std::pair<Dataset, Dataset> gen_cubic(std::uint64_t seed, bool noiseless = false);

}  // namespace latnkm
