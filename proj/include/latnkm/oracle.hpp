#pragma once

#include <functional>

#include "latnkm/types.hpp"

namespace latnkm::oracle {

/// Central differences with value-scaled steps h_i = h0 * (1 + |v_i|).
struct FdConfig {
    double h0 = 1e-4;
};

using ScalarFn = std::function<double(const Vector&)>;

/// Central-difference gradient of J at v.
Vector finite_diff_gradient(const ScalarFn& j, const Vector& v, const FdConfig& cfg = {1e-6});

/// Central second differences, symmetric by construction: entry (i, j) and
/// (j, i) are computed once from the same four evaluations.
Matrix finite_diff_hessian(const ScalarFn& j, const Vector& v, const FdConfig& cfg = {1e-4});

}  // namespace latnkm::oracle
