#include "latnkm/oracle.hpp"

#include <cmath>

namespace latnkm::oracle {

namespace {

double checked(double value) {
    if (!std::isfinite(value)) throw NumericalError("non-finite objective evaluation");
    return value;
}

}  // namespace

Vector finite_diff_gradient(const ScalarFn& j, const Vector& v, const FdConfig& cfg) {
    if (cfg.h0 <= 0) throw ConfigError("finite-difference step must be positive");
    Vector grad(v.size());
    Vector point = v;
    for (Index i = 0; i < v.size(); ++i) {
        const double h = cfg.h0 * (1.0 + std::abs(v[i]));
        point[i] = v[i] + h;
        const double plus = checked(j(point));
        point[i] = v[i] - h;
        const double minus = checked(j(point));
        point[i] = v[i];
        grad[i] = (plus - minus) / (2.0 * h);
    }
    return grad;
}

Matrix finite_diff_hessian(const ScalarFn& j, const Vector& v, const FdConfig& cfg) {
    if (cfg.h0 <= 0) throw ConfigError("finite-difference step must be positive");
    const Index n = v.size();
    Vector h(n);
    for (Index i = 0; i < n; ++i) h[i] = cfg.h0 * (1.0 + std::abs(v[i]));

    Matrix hess(n, n);
    Vector point = v;
    const double center = checked(j(point));
    for (Index i = 0; i < n; ++i) {
        // Diagonal: second central difference.
        point[i] = v[i] + h[i];
        const double plus = checked(j(point));
        point[i] = v[i] - h[i];
        const double minus = checked(j(point));
        point[i] = v[i];
        hess(i, i) = (plus - 2.0 * center + minus) / (h[i] * h[i]);

        for (Index k = i + 1; k < n; ++k) {
            point[i] = v[i] + h[i];
            point[k] = v[k] + h[k];
            const double pp = checked(j(point));
            point[k] = v[k] - h[k];
            const double pm = checked(j(point));
            point[i] = v[i] - h[i];
            const double mm = checked(j(point));
            point[k] = v[k] + h[k];
            const double mp = checked(j(point));
            point[i] = v[i];
            point[k] = v[k];
            const double value = (pp - pm - mp + mm) / (4.0 * h[i] * h[k]);
            hess(i, k) = value;
            hess(k, i) = value;
        }
    }
    return hess;
}

}  // namespace latnkm::oracle
