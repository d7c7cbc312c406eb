#pragma once

#include <string>
#include <vector>

#include "latnkm/cpd.hpp"

namespace latnkm {

enum class HessianVariant { Full, GGN, Block, Diag, LastCore };

std::string to_string(HessianVariant v);
HessianVariant hessian_variant_from_string(const std::string& name);

/// Curvature of the loss at a parameter point, in the storage layout natural
/// to the chosen approximation. Structured variants never materialize the
/// DIR x DIR matrix.
struct HessianMatrix {
    HessianVariant variant = HessianVariant::GGN;
    double beta = 1.0;
    double gamma = 0.0;
    int D = 0, I = 0, R = 0;

    Matrix dense;                // Full/GGN: DIR x DIR; LastCore: IR x IR
    std::vector<Matrix> blocks;  // Block: D matrices of IR x IR
    Vector diagonal;             // Diag: length DIR
};

/// Exact block-matrix Hessian of J. Assembled blockwise, then symmetrized
/// as (H + H')/2 to remove accumulated round-off asymmetry.
HessianMatrix full_hessian(const CpdModel& model, const FeatureSet& fs, const Vector& y,
                           double beta, double gamma, Index cap = 5000);

/// Generalized Gauss-Newton curvature beta A'A + gamma I with A = [A^(1)...A^(D)].
HessianMatrix ggn_hessian(const CpdModel& model, const FeatureSet& fs, const Vector& y,
                          double beta, double gamma, Index cap = 5000);

/// Block, Diag, and LastCore sub-extractions of the GGN curvature.
HessianMatrix structured_hessian(const CpdModel& model, const FeatureSet& fs, const Vector& y,
                                 double beta, double gamma, HessianVariant variant,
                                 Index cap = 5000);

/// Retained eigenpairs of one (block of a) Hessian: columns of `vectors`
/// orthonormal, `values` descending and all >= t_hat. `offset` locates the
/// covered coordinates inside the full parameter vector.
struct TruncatedEig {
    Matrix vectors;  // dim x R_hat
    Vector values;   // length R_hat
    double t_hat = 0.0;
    Index dim = 0;
    Index offset = 0;

    Index retained() const { return values.size(); }
};

/// Truncated eigendecomposition; keeps eigenpairs with lambda >= t_hat
/// (ties retained). One factor for Full/GGN/Diag/LastCore, D factors for
/// Block. For Diag this reduces to entry thresholding with coordinate-axis
/// eigenvectors.
std::vector<TruncatedEig> truncated_eig(const HessianMatrix& h, double t_hat);

/// Largest eigenvalue across the variant's blocks, used by the
/// relative-threshold mode.
double max_eigenvalue(const HessianMatrix& h);

}  // namespace latnkm
