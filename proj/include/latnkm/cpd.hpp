#pragma once

#include <vector>

#include "latnkm/types.hpp"

namespace latnkm {

/// Local feature map applied independently to each input coordinate.
/// Produces the monomials (1, x, ..., x^{I-1}) scaled to unit Euclidean norm.
struct FeatureMapSpec {
    int local_dim = 2;  // I, number of basis functions per input dimension
};

/// Rank-R CPD kernel machine: D factor matrices ("cores") of shape I x R.
/// The implied weight vector w has length I^D and is never materialized
/// outside of dense_weights().
struct CpdModel {
    std::vector<Matrix> cores;  // each I x R
    FeatureMapSpec spec;

    int dims() const { return static_cast<int>(cores.size()); }
    int local_dim() const { return cores.empty() ? 0 : static_cast<int>(cores[0].rows()); }
    int rank() const { return cores.empty() ? 0 : static_cast<int>(cores[0].cols()); }
    Index parameter_count() const;

    /// Concatenation of vec(V^(1)), ..., vec(V^(D)), column-major per core.
    Vector parameters() const;
    void set_parameters(const Vector& v);
};

/// Per-dimension feature matrices Phi^(d), each N x I with unit-norm rows.
struct FeatureSet {
    std::vector<Matrix> phi;

    Index samples() const { return phi.empty() ? 0 : phi[0].rows(); }
    int dims() const { return static_cast<int>(phi.size()); }
};

/// Feature row for a single scalar input.
Vector feature_row(double x, const FeatureMapSpec& spec);

/// Builds Phi^(d) for every column of X. Throws InvalidData on non-finite input.
FeatureSet build_features(const Matrix& X, const FeatureMapSpec& spec);

/// Model response f_n = sum_r prod_d [Phi^(d) V^(d)]_{nr}, evaluated in O(NDIR).
Vector model_response(const CpdModel& model, const FeatureSet& fs);

/// Z^(d) = Hadamard product over k != d of Phi^(k) V^(k); the empty product
/// (D = 1) is the all-ones N x R matrix. skip_d = -1 gives the full product Z.
Matrix z_matrix(const CpdModel& model, const FeatureSet& fs, int skip_d);

/// Z^(k,m): Hadamard product excluding cores k and m (all-ones when D = 2).
Matrix pair_z_matrix(const CpdModel& model, const FeatureSet& fs, int k, int m);

/// Design matrix A^(d) = Z^(d) (row-wise Khatri-Rao) Phi^(d), N x IR,
/// with column (i + I*r) = Phi^(d)(:,i) .* Z^(d)(:,r) so that
/// A^(d) vec(V^(d)) = f.
Matrix design_matrix(const CpdModel& model, const FeatureSet& fs, int d);

struct PartialResponse {
    Matrix z;  // N x R
    Matrix a;  // N x IR
};

/// (Z^(d), A^(d)) for core d (zero-based). Throws ShapeError on a bad index.
PartialResponse partial_response(const CpdModel& model, const FeatureSet& fs, int d);

/// Exact Kronecker expansion w = sum_r v^(D)_r (x) ... (x) v^(1)_r, length I^D
/// with index i_1 fastest. Test support only; throws TooLarge above the cap.
Vector dense_weights(const CpdModel& model, Index cap = 1000000);

/// Full tensor-product feature vector phi(x), same index convention as
/// dense_weights. Test support only.
Vector dense_features(const Vector& x, const FeatureMapSpec& spec, Index cap = 1000000);

}  // namespace latnkm
