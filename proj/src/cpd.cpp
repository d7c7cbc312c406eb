#include "latnkm/cpd.hpp"

#include <cmath>

namespace latnkm {

Index CpdModel::parameter_count() const {
    return static_cast<Index>(dims()) * local_dim() * rank();
}

Vector CpdModel::parameters() const {
    Vector v(parameter_count());
    Index pos = 0;
    for (const Matrix& core : cores) {
        v.segment(pos, core.size()) = Eigen::Map<const Vector>(core.data(), core.size());
        pos += core.size();
    }
    return v;
}

void CpdModel::set_parameters(const Vector& v) {
    if (v.size() != parameter_count())
        throw ShapeError("parameter vector has wrong length");
    Index pos = 0;
    for (Matrix& core : cores) {
        core = Eigen::Map<const Matrix>(v.data() + pos, core.rows(), core.cols());
        pos += core.size();
    }
}

Vector feature_row(double x, const FeatureMapSpec& spec) {
    if (!std::isfinite(x)) throw InvalidData("non-finite input to feature map");
    const int I = spec.local_dim;
    Vector row(I);
    double p = 1.0;
    for (int i = 0; i < I; ++i) {
        row[i] = p;
        p *= x;
    }
    const double norm = row.norm();
    if (norm > 0) row /= norm;
    return row;
}

FeatureSet build_features(const Matrix& X, const FeatureMapSpec& spec) {
    if (spec.local_dim < 1) throw ConfigError("local_dim must be >= 1");
    if (!X.allFinite()) throw InvalidData("non-finite entries in input matrix");
    FeatureSet fs;
    fs.phi.reserve(X.cols());
    for (Index d = 0; d < X.cols(); ++d) {
        Matrix phi(X.rows(), spec.local_dim);
        for (Index n = 0; n < X.rows(); ++n) phi.row(n) = feature_row(X(n, d), spec).transpose();
        fs.phi.push_back(std::move(phi));
    }
    return fs;
}

namespace {

void check_shapes(const CpdModel& model, const FeatureSet& fs) {
    if (model.dims() != fs.dims()) throw ShapeError("model and feature set disagree on D");
    for (int d = 0; d < model.dims(); ++d) {
        if (fs.phi[d].cols() != model.cores[d].rows())
            throw ShapeError("feature and core disagree on I");
        if (model.cores[d].rows() != model.local_dim() || model.cores[d].cols() != model.rank())
            throw ShapeError("cores must share a common I x R shape");
    }
}

}  // namespace

Matrix z_matrix(const CpdModel& model, const FeatureSet& fs, int skip_d) {
    check_shapes(model, fs);
    Matrix z = Matrix::Ones(fs.samples(), model.rank());
    for (int d = 0; d < model.dims(); ++d) {
        if (d == skip_d) continue;
        z.array() *= (fs.phi[d] * model.cores[d]).array();
    }
    return z;
}

Matrix pair_z_matrix(const CpdModel& model, const FeatureSet& fs, int k, int m) {
    check_shapes(model, fs);
    Matrix z = Matrix::Ones(fs.samples(), model.rank());
    for (int d = 0; d < model.dims(); ++d) {
        if (d == k || d == m) continue;
        z.array() *= (fs.phi[d] * model.cores[d]).array();
    }
    return z;
}

Vector model_response(const CpdModel& model, const FeatureSet& fs) {
    return z_matrix(model, fs, -1).rowwise().sum();
}

Matrix design_matrix(const CpdModel& model, const FeatureSet& fs, int d) {
    if (d < 0 || d >= model.dims()) throw ShapeError("core index out of range");
    const Matrix z = z_matrix(model, fs, d);
    const Matrix& phi = fs.phi[d];
    const int I = model.local_dim();
    const int R = model.rank();
    Matrix a(fs.samples(), static_cast<Index>(I) * R);
    for (int r = 0; r < R; ++r)
        for (int i = 0; i < I; ++i)
            a.col(i + static_cast<Index>(I) * r) = phi.col(i).array() * z.col(r).array();
    return a;
}

PartialResponse partial_response(const CpdModel& model, const FeatureSet& fs, int d) {
    if (d < 0 || d >= model.dims()) throw ShapeError("core index out of range");
    return {z_matrix(model, fs, d), design_matrix(model, fs, d)};
}

Vector dense_weights(const CpdModel& model, Index cap) {
    const int D = model.dims();
    const int I = model.local_dim();
    const int R = model.rank();
    double size = 1.0;
    for (int d = 0; d < D; ++d) size *= I;
    if (size > static_cast<double>(cap)) throw TooLarge("dense weight expansion exceeds cap");

    const Index total = static_cast<Index>(size);
    Vector w = Vector::Zero(total);
    for (int r = 0; r < R; ++r) {
        Vector term = model.cores[0].col(r);
        for (int d = 1; d < D; ++d) {
            // Kronecker step keeping earlier dimensions fastest.
            Vector next(term.size() * I);
            for (int j = 0; j < I; ++j)
                next.segment(term.size() * j, term.size()) = model.cores[d](j, r) * term;
            term = std::move(next);
        }
        w += term;
    }
    return w;
}

Vector dense_features(const Vector& x, const FeatureMapSpec& spec, Index cap) {
    const int I = spec.local_dim;
    double size = 1.0;
    for (Index d = 0; d < x.size(); ++d) size *= I;
    if (size > static_cast<double>(cap)) throw TooLarge("dense feature expansion exceeds cap");

    Vector phi = feature_row(x[0], spec);
    for (Index d = 1; d < x.size(); ++d) {
        const Vector local = feature_row(x[d], spec);
        Vector next(phi.size() * I);
        for (int j = 0; j < I; ++j) next.segment(phi.size() * j, phi.size()) = local[j] * phi;
        phi = std::move(next);
    }
    return phi;
}

}  // namespace latnkm
