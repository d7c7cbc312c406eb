#include "latnkm/hessian.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace latnkm {

std::string to_string(HessianVariant v) {
    switch (v) {
        case HessianVariant::Full: return "full";
        case HessianVariant::GGN: return "ggn";
        case HessianVariant::Block: return "block";
        case HessianVariant::Diag: return "diag";
        case HessianVariant::LastCore: return "last";
    }
    return "?";
}

HessianVariant hessian_variant_from_string(const std::string& name) {
    if (name == "full") return HessianVariant::Full;
    if (name == "ggn") return HessianVariant::GGN;
    if (name == "block") return HessianVariant::Block;
    if (name == "diag") return HessianVariant::Diag;
    if (name == "last" || name == "lastcore") return HessianVariant::LastCore;
    throw ConfigError("unknown Hessian variant: " + name);
}

namespace {

void check_cap(const CpdModel& model, Index cap) {
    if (model.parameter_count() > cap) throw TooLarge("Hessian dimension exceeds dense cap");
}

Matrix core_gram(const CpdModel& model, const FeatureSet& fs, int d, double beta, double gamma) {
    const Matrix a = design_matrix(model, fs, d);
    Matrix h = beta * (a.transpose() * a);
    h.diagonal().array() += gamma;
    return h;
}

}  // namespace

HessianMatrix full_hessian(const CpdModel& model, const FeatureSet& fs, const Vector& y,
                           double beta, double gamma, Index cap) {
    check_cap(model, cap);
    const int D = model.dims();
    const int I = model.local_dim();
    const int R = model.rank();
    const Index block = static_cast<Index>(I) * R;
    const Index dim = static_cast<Index>(D) * block;

    HessianMatrix h;
    h.variant = HessianVariant::Full;
    h.beta = beta;
    h.gamma = gamma;
    h.D = D;
    h.I = I;
    h.R = R;
    h.dense = Matrix::Zero(dim, dim);

    const Vector residual = model_response(model, fs) - y;
    std::vector<Matrix> z(D);
    for (int d = 0; d < D; ++d) z[d] = z_matrix(model, fs, d);

    for (int k = 0; k < D; ++k)
        h.dense.block(k * block, k * block, block, block) = core_gram(model, fs, k, beta, gamma);

    for (int k = 0; k < D; ++k) {
        for (int m = k + 1; m < D; ++m) {
            const Matrix zkm = pair_z_matrix(model, fs, k, m);
            Matrix off(block, block);
            for (int r = 0; r < R; ++r) {
                for (int p = 0; p < R; ++p) {
                    // T^(k,m,r,p) = diag(Z^(k)_{:r} .* Z^(m)_{:p})
                    //             + delta_{rp} diag((f - y) .* Z^(k,m)_{:r})
                    Vector t = z[k].col(r).array() * z[m].col(p).array();
                    if (r == p) t.array() += residual.array() * zkm.col(r).array();
                    off.block(I * r, I * p, I, I) =
                        beta * (fs.phi[k].transpose() * t.asDiagonal() * fs.phi[m]);
                }
            }
            h.dense.block(k * block, m * block, block, block) = off;
            h.dense.block(m * block, k * block, block, block) = off.transpose();
        }
    }
    h.dense = 0.5 * (h.dense + h.dense.transpose()).eval();
    return h;
}

HessianMatrix ggn_hessian(const CpdModel& model, const FeatureSet& fs, const Vector& y,
                          double beta, double gamma, Index cap) {
    (void)y;
    check_cap(model, cap);
    const int D = model.dims();
    const Index block = static_cast<Index>(model.local_dim()) * model.rank();

    Matrix a(fs.samples(), D * block);
    for (int d = 0; d < D; ++d) a.middleCols(d * block, block) = design_matrix(model, fs, d);

    HessianMatrix h;
    h.variant = HessianVariant::GGN;
    h.beta = beta;
    h.gamma = gamma;
    h.D = D;
    h.I = model.local_dim();
    h.R = model.rank();
    h.dense = beta * (a.transpose() * a);
    h.dense.diagonal().array() += gamma;
    h.dense = 0.5 * (h.dense + h.dense.transpose()).eval();
    return h;
}

HessianMatrix structured_hessian(const CpdModel& model, const FeatureSet& fs, const Vector& y,
                                 double beta, double gamma, HessianVariant variant, Index cap) {
    (void)y;
    check_cap(model, cap);
    HessianMatrix h;
    h.variant = variant;
    h.beta = beta;
    h.gamma = gamma;
    h.D = model.dims();
    h.I = model.local_dim();
    h.R = model.rank();

    switch (variant) {
        case HessianVariant::Block:
            h.blocks.reserve(h.D);
            for (int d = 0; d < h.D; ++d) h.blocks.push_back(core_gram(model, fs, d, beta, gamma));
            break;
        case HessianVariant::Diag: {
            h.diagonal.resize(model.parameter_count());
            const Index block = static_cast<Index>(h.I) * h.R;
            for (int d = 0; d < h.D; ++d) {
                const Matrix a = design_matrix(model, fs, d);
                h.diagonal.segment(d * block, block) =
                    beta * a.array().square().colwise().sum().transpose() + gamma;
            }
            break;
        }
        case HessianVariant::LastCore:
            // Cores 1..D-1 are point masses; only the D-th block is stochastic.
            h.dense = core_gram(model, fs, h.D - 1, beta, gamma);
            break;
        default:
            throw ConfigError("structured_hessian expects Block, Diag, or LastCore");
    }
    return h;
}

namespace {

TruncatedEig truncate_dense(const Matrix& m, double t_hat, Index offset) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");

    const Vector& values = solver.eigenvalues();  // ascending
    Index keep = 0;
    for (Index j = 0; j < values.size(); ++j)
        if (values[j] >= t_hat) ++keep;

    TruncatedEig eig;
    eig.t_hat = t_hat;
    eig.dim = m.rows();
    eig.offset = offset;
    eig.values.resize(keep);
    eig.vectors.resize(m.rows(), keep);
    for (Index j = 0; j < keep; ++j) {
        const Index src = values.size() - 1 - j;  // descending order
        eig.values[j] = values[src];
        eig.vectors.col(j) = solver.eigenvectors().col(src);
    }
    return eig;
}

TruncatedEig truncate_diagonal(const Vector& diag, double t_hat) {
    std::vector<Index> kept;
    for (Index i = 0; i < diag.size(); ++i)
        if (diag[i] >= t_hat) kept.push_back(i);
    std::sort(kept.begin(), kept.end(),
              [&](Index a, Index b) { return diag[a] > diag[b]; });

    TruncatedEig eig;
    eig.t_hat = t_hat;
    eig.dim = diag.size();
    eig.offset = 0;
    eig.values.resize(static_cast<Index>(kept.size()));
    eig.vectors = Matrix::Zero(diag.size(), static_cast<Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) {
        eig.values[static_cast<Index>(j)] = diag[kept[j]];
        eig.vectors(kept[j], static_cast<Index>(j)) = 1.0;
    }
    return eig;
}

}  // namespace

std::vector<TruncatedEig> truncated_eig(const HessianMatrix& h, double t_hat) {
    if (!std::isfinite(t_hat)) throw ConfigError("threshold must be finite");
    const Index block = static_cast<Index>(h.I) * h.R;
    std::vector<TruncatedEig> factors;
    switch (h.variant) {
        case HessianVariant::Full:
        case HessianVariant::GGN:
            factors.push_back(truncate_dense(h.dense, t_hat, 0));
            break;
        case HessianVariant::LastCore:
            factors.push_back(truncate_dense(h.dense, t_hat, (h.D - 1) * block));
            break;
        case HessianVariant::Block:
            for (int d = 0; d < h.D; ++d)
                factors.push_back(truncate_dense(h.blocks[d], t_hat, d * block));
            break;
        case HessianVariant::Diag:
            factors.push_back(truncate_diagonal(h.diagonal, t_hat));
            break;
    }
    return factors;
}

double max_eigenvalue(const HessianMatrix& h) {
    switch (h.variant) {
        case HessianVariant::Diag:
            return h.diagonal.maxCoeff();
        case HessianVariant::Block: {
            double best = -std::numeric_limits<double>::infinity();
            for (const Matrix& b : h.blocks) {
                Eigen::SelfAdjointEigenSolver<Matrix> solver(b, Eigen::EigenvaluesOnly);
                best = std::max(best, solver.eigenvalues().maxCoeff());
            }
            return best;
        }
        default: {
            Eigen::SelfAdjointEigenSolver<Matrix> solver(h.dense, Eigen::EigenvaluesOnly);
            return solver.eigenvalues().maxCoeff();
        }
    }
}

}  // namespace latnkm
