#pragma once

#include <string>
#include <utility>

#include "deflatron/coarse.hpp"
#include "deflatron/config.hpp"
#include "deflatron/eig.hpp"
#include "deflatron/sparse.hpp"

namespace deflatron {

enum class Provenance {
    aggregation,
    exact_eigen,
    perturbed_eigen,
    aggregate_restricted_eigen,
    direct_interpolation,
    user_supplied,
};

inline std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::aggregation: return "aggregation";
    case Provenance::exact_eigen: return "exact_eigen";
    case Provenance::perturbed_eigen: return "perturbed_eigen";
    case Provenance::aggregate_restricted_eigen: return "aggregate_restricted_eigen";
    case Provenance::direct_interpolation: return "direct_interpolation";
    case Provenance::user_supplied: return "user_supplied";
    }
    return "unknown";
}

/// Basis V of the deflation subspace, stored sparse so that grid-scale
/// interpolation bases stay affordable. Column independence is verified by QR
/// at dense-checkable sizes; the structured constructors (aggregation, direct
/// interpolation) guarantee it by construction at any size.
class DeflationBasis {
public:
    DeflationBasis(SparseMatrix v, Provenance provenance, bool skip_rank_check = false)
        : v_(std::move(v)), vt_(sparse_transpose(v_)), provenance_(provenance) {
        require(v_.cols() >= 1, "DeflationBasis: need at least one column");
        require(v_.cols() < v_.rows(), "DeflationBasis: dimension must satisfy m < n");
        if (!skip_rank_check && v_.rows() <= dense_limit()) {
            if (!has_full_column_rank(v_.dense()))
                numerical_error("DeflationBasis: columns are linearly dependent");
        }
    }

    DeflationBasis(const DenseMatrix& v, Provenance provenance)
        : DeflationBasis(SparseMatrix::from_dense(v, false), provenance) {}

    std::size_t ambient_dim() const { return v_.rows(); }
    std::size_t dim() const { return v_.cols(); }
    const SparseMatrix& matrix() const { return v_; }
    DenseMatrix dense() const { return v_.dense(); }
    Provenance provenance() const { return provenance_; }

    Vector apply(const Vector& coeffs) const { return spmv(v_, coeffs); }
    Vector apply_transposed(const Vector& x) const { return spmv(vt_, x); }

    const SparseMatrix& vt() const { return vt_; }

private:
    SparseMatrix v_;
    SparseMatrix vt_;
    Provenance provenance_;
};

/// The deflated operator A (I - pi_A(S)) held implicitly: one spmv plus one
/// coarse solve per application, with A V cached. Self-adjoint and positive
/// semi-definite with kernel S.
class DeflatedOperator {
public:
    DeflatedOperator(SparseMatrix a, DeflationBasis basis, CoarsePolicy policy)
        : a_(std::move(a)),
          basis_(std::move(basis)),
          av_(sparse_matmul(a_, basis_.matrix())),
          av_t_(sparse_transpose(av_)),
          coarse_(sparse_symmetrize(sparse_matmul(basis_.vt(), av_)), policy) {
        require(a_.rows() == a_.cols(), "DeflatedOperator: A must be square");
        require(basis_.ambient_dim() == a_.rows(), "DeflatedOperator: basis/matrix mismatch");
    }

    std::size_t dim() const { return a_.rows(); }
    const SparseMatrix& a() const { return a_; }
    const DeflationBasis& basis() const { return basis_; }
    const SparseMatrix& av() const { return av_; }
    const SparseMatrix& av_transposed() const { return av_t_; }
    const CoarseSolver& coarse() const { return coarse_; }

    /// pi_A(S) x = V (V^T A V)^{-1} V^T A x
    Vector project(const Vector& x) const {
        const Vector w = spmv(av_t_, x); // (A V)^T x = V^T A x
        return basis_.apply(coarse_.solve(w).z);
    }

    /// A (I - pi_A(S)) x, one spmv and one coarse solve.
    Vector apply(const Vector& x) const {
        Vector y = spmv(a_, x);
        const Vector z = coarse_.solve(basis_.apply_transposed(y)).z;
        const Vector correction = spmv(av_, z);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] -= correction[i];
        return y;
    }

    /// (I - pi_A(S))^* b = b - A V (V^T A V)^{-1} V^T b
    Vector rhs(const Vector& b) const {
        const Vector z = coarse_.solve(basis_.apply_transposed(b)).z;
        const Vector correction = spmv(av_, z);
        Vector out = b;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= correction[i];
        return out;
    }

    /// Recover the solution of A x = b from any solution x_hat of the
    /// deflated system: x = x_hat + V (V^T A V)^{-1} V^T (b - A x_hat).
    Vector reconstruct(const Vector& b, const Vector& x_hat) const {
        Vector residual = spmv(a_, x_hat);
        for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = b[i] - residual[i];
        const Vector z = coarse_.solve(basis_.apply_transposed(residual)).z;
        Vector x = x_hat;
        axpy(1.0, basis_.apply(z), x);
        return x;
    }

private:
    SparseMatrix a_;
    DeflationBasis basis_;
    SparseMatrix av_;
    SparseMatrix av_t_;
    CoarseSolver coarse_;
};

inline Vector project_a(const DeflatedOperator& op, const Vector& x) { return op.project(x); }
inline Vector deflated_apply(const DeflatedOperator& op, const Vector& x) { return op.apply(x); }
inline Vector deflated_rhs(const DeflatedOperator& op, const Vector& b) { return op.rhs(b); }
inline Vector reconstruct(const DeflatedOperator& op, const Vector& b, const Vector& x_hat) {
    return op.reconstruct(b, x_hat);
}

} // namespace deflatron
