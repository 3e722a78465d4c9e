#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "deflatron/eig.hpp"
#include "deflatron/projection.hpp"

namespace deflatron {

/// Partition of the variable set {0..n-1} into m non-empty aggregates.
struct AggregateSet {
    std::vector<std::size_t> assignments; // aggregate index per variable
    std::size_t count = 0;

    void validate() const {
        require(count >= 1, "AggregateSet: need at least one aggregate");
        std::vector<bool> seen(count, false);
        for (std::size_t a : assignments) {
            require(a < count, "AggregateSet: assignment out of range");
            seen[a] = true;
        }
        for (bool s : seen) require(s, "AggregateSet: empty aggregate");
    }

    std::size_t n() const { return assignments.size(); }
};

/// Coarse/fine splitting; `coarse[i]` marks variable i as a C point.
struct CfSplitting {
    std::vector<bool> coarse;
    std::optional<std::pair<std::size_t, std::size_t>> grid_shape;

    void validate() const {
        bool any = false;
        for (bool c : coarse) any = any || c;
        require(any, "CfSplitting: need at least one coarse point");
    }

    std::size_t n() const { return coarse.size(); }

    std::vector<std::size_t> coarse_indices() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < coarse.size(); ++i)
            if (coarse[i]) idx.push_back(i);
        return idx;
    }
};

/// Normalized perturbation shape and its Frobenius magnitude.
struct PerturbationSpec {
    DenseMatrix direction; // ||direction||_F = 1
    double magnitude = 0.0;

    void validate() const {
        require(magnitude >= 0.0, "PerturbationSpec: magnitude must be >= 0");
        const double f = frobenius_norm(direction);
        require(std::abs(f - 1.0) <= 1e-8, "PerturbationSpec: direction must have unit Frobenius norm");
    }
};

/// Indicator-vector basis: v^(i)_j = 1 iff variable j belongs to aggregate i.
inline DeflationBasis aggregation_basis(const AggregateSet& agg) {
    agg.validate();
    std::vector<Triplet> t;
    t.reserve(agg.n());
    for (std::size_t j = 0; j < agg.n(); ++j) t.push_back({j, agg.assignments[j], 1.0});
    SparseMatrix v = SparseMatrix::from_triplets(agg.n(), agg.count, std::move(t), false);
    // Disjoint non-empty supports make the columns independent by construction.
    return DeflationBasis(std::move(v), Provenance::aggregation, /*skip_rank_check=*/true);
}

/// Basis of the invariant subspace belonging to the n-k smallest eigenvalues
/// (eigenvalues sorted descending, so columns k..n-1).
inline DeflationBasis eigen_basis(const EigenDecomposition& eig, std::size_t k) {
    const std::size_t n = eig.values.size();
    require(k >= 1 && k < n, "eigen_basis: need 1 <= k < n");
    return DeflationBasis(eig.vectors.slice_cols(k, n - k), Provenance::exact_eigen);
}

/// Perturbed eigenvector basis Q_1 + magnitude * direction.
inline DeflationBasis perturbed_eigen_basis(const EigenDecomposition& eig, std::size_t k,
                                            const PerturbationSpec& spec) {
    spec.validate();
    const std::size_t n = eig.values.size();
    require(k >= 1 && k < n, "perturbed_eigen_basis: need 1 <= k < n");
    require(spec.direction.rows() == n && spec.direction.cols() == n - k,
            "perturbed_eigen_basis: direction shape mismatch");
    const DenseMatrix e1 = [&] {
        DenseMatrix e = spec.direction;
        for (double& x : e.data()) x *= spec.magnitude;
        return e;
    }();
    if (spectral_norm(e1) >= 1.0)
        numerical_error("perturbed_eigen_basis: perturbation spectral norm must be < 1");
    return DeflationBasis(add_scaled(eig.vectors.slice_cols(k, n - k), 1.0, e1),
                          Provenance::perturbed_eigen);
}

/// Orthonormal bases for a perturbed subspace and its complement, obtained
/// from the QR factorization of Q + [E_1 | 0] with positive-diagonal R.
/// `delta` is max(||W_1||_2, ||W_2||_2) for W = Q_tilde - Q.
struct OrthonormalCompletion {
    DenseMatrix q1_tilde; // spans range(Q_1 + E_1)
    DenseMatrix q2_tilde; // spans the orthogonal complement
    double delta = 0.0;
};

inline OrthonormalCompletion orthonormal_completion(const DenseMatrix& q,
                                                    std::size_t leading_cols,
                                                    const DenseMatrix& e1) {
    require(q.rows() == q.cols(), "orthonormal_completion: Q must be square");
    const std::size_t n = q.rows();
    require(leading_cols >= 1 && leading_cols <= n,
            "orthonormal_completion: bad leading block size");
    require(e1.rows() == n && e1.cols() == leading_cols,
            "orthonormal_completion: perturbation shape mismatch");
    if (spectral_norm(e1) >= 1.0)
        numerical_error("orthonormal_completion: perturbation spectral norm must be < 1");

    DenseMatrix perturbed = q;
    for (std::size_t j = 0; j < leading_cols; ++j) {
        double* col = perturbed.col(j).data();
        const double* ej = e1.col(j).data();
        for (std::size_t i = 0; i < n; ++i) col[i] += ej[i];
    }
    const FullQrDecomposition f = qr_full(perturbed);

    DenseMatrix w1(n, leading_cols), w2(n, n - leading_cols);
    for (std::size_t j = 0; j < n; ++j) {
        const double* qt = f.q.col(j).data();
        const double* q0 = q.col(j).data();
        double* w = (j < leading_cols) ? w1.col(j).data() : w2.col(j - leading_cols).data();
        for (std::size_t i = 0; i < n; ++i) w[i] = qt[i] - q0[i];
    }
    OrthonormalCompletion out;
    out.q1_tilde = f.q.slice_cols(0, leading_cols);
    out.q2_tilde = f.q.slice_cols(leading_cols, n - leading_cols);
    out.delta = std::max(spectral_norm(w1), spectral_norm(w2));
    return out;
}

/// Restrictions of the columns of w onto the coordinate subspaces of the
/// aggregates. Zero restrictions are dropped; if the surviving raw columns
/// are linearly dependent they are replaced by an orthonormal set truncated
/// at the rank threshold.
inline DeflationBasis aggregate_restricted_eigen_basis(const AggregateSet& agg,
                                                       const DenseMatrix& w) {
    agg.validate();
    require(w.rows() == agg.n(), "aggregate_restricted_eigen_basis: dimension mismatch");
    const std::size_t n = agg.n();

    std::vector<Vector> raw;
    for (std::size_t j = 0; j < w.cols(); ++j) {
        const double wj_norm = norm2(w.col_vector(j));
        std::vector<Vector> per_agg(agg.count, Vector(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) per_agg[agg.assignments[i]][i] = w(i, j);
        for (std::size_t a = 0; a < agg.count; ++a) {
            if (norm2(per_agg[a]) > 1e-14 * std::max(wj_norm, 1e-300))
                raw.push_back(std::move(per_agg[a]));
        }
    }
    require(!raw.empty(), "aggregate_restricted_eigen_basis: all restrictions vanish");

    // Modified Gram-Schmidt rank probe; kept columns double as the repaired
    // orthonormal basis when the raw set is dependent.
    std::vector<Vector> ortho;
    bool deficient = false;
    for (const Vector& c : raw) {
        Vector v = c;
        const double orig = norm2(v);
        for (const Vector& u : ortho) axpy(-dot(v, u), u, v);
        const double res = norm2(v);
        if (res <= tol::rank_rel * orig) {
            deficient = true;
            continue;
        }
        scale(v, 1.0 / res);
        ortho.push_back(std::move(v));
    }
    const auto& cols = deficient ? ortho : raw;
    return DeflationBasis(SparseMatrix::from_dense(DenseMatrix::from_columns(cols), false),
                          Provenance::aggregate_restricted_eigen,
                          /*skip_rank_check=*/true);
}

/// Structured-grid coarse/fine splitting on the interior points of a grid
/// with eliminated Dirichlet boundary: interior point (i, j) (1-based) is
/// coarse iff both i and j are odd, which places the coarse points on the
/// even global grid lines once the boundary row and column are counted.
/// Gives ceil(N/2)^2 coarse points (~ n/4). Row-major flattening.
inline CfSplitting full_coarsening(std::size_t n_grid) {
    require(n_grid >= 3, "full_coarsening: grid size must be >= 3");
    CfSplitting split;
    split.coarse.resize(n_grid * n_grid, false);
    for (std::size_t i = 1; i <= n_grid; ++i)
        for (std::size_t j = 1; j <= n_grid; ++j)
            if (i % 2 == 1 && j % 2 == 1) split.coarse[(i - 1) * n_grid + (j - 1)] = true;
    split.grid_shape = {n_grid, n_grid};
    split.validate();
    return split;
}

/// Classical direct interpolation for symmetric M-matrices: coarse rows are
/// unit rows, fine row i takes w_ij = -alpha_i a_ij / a_ii on its negative
/// coarse couplings with alpha_i = sum_{k != i} a_ik / sum_{j in C_i} a_ij.
inline DeflationBasis direct_interpolation(const SparseMatrix& a, const CfSplitting& split) {
    split.validate();
    require(a.rows() == a.cols(), "direct_interpolation: matrix must be square");
    require(split.n() == a.rows(), "direct_interpolation: splitting size mismatch");
    const std::size_t n = a.rows();

    std::vector<std::size_t> coarse_col(n, 0);
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (split.coarse[i]) coarse_col[i] = m++;

    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
        if (split.coarse[i]) {
            t.push_back({i, coarse_col[i], 1.0});
            continue;
        }
        double diag = 0.0;
        double off_sum = 0.0;
        double coarse_sum = 0.0;
        std::vector<std::pair<std::size_t, double>> couplings;
        for (std::size_t p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
            const std::size_t j = a.col_idx()[p];
            const double v = a.values()[p];
            if (j == i) {
                diag = v;
                continue;
            }
            if (v > 0.0)
                numerical_error("direct_interpolation: positive off-diagonal in a fine row");
            off_sum += v;
            if (split.coarse[j] && v < 0.0) {
                coarse_sum += v;
                couplings.emplace_back(coarse_col[j], v);
            }
        }
        if (couplings.empty())
            numerical_error("direct_interpolation: fine point without a coarse neighbour");
        if (diag <= 0.0)
            numerical_error("direct_interpolation: non-positive diagonal entry");
        const double alpha = off_sum / coarse_sum;
        for (const auto& [col, v] : couplings) t.push_back({i, col, -alpha * v / diag});
    }
    SparseMatrix v = SparseMatrix::from_triplets(n, m, std::move(t), false);
    // The coarse rows embed an identity block, so the columns are independent.
    return DeflationBasis(std::move(v), Provenance::direct_interpolation,
                          /*skip_rank_check=*/true);
}

/// Measured weak-approximation constant of the pair (V, R) with R the
/// injection onto the coarse points and D = diag(A):
///   tau = max_e ||e - V R e||_D^2 / ||e||_A^2,
/// computed as the top eigenvalue of the pencil ((I-VR)^T D (I-VR), A).
inline double verify_wap_tau(const SparseMatrix& a, const CfSplitting& split,
                             const DeflationBasis& basis) {
    split.validate();
    const std::size_t n = a.rows();
    require(a.cols() == n && split.n() == n, "verify_wap_tau: dimension mismatch");
    require(basis.ambient_dim() == n, "verify_wap_tau: basis dimension mismatch");
    if (n > dense_limit()) numerical_error("verify_wap_tau: dense size limit exceeded");
    const auto coarse = split.coarse_indices();
    require(coarse.size() == basis.dim(),
            "verify_wap_tau: basis width must match the coarse point count");

    // E = I - V R; column c_j of E loses column j of V.
    DenseMatrix e = DenseMatrix::identity(n);
    const SparseMatrix& v = basis.matrix();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = v.row_ptr()[i]; p < v.row_ptr()[i + 1]; ++p)
            e(i, coarse[v.col_idx()[p]]) -= v.values()[p];

    // B = E^T D E via F = D^{1/2} E.
    DenseMatrix f = e;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a.at(i, i);
        if (d <= 0.0) numerical_error("verify_wap_tau: non-positive diagonal");
        const double s = std::sqrt(d);
        for (std::size_t j = 0; j < n; ++j) f(i, j) *= s;
    }
    DenseMatrix b = matmul_tn(f, f);
    symmetrize(b);

    const DenseMatrix l = cholesky(a.dense());
    DenseMatrix y = b;
    for (std::size_t j = 0; j < n; ++j) {
        Vector col = y.col_vector(j);
        col = solve_lower(l, col);
        std::copy(col.begin(), col.end(), y.col(j).begin());
    }
    DenseMatrix m = right_solve_lower_transposed(y, l);
    symmetrize(m);
    return sym_eig(m).values.front();
}

} // namespace deflatron
