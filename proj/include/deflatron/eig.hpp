#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deflatron/config.hpp"
#include "deflatron/core.hpp"

namespace deflatron {

/// Symmetric eigendecomposition. Eigenvalues sorted descending, `vectors`
/// holds the matching orthonormal eigenvectors as columns.
struct EigenDecomposition {
    std::vector<double> values;
    DenseMatrix vectors;
};

namespace detail {

/// One cyclic Jacobi sweep over the strict upper triangle of M, rotating the
/// eigenvector accumulator V alongside. M stays numerically symmetric because
/// both triangles are written explicitly.
inline void jacobi_sweep(DenseMatrix& m, DenseMatrix& v) {
    const std::size_t n = m.rows();
    for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            const double apq = m(p, q);
            if (apq == 0.0) continue;
            const double app = m(p, p);
            const double aqq = m(q, q);
            const double theta = (aqq - app) / (2.0 * apq);
            const double t = (theta >= 0.0)
                                 ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                 : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
            const double c = 1.0 / std::sqrt(1.0 + t * t);
            const double s = t * c;

            double* colp = m.col(p).data();
            double* colq = m.col(q).data();
            for (std::size_t k = 0; k < n; ++k) {
                const double mkp = colp[k];
                const double mkq = colq[k];
                colp[k] = c * mkp - s * mkq;
                colq[k] = s * mkp + c * mkq;
            }
            for (std::size_t k = 0; k < n; ++k) {
                const double mpk = m(p, k);
                const double mqk = m(q, k);
                m(p, k) = c * mpk - s * mqk;
                m(q, k) = s * mpk + c * mqk;
            }
            // Recompute the 2x2 block from the original entries; the exact
            // zero keeps the off-diagonal mass honest.
            m(p, p) = c * c * app - 2.0 * s * c * apq + s * s * aqq;
            m(q, q) = s * s * app + 2.0 * s * c * apq + c * c * aqq;
            m(p, q) = 0.0;
            m(q, p) = 0.0;

            double* vp = v.col(p).data();
            double* vq = v.col(q).data();
            for (std::size_t k = 0; k < n; ++k) {
                const double vkp = vp[k];
                const double vkq = vq[k];
                vp[k] = c * vkp - s * vkq;
                vq[k] = s * vkp + c * vkq;
            }
        }
    }
}

inline double offdiag_mass(const DenseMatrix& m) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i)
            if (i != j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

} // namespace detail

/// Cyclic Jacobi eigensolver for dense symmetric matrices.
inline EigenDecomposition sym_eig(const DenseMatrix& m_in) {
    require(m_in.rows() == m_in.cols(), "sym_eig: matrix must be square");
    if (asymmetry(m_in) > tol::sym_check)
        numerical_error("sym_eig: input is not symmetric");

    const std::size_t n = m_in.rows();
    DenseMatrix m = m_in;
    symmetrize(m);
    DenseMatrix v = DenseMatrix::identity(n);

    const double norm = frobenius_norm(m);
    if (norm > 0.0) {
        for (int sweep = 0; sweep < tol::eig_max_sweeps; ++sweep) {
            if (detail::offdiag_mass(m) <= tol::eig_offdiag * norm) break;
            detail::jacobi_sweep(m, v);
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return m(a, a) > m(b, b); });

    EigenDecomposition eig;
    eig.values.resize(n);
    eig.vectors = DenseMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        eig.values[j] = m(order[j], order[j]);
        auto src = v.col(order[j]);
        std::copy(src.begin(), src.end(), eig.vectors.col(j).begin());
    }
    return eig;
}

/// Singular values (descending, non-negative) via the Gram matrix of the
/// taller orientation, scaled to limit squaring error on the large end.
inline std::vector<double> svd_values(const DenseMatrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return {};
    const bool is_tall = m.rows() >= m.cols();
    const std::size_t k = std::min(m.rows(), m.cols());

    double scale = 0.0;
    for (double x : m.data()) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return std::vector<double>(k, 0.0);

    DenseMatrix scaled(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.data().size(); ++i) scaled.data()[i] = m.data()[i] / scale;

    DenseMatrix gram = is_tall ? matmul_tn(scaled, scaled)
                               : matmul(scaled, transpose(scaled));
    symmetrize(gram);

    EigenDecomposition eig = sym_eig(gram);
    std::vector<double> sv(k);
    for (std::size_t i = 0; i < k; ++i) sv[i] = scale * std::sqrt(std::max(eig.values[i], 0.0));
    return sv;
}

inline double spectral_norm(const DenseMatrix& m) {
    auto sv = svd_values(m);
    return sv.empty() ? 0.0 : sv.front();
}

/// Thin QR with orthonormal Q (rows x cols) and upper-triangular R whose
/// diagonal is forced positive by column sign flips.
struct QrDecomposition {
    DenseMatrix q;
    DenseMatrix r;
};

/// Full QR: Q is square (rows x rows); the trailing columns of Q span the
/// orthogonal complement of the input's column space.
struct FullQrDecomposition {
    DenseMatrix q;
    DenseMatrix r; // rows x cols, upper triangular in its top block
};

namespace detail {

/// Householder QR. When `full` the complete square Q is accumulated.
/// Rank failures (|r_ii| below rank_rel * max column norm) throw when
/// `check_rank` is set.
inline FullQrDecomposition householder_qr(const DenseMatrix& m_in, bool full, bool check_rank) {
    const std::size_t n = m_in.rows();
    const std::size_t k = m_in.cols();
    require(n >= k, "qr: matrix must have rows >= cols");

    double colscale = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        double s = 0.0;
        for (double x : m_in.col(j)) s += x * x;
        colscale = std::max(colscale, std::sqrt(s));
    }

    DenseMatrix r = m_in;
    std::vector<Vector> reflectors;
    reflectors.reserve(k);

    for (std::size_t j = 0; j < k && j < n; ++j) {
        Vector v(n - j, 0.0);
        double sigma = 0.0;
        for (std::size_t i = j; i < n; ++i) {
            v[i - j] = r(i, j);
            sigma += r(i, j) * r(i, j);
        }
        sigma = std::sqrt(sigma);
        if (sigma > 0.0) {
            const double alpha = (v[0] >= 0.0) ? -sigma : sigma;
            v[0] -= alpha;
            double vnorm2 = 0.0;
            for (double x : v) vnorm2 += x * x;
            if (vnorm2 > 0.0) {
                const double beta = 2.0 / vnorm2;
                for (std::size_t col = j; col < k; ++col) {
                    double s = 0.0;
                    for (std::size_t i = j; i < n; ++i) s += v[i - j] * r(i, col);
                    s *= beta;
                    for (std::size_t i = j; i < n; ++i) r(i, col) -= s * v[i - j];
                }
                r(j, j) = alpha;
                for (std::size_t i = j + 1; i < n; ++i) r(i, j) = 0.0;
                reflectors.push_back(std::move(v));
                if (check_rank && std::abs(r(j, j)) <= tol::rank_rel * colscale)
                    numerical_error("qr: rank-deficient input");
                continue;
            }
        }
        if (check_rank) numerical_error("qr: rank-deficient input");
        reflectors.emplace_back(); // identity reflector placeholder
    }

    const std::size_t qcols = full ? n : k;
    DenseMatrix q(n, qcols);
    for (std::size_t j = 0; j < qcols; ++j) q(j, j) = 1.0;
    // Apply reflectors in reverse to assemble Q = H_0 H_1 ... H_{k-1} I.
    for (std::size_t jj = reflectors.size(); jj-- > 0;) {
        const Vector& v = reflectors[jj];
        if (v.empty()) continue;
        double vnorm2 = 0.0;
        for (double x : v) vnorm2 += x * x;
        const double beta = 2.0 / vnorm2;
        for (std::size_t col = 0; col < qcols; ++col) {
            double* qc = q.col(col).data();
            double s = 0.0;
            for (std::size_t i = jj; i < n; ++i) s += v[i - jj] * qc[i];
            s *= beta;
            for (std::size_t i = jj; i < n; ++i) qc[i] -= s * v[i - jj];
        }
    }

    // Positive-diagonal convention.
    for (std::size_t j = 0; j < k && j < n; ++j) {
        if (r(j, j) < 0.0) {
            for (std::size_t col = j; col < k; ++col) r(j, col) = -r(j, col);
            for (double& x : q.col(j)) x = -x;
        }
    }

    DenseMatrix r_out(full ? n : k, k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i <= std::min(j, r_out.rows() - 1); ++i) r_out(i, j) = r(i, j);
    return {std::move(q), std::move(r_out)};
}

} // namespace detail

inline QrDecomposition qr(const DenseMatrix& m) {
    auto f = detail::householder_qr(m, /*full=*/false, /*check_rank=*/true);
    return {std::move(f.q), std::move(f.r)};
}

inline FullQrDecomposition qr_full(const DenseMatrix& m, bool check_rank = true) {
    return detail::householder_qr(m, /*full=*/true, check_rank);
}

/// True when QR succeeds with all diagonal pivots above the rank threshold.
inline bool has_full_column_rank(const DenseMatrix& m) {
    if (m.rows() < m.cols()) return false;
    try {
        (void)detail::householder_qr(m, false, true);
        return true;
    } catch (const std::runtime_error&) {
        return false;
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
inline DenseMatrix cholesky(const DenseMatrix& m) {
    require(m.rows() == m.cols(), "cholesky: matrix must be square");
    if (asymmetry(m) > tol::sym_check)
        numerical_error("cholesky: input is not symmetric");
    const std::size_t n = m.rows();
    DenseMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= 0.0) numerical_error("cholesky: matrix is not positive definite");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

/// Solve L y = b (forward substitution).
inline Vector solve_lower(const DenseMatrix& l, Vector b) {
    const std::size_t n = l.rows();
    require(b.size() == n, "solve_lower: dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
        b[i] = s / l(i, i);
    }
    return b;
}

/// Solve L^T x = y (backward substitution on the transpose).
inline Vector solve_lower_transposed(const DenseMatrix& l, Vector y) {
    const std::size_t n = l.rows();
    require(y.size() == n, "solve_lower_transposed: dimension mismatch");
    for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * y[k];
        y[i] = s / l(i, i);
    }
    return y;
}

/// Solve (L L^T) x = b from the Cholesky factor.
inline Vector cholesky_solve(const DenseMatrix& l, const Vector& b) {
    return solve_lower_transposed(l, solve_lower(l, b));
}

/// X = B * L^{-T}: solve X L^T = B column-recursively (L^T upper triangular).
inline DenseMatrix right_solve_lower_transposed(const DenseMatrix& b, const DenseMatrix& l) {
    require(b.cols() == l.rows(), "right_solve_lower_transposed: dimension mismatch");
    const std::size_t n = b.rows();
    const std::size_t m = b.cols();
    DenseMatrix x = b;
    for (std::size_t j = 0; j < m; ++j) {
        double* xj = x.col(j).data();
        for (std::size_t k = 0; k < j; ++k) {
            const double ukj = l(j, k); // (L^T)(k, j)
            if (ukj == 0.0) continue;
            const double* xk = x.col(k).data();
            for (std::size_t i = 0; i < n; ++i) xj[i] -= xk[i] * ukj;
        }
        const double d = l(j, j);
        for (std::size_t i = 0; i < n; ++i) xj[i] /= d;
    }
    return x;
}

/// Dense SPD solve via Cholesky (convenience for oracles and small systems).
inline Vector spd_solve(const DenseMatrix& a, const Vector& b) {
    return cholesky_solve(cholesky(a), b);
}

} // namespace deflatron
