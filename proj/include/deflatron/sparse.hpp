#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>

#include "deflatron/config.hpp"
#include "deflatron/core.hpp"
#include "deflatron/eig.hpp"
#include "deflatron/rng.hpp"

namespace deflatron {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix with sorted, duplicate-free column indices
/// per row. Matrices flagged symmetric store both triangles and are verified
/// to carry identical mirrored values at construction. Immutable after
/// construction.
class SparseMatrix {
public:
    SparseMatrix() = default;

    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                      std::vector<Triplet> entries, bool symmetric) {
        SparseMatrix m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.symmetric_ = symmetric;
        if (symmetric) require(rows == cols, "SparseMatrix: symmetric matrix must be square");

        std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
            return std::tie(a.row, a.col) < std::tie(b.row, b.col);
        });
        m.row_ptr_.assign(rows + 1, 0);
        m.col_idx_.reserve(entries.size());
        m.values_.reserve(entries.size());
        for (std::size_t e = 0; e < entries.size(); ++e) {
            const auto& t = entries[e];
            require(t.row < rows && t.col < cols, "SparseMatrix: index out of range");
            require(std::isfinite(t.value), "SparseMatrix: non-finite entry");
            if (e > 0 && entries[e - 1].row == t.row && entries[e - 1].col == t.col)
                require(false, "SparseMatrix: duplicate entry");
            ++m.row_ptr_[t.row + 1];
            m.col_idx_.push_back(t.col);
            m.values_.push_back(t.value);
        }
        for (std::size_t i = 0; i < rows; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
        if (symmetric) m.verify_symmetry();
        return m;
    }

    static SparseMatrix identity(std::size_t n) {
        std::vector<Triplet> t;
        t.reserve(n);
        for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
        return from_triplets(n, n, std::move(t), true);
    }

    static SparseMatrix diagonal(const Vector& d) {
        std::vector<Triplet> t;
        t.reserve(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
        return from_triplets(d.size(), d.size(), std::move(t), true);
    }

    static SparseMatrix from_dense(const DenseMatrix& d, bool symmetric, double drop_below = 0.0) {
        std::vector<Triplet> t;
        for (std::size_t j = 0; j < d.cols(); ++j)
            for (std::size_t i = 0; i < d.rows(); ++i)
                if (std::abs(d(i, j)) > drop_below) t.push_back({i, j, d(i, j)});
        return from_triplets(d.rows(), d.cols(), std::move(t), symmetric);
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }
    bool symmetric() const { return symmetric_; }

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }

    double at(std::size_t i, std::size_t j) const {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
            if (col_idx_[p] == j) return values_[p];
        return 0.0;
    }

    DenseMatrix dense() const {
        DenseMatrix d(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
                d(i, col_idx_[p]) = values_[p];
        return d;
    }

    double max_abs_row_sum() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += std::abs(values_[p]);
            worst = std::max(worst, s);
        }
        return worst;
    }

private:
    void verify_symmetry() const {
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
                const std::size_t j = col_idx_[p];
                if (j == i) continue;
                // binary search row j for column i
                const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j]);
                const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j + 1]);
                const auto it = std::lower_bound(begin, end, i);
                require(it != end && *it == i, "SparseMatrix: missing mirrored entry");
                const std::size_t q = static_cast<std::size_t>(it - col_idx_.begin());
                require(values_[q] == values_[p], "SparseMatrix: asymmetric values");
            }
        }
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
    bool symmetric_ = false;
};

/// y = A x as the plain CSR sum, ascending column index within each row.
inline Vector spmv(const SparseMatrix& a, const Vector& x) {
    require(x.size() == a.cols(), "spmv: dimension mismatch");
    Vector y(a.rows());
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_idx();
    const auto& v = a.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) s += v[p] * x[ci[p]];
        y[i] = s;
    }
    return y;
}

/// Y = A X for dense X, one CSR pass per column.
inline DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& x) {
    require(x.rows() == a.cols(), "spmm: dimension mismatch");
    DenseMatrix y(a.rows(), x.cols());
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_idx();
    const auto& v = a.values();
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const double* xj = x.col(j).data();
        double* yj = y.col(j).data();
        for (std::size_t i = 0; i < a.rows(); ++i) {
            double s = 0.0;
            for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) s += v[p] * xj[ci[p]];
            yj[i] = s;
        }
    }
    return y;
}

inline SparseMatrix sparse_transpose(const SparseMatrix& a) {
    std::vector<Triplet> t;
    t.reserve(a.nnz());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p)
            t.push_back({a.col_idx()[p], i, a.values()[p]});
    return SparseMatrix::from_triplets(a.cols(), a.rows(), std::move(t), false);
}

/// C = A B by row merging with a dense scratch accumulator. Deterministic:
/// accumulation follows the fixed CSR traversal order, output columns sorted.
inline SparseMatrix sparse_matmul(const SparseMatrix& a, const SparseMatrix& b) {
    require(a.cols() == b.rows(), "sparse_matmul: dimension mismatch");
    std::vector<Triplet> out;
    std::vector<double> acc(b.cols(), 0.0);
    std::vector<std::ptrdiff_t> marker(b.cols(), -1);
    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        touched.clear();
        for (std::size_t p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
            const std::size_t k = a.col_idx()[p];
            const double aik = a.values()[p];
            for (std::size_t q = b.row_ptr()[k]; q < b.row_ptr()[k + 1]; ++q) {
                const std::size_t j = b.col_idx()[q];
                if (marker[j] != static_cast<std::ptrdiff_t>(i)) {
                    marker[j] = static_cast<std::ptrdiff_t>(i);
                    touched.push_back(j);
                }
                acc[j] += aik * b.values()[q];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (std::size_t j : touched) {
            out.push_back({i, j, acc[j]});
            acc[j] = 0.0;
        }
    }
    return SparseMatrix::from_triplets(a.rows(), b.cols(), std::move(out), false);
}

/// Exact symmetrization (M + M^T)/2, flagged symmetric.
inline SparseMatrix sparse_symmetrize(const SparseMatrix& m) {
    require(m.rows() == m.cols(), "sparse_symmetrize: matrix must be square");
    const SparseMatrix mt = sparse_transpose(m);
    std::vector<Triplet> t;
    t.reserve(m.nnz());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::size_t p = m.row_ptr()[i];
        std::size_t q = mt.row_ptr()[i];
        const std::size_t pe = m.row_ptr()[i + 1];
        const std::size_t qe = mt.row_ptr()[i + 1];
        while (p < pe || q < qe) {
            std::size_t cp = p < pe ? m.col_idx()[p] : m.cols();
            std::size_t cq = q < qe ? mt.col_idx()[q] : m.cols();
            if (cp == cq) {
                t.push_back({i, cp, 0.5 * (m.values()[p] + mt.values()[q])});
                ++p;
                ++q;
            } else if (cp < cq) {
                t.push_back({i, cp, 0.5 * m.values()[p]});
                ++p;
            } else {
                t.push_back({i, cq, 0.5 * mt.values()[q]});
                ++q;
            }
        }
    }
    return SparseMatrix::from_triplets(m.rows(), m.cols(), std::move(t), true);
}

/// <A u, v>, the A-inner product for self-adjoint A.
inline double a_dot(const SparseMatrix& a, const Vector& u, const Vector& v) {
    require(u.size() == a.cols() && v.size() == a.rows(), "a_dot: dimension mismatch");
    return dot(spmv(a, u), v);
}

inline double a_norm(const SparseMatrix& a, const Vector& v) {
    const double q = a_dot(a, v, v);
    if (q < 0.0) {
        const double slack = tol::psd_slack * std::max(1.0, a.max_abs_row_sum()) * dot(v, v);
        if (q < -slack) numerical_error("a_norm: negative quadratic form (input not SPD)");
        return 0.0;
    }
    return std::sqrt(q);
}

/// Probabilistic SPD check: k seeded random unit vectors must give a positive
/// quadratic form; at dense-checkable sizes the smallest eigenvalue must be
/// positive as well. Returns false instead of throwing.
inline bool assert_spd_sample(const SparseMatrix& a, std::size_t k, std::uint64_t seed) {
    require(k >= 1, "assert_spd_sample: k must be >= 1");
    if (a.rows() != a.cols() || !a.symmetric()) return false;
    const std::size_t n = a.rows();
    if (n == 0) return false;
    Rng rng(seed);
    for (std::size_t trial = 0; trial < k; ++trial) {
        Vector v = rng.normals(n);
        const double nrm = norm2(v);
        if (nrm == 0.0) continue;
        scale(v, 1.0 / nrm);
        if (a_dot(a, v, v) <= 0.0) return false;
    }
    if (n <= spd_dense_check_limit) {
        const EigenDecomposition eig = sym_eig(a.dense());
        if (eig.values.back() <= 0.0) return false;
    }
    return true;
}

} // namespace deflatron
