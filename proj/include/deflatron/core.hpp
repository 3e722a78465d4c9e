#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace deflatron {

using Vector = std::vector<double>;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

[[noreturn]] inline void numerical_error(const std::string& msg) {
    throw std::runtime_error(msg);
}

/// Euclidean inner product, fixed left-to-right summation order.
inline double dot(const Vector& u, const Vector& v) {
    require(u.size() == v.size(), "dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

inline double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

/// y += a * x
inline void axpy(double a, const Vector& x, Vector& y) {
    require(x.size() == y.size(), "axpy: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void scale(Vector& v, double a) {
    for (auto& x : v) x *= a;
}

inline bool all_finite(const Vector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Column-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static DenseMatrix diagonal(const Vector& d) {
        DenseMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    static DenseMatrix from_columns(const std::vector<Vector>& cols) {
        require(!cols.empty(), "from_columns: no columns");
        DenseMatrix m(cols.front().size(), cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) {
            require(cols[j].size() == m.rows_, "from_columns: ragged columns");
            std::copy(cols[j].begin(), cols[j].end(), m.col(j).begin());
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i + j * rows_]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i + j * rows_]; }

    std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

    Vector col_vector(std::size_t j) const {
        auto c = col(j);
        return Vector(c.begin(), c.end());
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    /// Columns [first, first+count) as a new matrix.
    DenseMatrix slice_cols(std::size_t first, std::size_t count) const {
        require(first + count <= cols_, "slice_cols: out of range");
        DenseMatrix out(rows_, count);
        std::copy(data_.begin() + static_cast<std::ptrdiff_t>(first * rows_),
                  data_.begin() + static_cast<std::ptrdiff_t>((first + count) * rows_),
                  out.data_.begin());
        return out;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline DenseMatrix transpose(const DenseMatrix& m) {
    DenseMatrix t(m.cols(), m.rows());
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) t(j, i) = m(i, j);
    return t;
}

/// C = A * B, column-major saxpy form (contiguous inner loops).
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.cols() == b.rows(), "matmul: dimension mismatch");
    DenseMatrix c(a.rows(), b.cols());
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < b.cols(); ++j) {
        double* cj = c.col(j).data();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double bkj = b(k, j);
            if (bkj == 0.0) continue;
            const double* ak = a.col(k).data();
            for (std::size_t i = 0; i < n; ++i) cj[i] += ak[i] * bkj;
        }
    }
    return c;
}

/// C = A^T * B without forming the transpose (dot products over columns).
inline DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.rows() == b.rows(), "matmul_tn: dimension mismatch");
    DenseMatrix c(a.cols(), b.cols());
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < b.cols(); ++j) {
        const double* bj = b.col(j).data();
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double* ai = a.col(i).data();
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += ai[k] * bj[k];
            c(i, j) = s;
        }
    }
    return c;
}

inline Vector matvec(const DenseMatrix& a, const Vector& x) {
    require(x.size() == a.cols(), "matvec: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        const double* aj = a.col(j).data();
        for (std::size_t i = 0; i < a.rows(); ++i) y[i] += aj[i] * xj;
    }
    return y;
}

inline Vector matvec_t(const DenseMatrix& a, const Vector& x) {
    require(x.size() == a.rows(), "matvec_t: dimension mismatch");
    Vector y(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double* aj = a.col(j).data();
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += aj[i] * x[i];
        y[j] = s;
    }
    return y;
}

inline double frobenius_norm(const DenseMatrix& m) {
    double s = 0.0;
    for (double x : m.data()) s += x * x;
    return std::sqrt(s);
}

inline double max_abs(const DenseMatrix& m) {
    double s = 0.0;
    for (double x : m.data()) s = std::max(s, std::abs(x));
    return s;
}

inline DenseMatrix add_scaled(const DenseMatrix& a, double alpha, const DenseMatrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "add_scaled: shape mismatch");
    DenseMatrix c = a;
    for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] += alpha * b.data()[i];
    return c;
}

/// Largest |a_ij - a_ji| relative to the largest entry.
inline double asymmetry(const DenseMatrix& m) {
    double worst = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < j; ++i) worst = std::max(worst, std::abs(m(i, j) - m(j, i)));
    const double scale = max_abs(m);
    return scale > 0.0 ? worst / scale : worst;
}

inline void symmetrize(DenseMatrix& m) {
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < j; ++i) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = v;
            m(j, i) = v;
        }
}

} // namespace deflatron
