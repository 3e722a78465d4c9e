#pragma once

#include <cstdint>

#include "deflatron/eig.hpp"
#include "deflatron/rng.hpp"
#include "deflatron/sparse.hpp"

namespace deflatron {

/// Discrete Laplacian from bi-linear quadratic finite elements on a uniform
/// grid of n_grid x n_grid interior points, Dirichlet boundary handled by
/// dropping out-of-grid stencil legs. Stencil:
///   [-1 -1 -1; -1 8 -1; -1 -1 -1]
struct GridProblem {
    std::size_t n_grid = 0;
    SparseMatrix matrix;

    std::size_t n() const { return n_grid * n_grid; }
};

inline GridProblem laplace_bilinear(std::size_t n_grid) {
    require(n_grid >= 3, "laplace_bilinear: grid size must be >= 3");
    const std::size_t n = n_grid * n_grid;
    std::vector<Triplet> t;
    t.reserve(9 * n);
    for (std::size_t i = 1; i <= n_grid; ++i) {
        for (std::size_t j = 1; j <= n_grid; ++j) {
            const std::size_t row = (i - 1) * n_grid + (j - 1);
            t.push_back({row, row, 8.0});
            for (int di = -1; di <= 1; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const long ni = static_cast<long>(i) + di;
                    const long nj = static_cast<long>(j) + dj;
                    if (ni < 1 || nj < 1 || ni > static_cast<long>(n_grid) ||
                        nj > static_cast<long>(n_grid))
                        continue;
                    const std::size_t col = (static_cast<std::size_t>(ni) - 1) * n_grid +
                                            (static_cast<std::size_t>(nj) - 1);
                    t.push_back({row, col, -1.0});
                }
            }
        }
    }
    return {n_grid, SparseMatrix::from_triplets(n, n, std::move(t), true)};
}

/// One-dimensional Laplacian tridiag(-1, 2, -1).
inline SparseMatrix laplace_1d(std::size_t n) {
    require(n >= 2, "laplace_1d: need n >= 2");
    std::vector<Triplet> t;
    t.reserve(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0});
        if (i + 1 < n) {
            t.push_back({i, i + 1, -1.0});
            t.push_back({i + 1, i, -1.0});
        }
    }
    return SparseMatrix::from_triplets(n, n, std::move(t), true);
}

enum class SpectrumFrame { diagonal, random_orthogonal };

/// SPD matrix with a prescribed spectrum, either diagonal or conjugated by a
/// seeded random orthogonal matrix.
struct SpectrumProblem {
    std::size_t n = 0;
    std::vector<double> eigenvalues;
    SpectrumFrame frame = SpectrumFrame::diagonal;
    std::uint64_t seed = 0;
    SparseMatrix matrix;
};

inline SpectrumProblem spectrum_matrix(std::size_t n, std::vector<double> eigenvalues,
                                       SpectrumFrame frame, std::uint64_t seed = 0) {
    require(n >= 1 && eigenvalues.size() == n, "spectrum_matrix: need n eigenvalues");
    for (double ev : eigenvalues)
        require(ev > 0.0, "spectrum_matrix: eigenvalues must be positive");

    SpectrumProblem prob;
    prob.n = n;
    prob.eigenvalues = std::move(eigenvalues);
    prob.frame = frame;
    prob.seed = seed;

    if (frame == SpectrumFrame::diagonal) {
        prob.matrix = SparseMatrix::diagonal(prob.eigenvalues);
        return prob;
    }

    Rng rng(seed);
    DenseMatrix g(n, n);
    for (double& x : g.data()) x = rng.normal();
    const DenseMatrix q = qr(g).q;
    DenseMatrix dq = q;
    for (std::size_t j = 0; j < n; ++j) {
        double* col = dq.col(j).data();
        for (std::size_t i = 0; i < n; ++i) col[i] *= prob.eigenvalues[i];
    }
    DenseMatrix m = matmul_tn(q, dq); // Q^T diag(ev) Q
    symmetrize(m);
    prob.matrix = SparseMatrix::from_dense(m, true);
    return prob;
}

/// Seeded right-hand side whose exact solution has unit Euclidean norm:
/// x_true is a normalized vector of standard normals, b = A x_true.
struct ProblemRhs {
    Vector x_true;
    Vector b;
};

inline ProblemRhs random_unit_solution_rhs(const SparseMatrix& a, std::uint64_t seed) {
    require(a.rows() == a.cols(), "random_unit_solution_rhs: matrix must be square");
    Rng rng(seed);
    Vector x = rng.normals(a.rows());
    const double nrm = norm2(x);
    require(nrm > 0.0, "random_unit_solution_rhs: degenerate sample");
    scale(x, 1.0 / nrm);
    Vector b = spmv(a, x);
    return {std::move(x), std::move(b)};
}

} // namespace deflatron
