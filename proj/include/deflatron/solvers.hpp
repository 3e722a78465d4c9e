#pragma once

#include <cmath>

#include "deflatron/projection.hpp"

namespace deflatron {

struct CgConfig {
    double tol_rel = 1e-6;  // stop when ||r_i||_2 <= tol_rel * ||b||_2
    std::size_t max_iter = 10000;
    bool record_history = true;

    void validate() const {
        require(tol_rel > 0.0 && tol_rel < 1.0, "CgConfig: tol_rel must lie in (0, 1)");
        require(max_iter >= 1, "CgConfig: max_iter must be >= 1");
    }
};

struct SolveReport {
    Vector x;
    std::size_t iterations = 0;
    std::vector<double> residual_history;
    std::size_t inner_iterations_total = 0;
    bool converged = false;
    double final_residual = 0.0;
};

/// Standard conjugate gradients (Hestenes-Stiefel) for SPD systems.
/// Positive definiteness is the caller's responsibility; a non-positive
/// search-direction curvature aborts with an error.
inline SolveReport cg(const SparseMatrix& a, const Vector& b, const Vector& x0,
                      const CgConfig& cfg) {
    cfg.validate();
    require(a.rows() == a.cols(), "cg: matrix must be square");
    require(b.size() == a.rows() && x0.size() == a.rows(), "cg: dimension mismatch");

    SolveReport rep;
    rep.x = x0;
    const double target = cfg.tol_rel * norm2(b);

    Vector r = spmv(a, rep.x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    double rho = dot(r, r);
    double rnorm = std::sqrt(rho);
    if (cfg.record_history) rep.residual_history.push_back(rnorm);
    if (rnorm <= target) {
        rep.converged = true;
        rep.final_residual = rnorm;
        return rep;
    }

    Vector p = r;
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        const Vector q = spmv(a, p);
        const double pq = dot(p, q);
        if (pq <= 0.0) numerical_error("cg: indefinite operator (non-positive curvature)");
        const double alpha = rho / pq;
        axpy(alpha, p, rep.x);
        axpy(-alpha, q, r);
        const double rho_next = dot(r, r);
        rnorm = std::sqrt(rho_next);
        rep.iterations = it;
        if (cfg.record_history) rep.residual_history.push_back(rnorm);
        if (rnorm <= target) {
            rep.converged = true;
            break;
        }
        const double beta = rho_next / rho;
        rho = rho_next;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    }
    rep.final_residual = rnorm;
    return rep;
}

/// Deflated CG: conjugate gradients applied to the consistent singular
/// system A (I - pi_A(S)) x_hat = (I - pi_A(S))^* b, with the projection
/// folded into every operator application (one spmv plus one coarse solve
/// per outer iteration) and the solution recovered at the end as
/// x = x_hat + V (V^T A V)^{-1} V^T (b - A x_hat).
///
/// The initial guess is shifted so the starting residual is orthogonal to
/// range(V). Folding the inner solve into the matrix-vector product keeps
/// the recurrence stable when the coarse solves are inexact: the inner error
/// enters the residual additively, which is what permits the relaxed
/// adaptive inner tolerance. Reported iterations count outer steps only;
/// inner_iterations_total aggregates coarse CG steps (zero for the direct
/// policy). The recorded residual norms equal the true residual of the
/// reconstructed iterate up to the inner-solve budget.
inline SolveReport deflated_cg(const SparseMatrix& a, const DeflationBasis& basis,
                               const CoarsePolicy& policy, const Vector& b, const Vector& x0,
                               const CgConfig& cfg) {
    cfg.validate();
    require(a.rows() == a.cols(), "deflated_cg: matrix must be square");
    require(b.size() == a.rows() && x0.size() == a.rows(), "deflated_cg: dimension mismatch");
    require(basis.ambient_dim() == a.rows(), "deflated_cg: basis/matrix mismatch");

    const SparseMatrix av = sparse_matmul(a, basis.matrix());
    const SparseMatrix av_t = sparse_transpose(av);
    const CoarseSolver coarse(sparse_symmetrize(sparse_matmul(basis.vt(), av)), policy);

    SolveReport rep;
    const double norm_b = norm2(b);
    const double epsilon = cfg.tol_rel * norm_b;
    // Boundary solves (initial shift, final reconstruction) feed straight
    // into the returned solution, so they run tighter than the per-iteration
    // rule by a fixed margin.
    const double boundary_tol = std::max(cfg.tol_rel * 1e-2, 1e-14);

    // x_hat0 = x0 + V (V^T A V)^{-1} V^T (b - A x0): the residual starts
    // orthogonal to range(V) and needs no initial projection.
    Vector x_hat = x0;
    Vector r = spmv(a, x_hat);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    {
        const auto shift = coarse.solve_tight(basis.apply_transposed(r), boundary_tol);
        rep.inner_iterations_total += shift.iterations;
        axpy(1.0, basis.apply(shift.z), x_hat);
        axpy(-1.0, spmv(av, shift.z), r);
    }

    double rho = dot(r, r);
    double rnorm = std::sqrt(rho);
    if (cfg.record_history) rep.residual_history.push_back(rnorm);
    Vector p = r;

    if (rnorm > epsilon) {
        for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
            // q = A (I - pi_A(S)) p
            Vector q = spmv(a, p);
            const auto z = coarse.solve(spmv(av_t, p), rnorm, epsilon);
            rep.inner_iterations_total += z.iterations;
            axpy(-1.0, spmv(av, z.z), q);

            const double pq = dot(p, q);
            if (pq <= 0.0)
                numerical_error(
                    "deflated_cg: indefinite deflated operator (non-positive curvature)");
            const double alpha = rho / pq;
            axpy(alpha, p, x_hat);
            axpy(-alpha, q, r);
            const double rho_next = dot(r, r);
            rnorm = std::sqrt(rho_next);
            rep.iterations = it;
            if (cfg.record_history) rep.residual_history.push_back(rnorm);
            if (rnorm <= epsilon) {
                rep.converged = true;
                break;
            }
            const double beta = rho_next / rho;
            rho = rho_next;
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        }
    } else {
        rep.converged = true;
    }

    // x = x_hat + V (V^T A V)^{-1} V^T (b - A x_hat)
    Vector residual = spmv(a, x_hat);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = b[i] - residual[i];
    const auto rec = coarse.solve_tight(basis.apply_transposed(residual), boundary_tol);
    rep.inner_iterations_total += rec.iterations;
    rep.x = x_hat;
    axpy(1.0, basis.apply(rec.z), rep.x);

    rep.final_residual = rnorm;
    return rep;
}

} // namespace deflatron
