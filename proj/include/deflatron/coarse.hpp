#pragma once

#include <cmath>
#include <limits>

#include "deflatron/eig.hpp"
#include "deflatron/sparse.hpp"

namespace deflatron {

/// Accuracy policy for solves with the coarse operator V^T A V.
///   direct           — dense Cholesky, factored once (m <= 4000)
///   inner_cg_fixed   — CG to a fixed relative tolerance tau_c
///   inner_cg_adaptive— CG with tau_c = c * max(eps / |r_i|, eps), where
///                      |r_i| is the current outer residual norm and eps the
///                      absolute outer target.
struct CoarsePolicy {
    enum class Kind { direct, inner_cg_fixed, inner_cg_adaptive };

    Kind kind = Kind::direct;
    double fixed_tol = 1e-12;
    double adaptive_c = 1.0;
    std::size_t max_inner_iter = 200000;

    static CoarsePolicy direct() { return {Kind::direct, 0.0, 0.0, 0}; }
    static CoarsePolicy fixed(double tau_c) {
        require(tau_c > 0.0, "CoarsePolicy: fixed tolerance must be positive");
        return {Kind::inner_cg_fixed, tau_c, 0.0, 200000};
    }
    static CoarsePolicy adaptive(double c = 1.0) {
        require(c > 0.0 && c <= 1.0, "CoarsePolicy: adaptive constant must be in (0, 1]");
        return {Kind::inner_cg_adaptive, 0.0, c, 200000};
    }
};

inline constexpr std::size_t direct_coarse_limit = 4000;

/// A CoarsePolicy bound to a concrete coarse operator. Immutable after
/// construction; solve() is const and returns the inner iteration count so
/// callers can aggregate statistics.
class CoarseSolver {
public:
    struct Result {
        Vector z;
        std::size_t iterations = 0;
    };

    CoarseSolver(SparseMatrix coarse_op, CoarsePolicy policy)
        : op_(std::move(coarse_op)), policy_(policy) {
        require(op_.rows() == op_.cols(), "CoarseSolver: coarse operator must be square");
        if (policy_.kind == CoarsePolicy::Kind::direct) {
            require(op_.rows() <= direct_coarse_limit,
                    "CoarseSolver: direct policy limited to m <= 4000");
            factor_ = cholesky(op_.dense());
        }
    }

    std::size_t dim() const { return op_.rows(); }
    const SparseMatrix& op() const { return op_; }
    const CoarsePolicy& policy() const { return policy_; }

    /// Solve inside an outer iteration with residual norm `outer_residual_norm`
    /// and absolute outer target `epsilon`.
    Result solve(const Vector& rhs, double outer_residual_norm, double epsilon) const {
        switch (policy_.kind) {
        case CoarsePolicy::Kind::direct:
            return {cholesky_solve(factor_, rhs), 0};
        case CoarsePolicy::Kind::inner_cg_fixed:
            return inner_cg(rhs, policy_.fixed_tol);
        case CoarsePolicy::Kind::inner_cg_adaptive:
            return inner_cg(rhs, adaptive_tolerance(outer_residual_norm, epsilon));
        }
        numerical_error("CoarseSolver: unknown policy");
    }

    /// Solve outside an outer iteration (setup, projections). Iterative
    /// policies fall back to a tight setup tolerance.
    Result solve(const Vector& rhs) const {
        switch (policy_.kind) {
        case CoarsePolicy::Kind::direct:
            return {cholesky_solve(factor_, rhs), 0};
        case CoarsePolicy::Kind::inner_cg_fixed:
            return inner_cg(rhs, policy_.fixed_tol);
        case CoarsePolicy::Kind::inner_cg_adaptive:
            return inner_cg(rhs, policy_.adaptive_c * tol::coarse_setup);
        }
        numerical_error("CoarseSolver: unknown policy");
    }

    /// Solve to an explicit relative tolerance regardless of the policy's
    /// per-iteration rule (setup and reconstruction solves, whose accuracy
    /// enters the final residual directly). The direct policy stays exact;
    /// the fixed policy never loosens below its declared tolerance.
    Result solve_tight(const Vector& rhs, double rel_tol) const {
        switch (policy_.kind) {
        case CoarsePolicy::Kind::direct:
            return {cholesky_solve(factor_, rhs), 0};
        case CoarsePolicy::Kind::inner_cg_fixed:
            return inner_cg(rhs, std::min(policy_.fixed_tol, rel_tol));
        case CoarsePolicy::Kind::inner_cg_adaptive:
            return inner_cg(rhs, rel_tol);
        }
        numerical_error("CoarseSolver: unknown policy");
    }

    double adaptive_tolerance(double outer_residual_norm, double epsilon) const {
        return policy_.adaptive_c *
               std::max(epsilon / std::max(outer_residual_norm,
                                           std::numeric_limits<double>::min()),
                        epsilon);
    }

private:
    /// Plain CG on the coarse operator; stops on the recursively updated
    /// residual. Exhausting the iteration cap throws: a silently inaccurate
    /// coarse solve would poison the outer Krylov space.
    Result inner_cg(const Vector& rhs, double rel_tol) const {
        const std::size_t m = op_.rows();
        require(rhs.size() == m, "CoarseSolver: rhs dimension mismatch");
        rel_tol = std::max(rel_tol, 1e-15);
        const double norm_rhs = norm2(rhs);
        Vector z(m, 0.0);
        if (norm_rhs == 0.0) return {z, 0};
        const double target = rel_tol * norm_rhs;

        Vector r = rhs;
        Vector p = r;
        double rho = dot(r, r);
        if (std::sqrt(rho) <= target) return {z, 0};
        for (std::size_t it = 1; it <= policy_.max_inner_iter; ++it) {
            const Vector q = spmv(op_, p);
            const double pq = dot(p, q);
            if (pq <= 0.0) numerical_error("CoarseSolver: coarse operator not positive definite");
            const double alpha = rho / pq;
            axpy(alpha, p, z);
            axpy(-alpha, q, r);
            const double rho_next = dot(r, r);
            if (std::sqrt(rho_next) <= target) return {z, it};
            const double beta = rho_next / rho;
            rho = rho_next;
            for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
        }
        numerical_error("CoarseSolver: inner iteration cap exhausted");
    }

    SparseMatrix op_;
    CoarsePolicy policy_;
    DenseMatrix factor_;
};

} // namespace deflatron
