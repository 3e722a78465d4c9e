#pragma once

#include <cstddef>
#include <cstdlib>
#include <string>

namespace deflatron {

/// Numerical tolerances used across the library. Collected in one place so
/// that every hard-coded threshold is visible and documented.
namespace tol {

// Jacobi eigensolver: stop when off-diagonal Frobenius mass drops below
// this fraction of ||M||_F.
inline constexpr double eig_offdiag = 1e-12;
// Hard cap on Jacobi sweeps.
inline constexpr int eig_max_sweeps = 100;
// Relative symmetry check on dense inputs (sym_eig, cholesky).
inline constexpr double sym_check = 1e-10;
// Rank threshold for QR: |r_ii| <= rank_rel * max column norm fails.
inline constexpr double rank_rel = 1e-10;
// Negative quadratic-form slack before a_norm reports a non-SPD input.
inline constexpr double psd_slack = 1e-12;
// deflated_spectrum zero classification: declared zeros must lie below
// zero_upper * mu_1 and the kept values above nonzero_lower * mu_1.
inline constexpr double zero_upper = 1e-8;
inline constexpr double nonzero_lower = 1e-6;
// Residual slack budget for the deflated solver (inner inexactness).
inline constexpr double deflated_residual_slack = 10.0;
// Relative tolerance used for coarse solves issued outside an outer
// iteration (setup / projection context) by iterative policies.
inline constexpr double coarse_setup = 1e-12;

} // namespace tol

/// Matrices at or below this size admit a dense eigenvalue check in
/// assert_spd_sample; above it the check is sampling-only.
inline constexpr std::size_t spd_dense_check_limit = 2000;

/// Dense-analysis size cap (rows of the system matrix). The analysis
/// toolkit refuses larger inputs. Overridable via DEFLATRON_DENSE_LIMIT.
inline std::size_t dense_limit() {
    static const std::size_t cached = [] {
        if (const char* env = std::getenv("DEFLATRON_DENSE_LIMIT")) {
            const long v = std::atol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        }
        return std::size_t{4000};
    }();
    return cached;
}

} // namespace deflatron
