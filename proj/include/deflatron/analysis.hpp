#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "deflatron/config.hpp"
#include "deflatron/eig.hpp"
#include "deflatron/projection.hpp"
#include "deflatron/sparse.hpp"
#include "deflatron/subspaces.hpp"

namespace deflatron {

/// All constants of the convergence theory for one (A, S) pair, computed
/// densely. `bound` is K / (1 - gamma) and must dominate kappa_eff.
struct BoundReport {
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    double kappa = 0.0;
    double mu_1 = 0.0;
    double mu_ell = 0.0;
    double kappa_eff = 0.0;
    double K = 0.0;
    double gamma = 0.0;
    double xi = 0.0;
    double bound = 0.0;
    std::size_t rank_deficiency = 0;
};

struct DeflatedSpectrum {
    std::vector<double> values; // descending, length n
    std::size_t rank_deficiency = 0;

    double mu_1() const { return values.front(); }
    double mu_ell() const { return values[values.size() - rank_deficiency - 1]; }
    double kappa_eff() const { return mu_1() / mu_ell(); }
};

namespace detail {

inline void check_dense_scale(std::size_t n, const char* who) {
    if (n > dense_limit()) {
        std::ostringstream os;
        os << who << ": dense analysis limited to n <= " << dense_limit() << " (got " << n
           << "); raise DEFLATRON_DENSE_LIMIT to override";
        numerical_error(os.str());
    }
}

/// A-orthonormalize the columns of u: return u * L^{-T} for the Cholesky
/// factor L of u^T A u.
inline DenseMatrix a_orthonormalize(const SparseMatrix& a, const DenseMatrix& u) {
    DenseMatrix gram = matmul_tn(u, spmm(a, u));
    symmetrize(gram);
    return right_solve_lower_transposed(u, cholesky(gram));
}

/// Largest singular value of U~^T A V~ for A-orthonormal bases U~ of the
/// Euclidean complement of S and V~ of S: the cosine of the smallest
/// principal angle between the two spaces in the A geometry.
inline double cbs_sigma_max(const SparseMatrix& a, const DeflationBasis& basis) {
    const std::size_t n = a.rows();
    const std::size_t m = basis.dim();
    const FullQrDecomposition f = qr_full(basis.dense());
    const DenseMatrix q1 = f.q.slice_cols(0, m);
    const DenseMatrix w = f.q.slice_cols(m, n - m);
    const DenseMatrix u_tilde = a_orthonormalize(a, w);
    const DenseMatrix v_tilde = a_orthonormalize(a, q1);
    const DenseMatrix cross = matmul_tn(u_tilde, spmm(a, v_tilde));
    const auto sv = svd_values(cross);
    return sv.empty() ? 0.0 : sv.front();
}

} // namespace detail

/// Eigenvalues of the deflated operator A (I - pi_A(S)), assembled densely in
/// its symmetric form A - AV (V^T A V)^{-1} (AV)^T. Exactly dim(S) of them
/// must classify as zero; the classification is validated by a gap test and
/// ambiguity is an error.
inline DeflatedSpectrum deflated_spectrum(const SparseMatrix& a, const DeflationBasis& basis) {
    const std::size_t n = a.rows();
    const std::size_t m = basis.dim();
    require(basis.ambient_dim() == n, "deflated_spectrum: basis dimension mismatch");
    detail::check_dense_scale(n, "deflated_spectrum");

    const DenseMatrix av = spmm(a, basis.dense());
    DenseMatrix coarse = matmul_tn(basis.dense(), av);
    symmetrize(coarse);
    const DenseMatrix l = cholesky(coarse);
    // S = L^{-1} (AV)^T, so that AV C^{-1} (AV)^T = S^T S.
    DenseMatrix s = transpose(av);
    for (std::size_t j = 0; j < s.cols(); ++j) {
        Vector col = s.col_vector(j);
        col = solve_lower(l, col);
        std::copy(col.begin(), col.end(), s.col(j).begin());
    }
    DenseMatrix deflated = add_scaled(a.dense(), -1.0, matmul_tn(s, s));
    symmetrize(deflated);

    EigenDecomposition eig = sym_eig(deflated);
    DeflatedSpectrum out;
    out.values = std::move(eig.values);
    out.rank_deficiency = m;

    std::vector<std::size_t> by_magnitude(n);
    for (std::size_t i = 0; i < n; ++i) by_magnitude[i] = i;
    std::stable_sort(by_magnitude.begin(), by_magnitude.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(out.values[x]) < std::abs(out.values[y]);
    });
    const double mu1 = out.values.front();
    double zero_max = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        zero_max = std::max(zero_max, std::abs(out.values[by_magnitude[i]]));
    double kept_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = m; i < n; ++i) kept_min = std::min(kept_min, out.values[by_magnitude[i]]);
    if (!(zero_max < tol::zero_upper * mu1 && kept_min > tol::nonzero_lower * mu1)) {
        std::ostringstream os;
        os << "deflated_spectrum: ambiguous zero classification (largest declared zero "
           << zero_max << ", smallest kept " << kept_min << ", mu_1 " << mu1 << ")";
        numerical_error(os.str());
    }
    return out;
}

/// Smallest constant of the weak approximation property,
/// K = ||A||_2 * || W W^T Q Lambda^{-1/2} ||_2^2 for an orthonormal basis W
/// of the complement of S. Since W has orthonormal columns this equals
/// ||A||_2 * || W^T Q Lambda^{-1/2} ||_2^2.
inline double compute_K(const SparseMatrix& a, const DeflationBasis& basis,
                        const EigenDecomposition& eig_a) {
    const std::size_t n = a.rows();
    const std::size_t m = basis.dim();
    detail::check_dense_scale(n, "compute_K");
    if (eig_a.values.back() <= 0.0) numerical_error("compute_K: matrix is not positive definite");

    const FullQrDecomposition f = qr_full(basis.dense());
    const DenseMatrix w = f.q.slice_cols(m, n - m);
    DenseMatrix scaled = eig_a.vectors; // Q Lambda^{-1/2}
    for (std::size_t j = 0; j < n; ++j) {
        const double s = 1.0 / std::sqrt(eig_a.values[j]);
        for (double& x : scaled.col(j)) x *= s;
    }
    const double sigma = spectral_norm(matmul_tn(w, scaled));
    return eig_a.values.front() * sigma * sigma;
}

inline double compute_K(const SparseMatrix& a, const DeflationBasis& basis) {
    detail::check_dense_scale(a.rows(), "compute_K");
    return compute_K(a, basis, sym_eig(a.dense()));
}

/// Smallest constant of the strengthened Cauchy-Schwarz inequality between
/// the Euclidean complement of S and S in the A-inner product.
inline double compute_gamma(const SparseMatrix& a, const DeflationBasis& basis) {
    detail::check_dense_scale(a.rows(), "compute_gamma");
    return detail::cbs_sigma_max(a, basis);
}

/// A-invariance measure xi = min over the complement of
/// ||x - pi_A(S) x||_A^2 / ||x||_A^2 = 1 - sigma_max^2.
inline double compute_xi(const SparseMatrix& a, const DeflationBasis& basis) {
    detail::check_dense_scale(a.rows(), "compute_xi");
    const double sigma = detail::cbs_sigma_max(a, basis);
    return 1.0 - sigma * sigma;
}

/// Assemble every constant and validate the relations the theory guarantees.
inline BoundReport bound_report(const SparseMatrix& a, const DeflationBasis& basis) {
    const std::size_t n = a.rows();
    require(a.cols() == n, "bound_report: matrix must be square");
    require(basis.ambient_dim() == n, "bound_report: basis dimension mismatch");
    detail::check_dense_scale(n, "bound_report");

    const EigenDecomposition eig_a = sym_eig(a.dense());
    if (eig_a.values.back() <= 0.0)
        numerical_error("bound_report: matrix is not positive definite");

    BoundReport rep;
    rep.lambda_max = eig_a.values.front();
    rep.lambda_min = eig_a.values.back();
    rep.kappa = rep.lambda_max / rep.lambda_min;

    const DeflatedSpectrum spectrum = deflated_spectrum(a, basis);
    rep.mu_1 = spectrum.mu_1();
    rep.mu_ell = spectrum.mu_ell();
    rep.kappa_eff = spectrum.kappa_eff();
    rep.rank_deficiency = spectrum.rank_deficiency;

    rep.K = compute_K(a, basis, eig_a);
    const double sigma = detail::cbs_sigma_max(a, basis);
    rep.gamma = sigma;
    rep.xi = 1.0 - sigma * sigma;
    rep.bound = rep.K / (1.0 - rep.gamma);

    std::ostringstream bad;
    if (!(rep.gamma >= 0.0 && rep.gamma < 1.0)) bad << " gamma=" << rep.gamma;
    if (!(rep.xi > 0.0 && rep.xi <= 1.0 + 1e-12)) bad << " xi=" << rep.xi;
    if (!(rep.xi >= (1.0 - rep.gamma) - 1e-9)) bad << " xi<1-gamma";
    if (!(rep.kappa_eff <= rep.bound * (1.0 + 1e-6)))
        bad << " kappa_eff=" << rep.kappa_eff << ">bound=" << rep.bound;
    if (!(rep.mu_1 <= rep.lambda_max * (1.0 + 1e-10))) bad << " mu_1>lambda_max";
    if (rep.rank_deficiency != basis.dim()) bad << " rank_deficiency";
    if (!bad.str().empty())
        numerical_error("bound_report: theory invariant violated:" + bad.str());
    rep.xi = std::min(rep.xi, 1.0);
    return rep;
}

/// Effective-condition-number estimate under an orthonormal-basis
/// perturbation of size delta:
///   [sqrt(k_opt) + sqrt(k)(2d + d^2)]^2 (1 - sqrt(k) d)^2 / (1 - 4 sqrt(k) d)
/// Only defined for sqrt(kappa) * delta < 1/4.
inline double perturbation_estimate(double kappa, double kappa_opt, double delta) {
    require(kappa >= 1.0 && kappa_opt >= 1.0, "perturbation_estimate: condition numbers >= 1");
    require(delta >= 0.0, "perturbation_estimate: delta must be >= 0");
    const double sk = std::sqrt(kappa);
    if (!(sk * delta < 0.25))
        numerical_error("perturbation_estimate: hypothesis sqrt(kappa)*delta < 1/4 violated");
    const double num = std::pow(std::sqrt(kappa_opt) + sk * (2.0 * delta + delta * delta), 2) *
                       std::pow(1.0 - sk * delta, 2);
    return num / (1.0 - 4.0 * sk * delta);
}

/// One row of a perturbation sweep. Quantities whose hypothesis fails are
/// quiet NaNs.
struct SweepRecord {
    double e1_frob = 0.0;
    double delta_measured = std::numeric_limits<double>::quiet_NaN();
    double delta_bound = std::numeric_limits<double>::quiet_NaN();
    double kappa_eff_actual = std::numeric_limits<double>::quiet_NaN();
    double kappa_eff_estimate = std::numeric_limits<double>::quiet_NaN();
    double kappa_opt = 0.0;
};

struct PerturbationSweep {
    std::vector<SweepRecord> records;
    double kappa = 0.0;
    double kappa_opt = 0.0;

    void validate() const {
        for (std::size_t i = 1; i < records.size(); ++i)
            require(records[i - 1].e1_frob <= records[i].e1_frob,
                    "PerturbationSweep: records must be sorted by e1_frob");
        for (const auto& r : records) {
            if (std::isfinite(r.kappa_eff_estimate) && std::isfinite(r.kappa_eff_actual) &&
                !(r.kappa_eff_estimate >= r.kappa_eff_actual * (1.0 - 1e-12)))
                numerical_error("PerturbationSweep: estimate fell below the actual value");
        }
    }
};

/// Sweep over perturbation magnitudes of the deflation space spanned by the
/// n-k trailing eigenvectors: per magnitude the measured basis perturbation
/// delta, its Frobenius bound, the actual effective condition number, and the
/// estimate evaluated at the measured delta.
inline PerturbationSweep perturbation_sweep(const SparseMatrix& a, const EigenDecomposition& eig,
                                            std::size_t k, const DenseMatrix& direction,
                                            std::vector<double> magnitudes) {
    const std::size_t n = a.rows();
    detail::check_dense_scale(n, "perturbation_sweep");
    require(k >= 1 && k < n, "perturbation_sweep: need 1 <= k < n");
    require(direction.rows() == n && direction.cols() == n - k,
            "perturbation_sweep: direction shape mismatch");
    std::sort(magnitudes.begin(), magnitudes.end());

    PerturbationSweep sweep;
    sweep.kappa = eig.values.front() / eig.values.back();
    sweep.kappa_opt = eig.values.front() / eig.values[k - 1];

    // Reordered unitary [Q_1 | Q_2]: deflated block first.
    DenseMatrix q(n, n);
    for (std::size_t j = 0; j < n - k; ++j) {
        auto src = eig.vectors.col(k + j);
        std::copy(src.begin(), src.end(), q.col(j).begin());
    }
    for (std::size_t j = 0; j < k; ++j) {
        auto src = eig.vectors.col(j);
        std::copy(src.begin(), src.end(), q.col(n - k + j).begin());
    }
    const DenseMatrix q1 = q.slice_cols(0, n - k);

    for (double mag : magnitudes) {
        require(mag >= 0.0, "perturbation_sweep: magnitudes must be >= 0");
        SweepRecord rec;
        DenseMatrix e1 = direction;
        for (double& x : e1.data()) x *= mag;
        rec.e1_frob = frobenius_norm(e1);
        rec.kappa_opt = sweep.kappa_opt;

        const double e1_spectral = spectral_norm(e1);
        if (e1_spectral < 1.0) {
            const OrthonormalCompletion comp = orthonormal_completion(q, n - k, e1);
            rec.delta_measured = comp.delta;
            rec.delta_bound = (1.0 + std::numbers::sqrt2) / (1.0 - e1_spectral) * rec.e1_frob;
            if (std::sqrt(sweep.kappa) * comp.delta < 0.25)
                rec.kappa_eff_estimate =
                    perturbation_estimate(sweep.kappa, sweep.kappa_opt, comp.delta);
        }

        const DeflationBasis basis(add_scaled(q1, 1.0, e1), Provenance::perturbed_eigen);
        rec.kappa_eff_actual = deflated_spectrum(a, basis).kappa_eff();
        sweep.records.push_back(rec);
    }
    sweep.validate();
    return sweep;
}

/// Worst-case A-norm error reduction factor of CG after i steps on an
/// operator with effective condition number kappa_eff.
inline double error_bound_factor(double kappa_eff, std::size_t i) {
    const double s = std::sqrt(kappa_eff);
    return 2.0 * std::pow((s - 1.0) / (s + 1.0), static_cast<double>(i));
}

} // namespace deflatron
