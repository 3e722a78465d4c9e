#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "deflatron/analysis.hpp"
#include "deflatron/matrix_market.hpp"
#include "deflatron/problems.hpp"
#include "deflatron/serialize.hpp"
#include "deflatron/solvers.hpp"
#include "deflatron/subspaces.hpp"

namespace deflatron {

/// Parse "direct" | "fixed:<tau_c>" | "adaptive:<c>".
inline CoarsePolicy parse_inner_policy(const std::string& s) {
    if (s == "direct") return CoarsePolicy::direct();
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
        const std::string kind = s.substr(0, colon);
        const std::string arg = s.substr(colon + 1);
        try {
            if (kind == "fixed") return CoarsePolicy::fixed(std::stod(arg));
            if (kind == "adaptive") return CoarsePolicy::adaptive(std::stod(arg));
        } catch (const std::logic_error&) {
            // fall through to the usage error below
        }
    } else if (s == "adaptive") {
        return CoarsePolicy::adaptive(1.0);
    }
    require(false, "inner policy must be direct, fixed:<tau_c> or adaptive:<c>");
    return CoarsePolicy::direct(); // unreachable
}

inline std::string inner_policy_name(const CoarsePolicy& p) {
    switch (p.kind) {
    case CoarsePolicy::Kind::direct: return "direct";
    case CoarsePolicy::Kind::inner_cg_fixed: return "fixed:" + format_number(p.fixed_tol, 6);
    case CoarsePolicy::Kind::inner_cg_adaptive:
        return "adaptive:" + format_number(p.adaptive_c, 6);
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Grid-scaling experiment: deflated CG iteration counts on the bi-linear
// Laplacian with the full-coarsening direct-interpolation subspace,
// N = 2^p - 1.
// ---------------------------------------------------------------------------

struct Table1Config {
    int p_min = 4;
    int p_max = 9;
    double tol = 1e-6;
    CoarsePolicy policy = CoarsePolicy::adaptive(1.0);
    std::uint64_t seed = 1;
    std::size_t max_iter = 10000;
};

struct Table1Row {
    int p = 0;
    std::size_t n_grid = 0;
    std::size_t n = 0;
    std::size_t iterations = 0;
    double final_residual = 0.0;     // recursive residual at the stopping test
    double true_residual_rel = 0.0;  // ||b - A x|| / ||b||
    double error_2norm = 0.0;        // ||x - x_true||
    std::size_t inner_iterations = 0;
    bool converged = false;
    bool ok = false;
    std::string error_message;
};

inline Table1Row run_table1_row(int p, const Table1Config& cfg) {
    Table1Row row;
    row.p = p;
    row.n_grid = (std::size_t{1} << p) - 1;
    row.n = row.n_grid * row.n_grid;
    try {
        const GridProblem prob = laplace_bilinear(row.n_grid);
        const CfSplitting split = full_coarsening(row.n_grid);
        const DeflationBasis basis = direct_interpolation(prob.matrix, split);
        const ProblemRhs rhs = random_unit_solution_rhs(prob.matrix, cfg.seed + p);

        CgConfig solver_cfg;
        solver_cfg.tol_rel = cfg.tol;
        solver_cfg.max_iter = cfg.max_iter;
        const SolveReport rep = deflated_cg(prob.matrix, basis, cfg.policy, rhs.b,
                                            Vector(row.n, 0.0), solver_cfg);

        row.iterations = rep.iterations;
        row.final_residual = rep.final_residual;
        row.inner_iterations = rep.inner_iterations_total;
        row.converged = rep.converged;

        Vector res = spmv(prob.matrix, rep.x);
        for (std::size_t i = 0; i < res.size(); ++i) res[i] = rhs.b[i] - res[i];
        row.true_residual_rel = norm2(res) / norm2(rhs.b);

        Vector err = rep.x;
        axpy(-1.0, rhs.x_true, err);
        row.error_2norm = norm2(err);

        row.ok = rep.converged &&
                 row.true_residual_rel <= cfg.tol * tol::deflated_residual_slack;
        if (!row.ok) row.error_message = "solver missed the residual target";
    } catch (const std::exception& e) {
        row.ok = false;
        row.error_message = e.what();
    }
    return row;
}

inline std::vector<Table1Row> run_table1(const Table1Config& cfg) {
    require(cfg.p_min >= 2 && cfg.p_min <= cfg.p_max, "table1: need 2 <= p_min <= p_max");
    std::vector<Table1Row> rows;
    for (int p = cfg.p_min; p <= cfg.p_max; ++p) rows.push_back(run_table1_row(p, cfg));
    return rows;
}

inline std::string table1_csv(const std::vector<Table1Row>& rows) {
    std::string out = "p,n_grid,n,iterations,final_residual,true_residual_rel,error_2norm,"
                      "inner_iterations,converged,error\n";
    for (const auto& r : rows) {
        out += std::to_string(r.p) + "," + std::to_string(r.n_grid) + "," + std::to_string(r.n) +
               "," + std::to_string(r.iterations) + "," + format_number(r.final_residual) + "," +
               format_number(r.true_residual_rel) + "," + format_number(r.error_2norm) + "," +
               std::to_string(r.inner_iterations) + "," + (r.converged ? "1" : "0") + "," +
               r.error_message + "\n";
    }
    return out;
}

inline json table1_json(const std::vector<Table1Row>& rows, const Table1Config& cfg) {
    json jrows = json::array();
    for (const auto& r : rows)
        jrows.push_back(json{{"p", r.p},
                             {"n_grid", r.n_grid},
                             {"n", r.n},
                             {"iterations", r.iterations},
                             {"final_residual", r.final_residual},
                             {"true_residual_rel", r.true_residual_rel},
                             {"error_2norm", r.error_2norm},
                             {"inner_iterations", r.inner_iterations},
                             {"converged", r.converged},
                             {"error", r.error_message}});
    return json{{"experiment", "table1"},
                {"config",
                 {{"p_min", cfg.p_min},
                  {"p_max", cfg.p_max},
                  {"tol", cfg.tol},
                  {"inner", inner_policy_name(cfg.policy)},
                  {"seed", cfg.seed},
                  {"max_iter", cfg.max_iter}}},
                {"rows", jrows}};
}

// ---------------------------------------------------------------------------
// Constants experiment: the full bound report on the bi-linear Laplacian with
// the direct-interpolation subspace, dense analysis.
// ---------------------------------------------------------------------------

struct Table2Result {
    std::size_t n_grid = 0;
    std::size_t n = 0;
    BoundReport report;
};

inline Table2Result run_table2(std::size_t n_grid) {
    require(n_grid >= 3 && n_grid <= 63, "table2: need 3 <= N <= 63 (dense analysis limit)");
    const GridProblem prob = laplace_bilinear(n_grid);
    const CfSplitting split = full_coarsening(n_grid);
    const DeflationBasis basis = direct_interpolation(prob.matrix, split);
    return {n_grid, prob.n(), bound_report(prob.matrix, basis)};
}

inline std::string table2_csv(const Table2Result& r) {
    std::string out = "n_grid,n,lambda_min,lambda_max,kappa,mu_ell,mu_1,kappa_eff,K,gamma,xi,"
                      "bound,rank_deficiency\n";
    out += std::to_string(r.n_grid) + "," + std::to_string(r.n) + "," +
           format_number(r.report.lambda_min) + "," + format_number(r.report.lambda_max) + "," +
           format_number(r.report.kappa) + "," + format_number(r.report.mu_ell) + "," +
           format_number(r.report.mu_1) + "," + format_number(r.report.kappa_eff) + "," +
           format_number(r.report.K) + "," + format_number(r.report.gamma) + "," +
           format_number(r.report.xi) + "," + format_number(r.report.bound) + "," +
           std::to_string(r.report.rank_deficiency) + "\n";
    return out;
}

inline json table2_json(const Table2Result& r) {
    return json{{"experiment", "table2"},
                {"config", {{"n_grid", r.n_grid}}},
                {"n", r.n},
                {"report", to_json(r.report)}};
}

// ---------------------------------------------------------------------------
// Perturbation experiment: eigenvector deflation on the n = 100 spectrum
// problem with one small eigenvalue, swept over perturbation magnitudes.
// ---------------------------------------------------------------------------

struct Figure1Config {
    std::size_t n = 100;
    double small_eigenvalue = 1e-2;
    std::size_t points = 17;
    double mag_min = 1e-8;
    double mag_max = 1.0;
    std::uint64_t seed = 1;
};

inline std::vector<double> log_spaced(double lo, double hi, std::size_t points) {
    require(points >= 2 && lo > 0.0 && hi > lo, "log_spaced: bad range");
    std::vector<double> out(points);
    const double llo = std::log10(lo);
    const double lhi = std::log10(hi);
    for (std::size_t i = 0; i < points; ++i)
        out[i] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) /
                                      static_cast<double>(points - 1));
    return out;
}

inline PerturbationSweep run_figure1(const Figure1Config& cfg,
                                     const std::vector<double>& magnitudes) {
    std::vector<double> eigenvalues(cfg.n, 1.0);
    eigenvalues.front() = cfg.small_eigenvalue;
    const SpectrumProblem prob =
        spectrum_matrix(cfg.n, eigenvalues, SpectrumFrame::random_orthogonal, cfg.seed);
    const EigenDecomposition eig = sym_eig(prob.matrix.dense());

    // Deflate the single trailing eigenvector; perturb by a seeded unit
    // vector orthogonal to it.
    const std::size_t k = cfg.n - 1;
    const Vector v1 = eig.vectors.col_vector(cfg.n - 1);
    Rng rng(cfg.seed + 0x9E37);
    Vector dir = rng.normals(cfg.n);
    axpy(-dot(dir, v1), v1, dir);
    scale(dir, 1.0 / norm2(dir));
    DenseMatrix direction(cfg.n, 1);
    std::copy(dir.begin(), dir.end(), direction.col(0).begin());

    return perturbation_sweep(prob.matrix, eig, k, direction, magnitudes);
}

inline PerturbationSweep run_figure1(const Figure1Config& cfg) {
    return run_figure1(cfg, log_spaced(cfg.mag_min, cfg.mag_max, cfg.points));
}

inline json figure1_json(const PerturbationSweep& sweep, const Figure1Config& cfg) {
    json j = to_json(sweep);
    j["experiment"] = "figure1";
    j["config"] = {{"n", cfg.n},
                   {"small_eigenvalue", cfg.small_eigenvalue},
                   {"points", cfg.points},
                   {"mag_min", cfg.mag_min},
                   {"mag_max", cfg.mag_max},
                   {"seed", cfg.seed}};
    return j;
}

// ---------------------------------------------------------------------------
// solve: deflated CG on a user-supplied Matrix Market system.
// ---------------------------------------------------------------------------

struct SolveConfig {
    std::string matrix_file;
    std::string subspace_spec; // aggregation:<json> | interpolation:full_coarsening:<N>
                               // | eigen:<k> | basis_file:<mm>
    std::string rhs_file;      // empty: derive from seed
    double tol = 1e-6;
    CoarsePolicy policy = CoarsePolicy::direct();
    std::uint64_t seed = 1;
    std::size_t max_iter = 10000;
    std::size_t spd_samples = 8;
};

inline DeflationBasis build_subspace(const SparseMatrix& a, const std::string& spec) {
    const auto colon = spec.find(':');
    require(colon != std::string::npos, "subspace spec must be kind:arguments");
    const std::string kind = spec.substr(0, colon);
    const std::string arg = spec.substr(colon + 1);
    if (kind == "aggregation")
        return aggregation_basis(aggregate_set_from_json(load_json_file(arg)));
    if (kind == "eigen") {
        const std::size_t k = static_cast<std::size_t>(std::stoul(arg));
        detail::check_dense_scale(a.rows(), "eigen subspace");
        return eigen_basis(sym_eig(a.dense()), k);
    }
    if (kind == "interpolation") {
        const std::string full_prefix = "full_coarsening:";
        require(arg.rfind(full_prefix, 0) == 0,
                "interpolation subspace must be full_coarsening:<N>");
        const std::size_t n_grid =
            static_cast<std::size_t>(std::stoul(arg.substr(full_prefix.size())));
        require(n_grid * n_grid == a.rows(), "full_coarsening: N^2 must equal the matrix size");
        return direct_interpolation(a, full_coarsening(n_grid));
    }
    if (kind == "basis_file") return DeflationBasis(mm::read_dense(arg), Provenance::user_supplied);
    require(false, "unknown subspace kind '" + kind + "'");
    throw std::logic_error("unreachable");
}

struct SolveOutcome {
    SolveReport report;
    double true_residual_rel = 0.0;
    bool ok = false;
};

inline SolveOutcome run_solve(const SolveConfig& cfg) {
    const SparseMatrix a = mm::read_sparse(cfg.matrix_file);
    require(a.rows() == a.cols() && a.symmetric(),
            "solve: the system matrix must be square and symmetric");
    if (!assert_spd_sample(a, cfg.spd_samples, cfg.seed))
        numerical_error("solve: matrix failed the positive-definiteness sample check");

    const DeflationBasis basis = build_subspace(a, cfg.subspace_spec);
    Vector b;
    if (cfg.rhs_file.empty()) {
        b = random_unit_solution_rhs(a, cfg.seed).b;
    } else {
        b = mm::read_vector(cfg.rhs_file);
        require(b.size() == a.rows(), "solve: rhs dimension mismatch");
    }

    CgConfig solver_cfg;
    solver_cfg.tol_rel = cfg.tol;
    solver_cfg.max_iter = cfg.max_iter;

    SolveOutcome out;
    out.report = deflated_cg(a, basis, cfg.policy, b, Vector(a.rows(), 0.0), solver_cfg);
    if (!all_finite(out.report.x)) numerical_error("solve: non-finite entries in the solution");
    Vector res = spmv(a, out.report.x);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] = b[i] - res[i];
    const double norm_b = norm2(b);
    out.true_residual_rel = norm_b > 0.0 ? norm2(res) / norm_b : norm2(res);
    out.ok = out.report.converged &&
             out.true_residual_rel <= cfg.tol * tol::deflated_residual_slack;
    return out;
}

inline json solve_json(const SolveOutcome& out, const SolveConfig& cfg) {
    json j = to_json(out.report);
    j["experiment"] = "solve";
    j["true_residual_rel"] = out.true_residual_rel;
    j["ok"] = out.ok;
    j["config"] = {{"matrix", cfg.matrix_file},
                   {"subspace", cfg.subspace_spec},
                   {"rhs", cfg.rhs_file},
                   {"tol", cfg.tol},
                   {"inner", inner_policy_name(cfg.policy)},
                   {"seed", cfg.seed},
                   {"max_iter", cfg.max_iter}};
    return j;
}

} // namespace deflatron
