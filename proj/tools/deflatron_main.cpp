// deflatron command line: reproduces the solver-scaling, constants, and
// perturbation experiments and exposes the deflated solver on Matrix Market
// systems.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "deflatron/deflatron.hpp"

namespace {

using namespace deflatron;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) return;
    write_text_file(out_path, text);
    std::cout << "wrote " << out_path << "\n";
}

int cmd_table1(const Table1Config& cfg, const std::string& out, const std::string& format) {
    const auto rows = run_table1(cfg);
    std::printf("%3s %6s %9s %12s %14s %14s %12s %7s\n", "p", "N", "n", "iterations",
                "residual", "error", "inner_iters", "status");
    bool all_ok = true;
    for (const auto& r : rows) {
        std::printf("%3d %6zu %9zu %12zu %14s %14s %12zu %7s\n", r.p, r.n_grid, r.n,
                    r.iterations, format_number(r.final_residual, 6).c_str(),
                    format_number(r.error_2norm, 6).c_str(), r.inner_iterations,
                    r.ok ? "ok" : "FAIL");
        if (!r.ok) {
            all_ok = false;
            std::fprintf(stderr, "p=%d: %s\n", r.p, r.error_message.c_str());
        }
    }
    emit(format == "json" ? table1_json(rows, cfg).dump(2) + "\n" : table1_csv(rows), out);
    return all_ok ? 0 : 1;
}

int cmd_table2(std::size_t n_grid, const std::string& out, const std::string& format) {
    const Table2Result r = run_table2(n_grid);
    std::printf("N = %zu (n = %zu)\n", r.n_grid, r.n);
    std::printf("  lambda extremes  {%s, %s}\n", format_number(r.report.lambda_min, 6).c_str(),
                format_number(r.report.lambda_max, 6).c_str());
    std::printf("  kappa            %s\n", format_number(r.report.kappa, 6).c_str());
    std::printf("  mu extremes      {%s, %s}\n", format_number(r.report.mu_ell, 6).c_str(),
                format_number(r.report.mu_1, 6).c_str());
    std::printf("  kappa_eff        %s\n", format_number(r.report.kappa_eff, 6).c_str());
    std::printf("  K                %s\n", format_number(r.report.K, 6).c_str());
    std::printf("  gamma            %s\n", format_number(r.report.gamma, 6).c_str());
    std::printf("  xi               %s\n", format_number(r.report.xi, 6).c_str());
    std::printf("  K/(1-gamma)      %s\n", format_number(r.report.bound, 6).c_str());
    emit(format == "json" ? table2_json(r).dump(2) + "\n" : table2_csv(r), out);
    return 0;
}

int cmd_figure1(const Figure1Config& cfg, const std::vector<double>& magnitudes,
                const std::string& out, const std::string& format) {
    const PerturbationSweep sweep =
        magnitudes.empty() ? run_figure1(cfg) : run_figure1(cfg, magnitudes);
    std::printf("kappa = %s, kappa_opt = %s\n", format_number(sweep.kappa, 6).c_str(),
                format_number(sweep.kappa_opt, 6).c_str());
    std::printf("%14s %14s %14s %14s %14s\n", "e1_frob", "delta", "delta_bound", "eff_cond",
                "estimate");
    for (const auto& r : sweep.records)
        std::printf("%14s %14s %14s %14s %14s\n", format_number(r.e1_frob, 6).c_str(),
                    format_number(r.delta_measured, 6).c_str(),
                    format_number(r.delta_bound, 6).c_str(),
                    format_number(r.kappa_eff_actual, 6).c_str(),
                    format_number(r.kappa_eff_estimate, 6).c_str());
    emit(format == "json" ? figure1_json(sweep, cfg).dump(2) + "\n" : to_csv(sweep), out);
    return 0;
}

int cmd_solve(const SolveConfig& cfg, const std::string& solution_out,
              const std::string& report_out) {
    const SolveOutcome outcome = run_solve(cfg);
    std::printf("iterations      %zu\n", outcome.report.iterations);
    std::printf("converged       %s\n", outcome.report.converged ? "yes" : "no");
    std::printf("residual        %s\n", format_number(outcome.report.final_residual, 6).c_str());
    std::printf("true residual   %s (relative)\n",
                format_number(outcome.true_residual_rel, 6).c_str());
    std::printf("inner iters     %zu\n", outcome.report.inner_iterations_total);
    if (!solution_out.empty()) {
        mm::write_vector(outcome.report.x, solution_out);
        std::cout << "wrote " << solution_out << "\n";
    }
    const std::string report = solve_json(outcome, cfg).dump(2) + "\n";
    if (report_out.empty())
        std::cout << report;
    else
        emit(report, report_out);
    return outcome.ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deflated conjugate gradient solver and convergence-bound toolkit"};
    app.require_subcommand(1);
    // let global flags (--out, --tol, ...) appear after the subcommand
    app.fallthrough();

    std::string out;
    std::string format = "csv";
    std::string inner = "direct";
    std::uint64_t seed = 1;
    double tolerance = 1e-6;
    std::size_t max_iter = 10000;
    app.add_option("--out", out, "output file path")->capture_default_str();
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--inner", inner, "coarse policy: direct | fixed:<tc> | adaptive:<c>")
        ->capture_default_str();
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_option("--tol", tolerance, "relative residual tolerance")->capture_default_str();
    app.add_option("--max-iter", max_iter, "outer iteration cap")->capture_default_str();

    auto* t1 = app.add_subcommand("table1", "iteration counts across grid sizes N = 2^p - 1");
    int p_min = 4, p_max = 9;
    t1->add_option("--p-min", p_min, "smallest exponent p")->capture_default_str();
    t1->add_option("--p-max", p_max, "largest exponent p")->capture_default_str();
    std::string t1_inner = "adaptive:1";
    t1->add_option("--inner", t1_inner, "coarse policy for this experiment")
        ->capture_default_str();

    auto* t2 = app.add_subcommand("table2", "convergence-bound constants on one grid");
    std::size_t n_grid = 31;
    t2->add_option("--n", n_grid, "grid size N (N <= 63)")->capture_default_str();

    auto* f1 = app.add_subcommand("figure1", "perturbed eigenvector deflation sweep");
    std::size_t points = 17;
    std::vector<double> magnitudes;
    f1->add_option("--points", points, "number of log-spaced magnitudes in [1e-8, 1]")
        ->capture_default_str();
    f1->add_option("--magnitudes", magnitudes, "explicit perturbation magnitudes");

    auto* sv = app.add_subcommand("solve", "deflated CG on a Matrix Market system");
    std::string matrix_file, subspace_spec, rhs_file, report_out;
    sv->add_option("--matrix", matrix_file, "Matrix Market coordinate file")->required();
    sv->add_option("--subspace", subspace_spec,
                   "aggregation:<json> | interpolation:full_coarsening:<N> | eigen:<k> | "
                   "basis_file:<mm>")
        ->required();
    sv->add_option("--rhs", rhs_file, "Matrix Market array rhs (default: seeded random)");
    sv->add_option("--report", report_out, "JSON report path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (t1->parsed()) {
            Table1Config cfg;
            cfg.p_min = p_min;
            cfg.p_max = p_max;
            cfg.tol = tolerance;
            cfg.policy = parse_inner_policy(t1_inner);
            cfg.seed = seed;
            cfg.max_iter = max_iter;
            return cmd_table1(cfg, out, format);
        }
        if (t2->parsed()) return cmd_table2(n_grid, out, format);
        if (f1->parsed()) {
            Figure1Config cfg;
            cfg.points = points;
            cfg.seed = seed;
            return cmd_figure1(cfg, magnitudes, out, format);
        }
        if (sv->parsed()) {
            SolveConfig cfg;
            cfg.matrix_file = matrix_file;
            cfg.subspace_spec = subspace_spec;
            cfg.rhs_file = rhs_file;
            cfg.tol = tolerance;
            cfg.policy = parse_inner_policy(inner);
            cfg.seed = seed;
            cfg.max_iter = max_iter;
            return cmd_solve(cfg, out, report_out);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
