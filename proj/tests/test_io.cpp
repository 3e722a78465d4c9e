#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "test_helpers.hpp"

using namespace deflatron;
using namespace testutil;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

} // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("symmetric coordinate files round-trip the grid matrix") {
    const auto prob = laplace_bilinear(5);
    const std::string path = temp_path("deflatron_sym.mtx");
    mm::write_sparse(prob.matrix, path);
    const SparseMatrix back = mm::read_sparse(path);
    CHECK(back.symmetric());
    CHECK(back.rows() == prob.matrix.rows());
    CHECK(back.row_ptr() == prob.matrix.row_ptr());
    CHECK(back.col_idx() == prob.matrix.col_idx());
    CHECK(back.values() == prob.matrix.values());

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "%%MatrixMarket matrix coordinate real symmetric");
    std::remove(path.c_str());
}

TEST_CASE("general coordinate files round-trip a rectangular basis") {
    const auto prob = laplace_bilinear(5);
    const auto basis = direct_interpolation(prob.matrix, full_coarsening(5));
    const std::string path = temp_path("deflatron_gen.mtx");
    mm::write_sparse(basis.matrix(), path);
    const SparseMatrix back = mm::read_sparse(path);
    CHECK_FALSE(back.symmetric());
    CHECK(back.values() == basis.matrix().values());
    CHECK(back.col_idx() == basis.matrix().col_idx());
    std::remove(path.c_str());
}

TEST_CASE("array files round-trip dense matrices and vectors") {
    const DenseMatrix m = random_dense(6, 3, 601);
    const std::string path = temp_path("deflatron_arr.mtx");
    mm::write_dense(m, path);
    const DenseMatrix back = mm::read_dense(path);
    CHECK(back.rows() == 6);
    CHECK(back.cols() == 3);
    CHECK(back.data() == m.data());

    const Vector v = random_vector(5, 602);
    mm::write_vector(v, path);
    CHECK(mm::read_vector(path) == v);
    std::remove(path.c_str());
}

TEST_CASE("malformed matrix market files are rejected") {
    const std::string path = temp_path("deflatron_bad.mtx");
    write_file(path, "%%NotMatrixMarket nothing\n1 1 1\n1 1 1.0\n");
    CHECK_THROWS_AS(mm::read_sparse(path), std::runtime_error);
    write_file(path, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n");
    CHECK_THROWS_AS(mm::read_sparse(path), std::runtime_error); // truncated
    write_file(path, "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
    CHECK_THROWS_AS(mm::read_sparse(path), std::runtime_error); // index out of range
    write_file(path, "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0 0.0\n");
    CHECK_THROWS_AS(mm::read_sparse(path), std::runtime_error); // unsupported field
    CHECK_THROWS_AS(mm::read_sparse(temp_path("deflatron_missing.mtx")), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("aggregate sets and splittings round-trip through json") {
    const AggregateSet agg{{0, 1, 1, 0, 2}, 3};
    const AggregateSet back = aggregate_set_from_json(to_json(agg));
    CHECK(back.assignments == agg.assignments);
    CHECK(back.count == agg.count);

    CfSplitting split = full_coarsening(5);
    const CfSplitting sback = cf_splitting_from_json(to_json(split));
    CHECK(sback.coarse == split.coarse);
    REQUIRE(sback.grid_shape.has_value());
    CHECK(sback.grid_shape->first == 5);
}

TEST_CASE("bound reports serialize with full precision") {
    const SparseMatrix a = random_spd(10, 603, 0.5, 5.0);
    const DeflationBasis basis(random_dense(10, 3, 604), Provenance::user_supplied);
    const BoundReport rep = bound_report(a, basis);
    const json j = to_json(rep);
    CHECK(j.at("K").get<double>() == rep.K);
    CHECK(j.at("gamma").get<double>() == rep.gamma);
    CHECK(j.at("kappa_eff").get<double>() == rep.kappa_eff);
    CHECK(j.at("rank_deficiency").get<std::size_t>() == rep.rank_deficiency);
}

TEST_CASE("sweep csv uses the fixed header and NA for undefined entries") {
    PerturbationSweep sweep;
    SweepRecord r;
    r.e1_frob = 0.5;
    r.kappa_opt = 1.0;
    r.kappa_eff_actual = 2.0; // delta and estimate stay NaN
    sweep.records.push_back(r);
    const std::string csv = to_csv(sweep);
    CHECK(csv.rfind("e1_frob,delta_measured,delta_bound,kappa_eff_actual,"
                    "kappa_eff_estimate,kappa_opt\n", 0) == 0);
    CHECK(csv.find("0.5,NA,NA,2,NA,1") != std::string::npos);
}

TEST_CASE("inner policy parsing") {
    CHECK(parse_inner_policy("direct").kind == CoarsePolicy::Kind::direct);
    const auto fixed = parse_inner_policy("fixed:1e-8");
    CHECK(fixed.kind == CoarsePolicy::Kind::inner_cg_fixed);
    CHECK(fixed.fixed_tol == 1e-8);
    const auto adaptive = parse_inner_policy("adaptive:0.5");
    CHECK(adaptive.kind == CoarsePolicy::Kind::inner_cg_adaptive);
    CHECK(adaptive.adaptive_c == 0.5);
    CHECK_THROWS_AS(parse_inner_policy("nonsense"), std::invalid_argument);
    CHECK_THROWS_AS(parse_inner_policy("adaptive:2.0"), std::invalid_argument);
}

TEST_CASE("solve round-trips through matrix market identically") {
    const auto prob = laplace_bilinear(7);
    const std::string path = temp_path("deflatron_solve.mtx");
    mm::write_sparse(prob.matrix, path);

    SolveConfig cfg;
    cfg.matrix_file = path;
    cfg.subspace_spec = "interpolation:full_coarsening:7";
    cfg.tol = 1e-6;
    cfg.policy = CoarsePolicy::direct();
    cfg.seed = 99;
    const SolveOutcome from_file = run_solve(cfg);

    // in-memory path with the same seed-derived rhs
    const auto rhs = random_unit_solution_rhs(prob.matrix, 99);
    CgConfig scfg;
    scfg.tol_rel = 1e-6;
    const SolveReport in_memory =
        deflated_cg(prob.matrix, direct_interpolation(prob.matrix, full_coarsening(7)),
                    CoarsePolicy::direct(), rhs.b, Vector(prob.n(), 0.0), scfg);

    CHECK(from_file.ok);
    CHECK(from_file.report.iterations == in_memory.iterations);
    CHECK(from_file.report.final_residual == in_memory.final_residual);
    CHECK(from_file.report.x == in_memory.x);
    std::remove(path.c_str());
}

TEST_CASE("solve rejects subspace and matrix mismatches") {
    const auto prob = laplace_bilinear(5);
    const std::string path = temp_path("deflatron_guard.mtx");
    mm::write_sparse(prob.matrix, path);
    SolveConfig cfg;
    cfg.matrix_file = path;
    cfg.subspace_spec = "interpolation:full_coarsening:9"; // wrong grid size
    CHECK_THROWS_AS(run_solve(cfg), std::invalid_argument);
    cfg.subspace_spec = "unknown:3";
    CHECK_THROWS_AS(run_solve(cfg), std::invalid_argument);
    std::remove(path.c_str());

    // non-SPD input fails the sample check
    const auto indef = SparseMatrix::diagonal(Vector{1.0, -1.0, 1.0});
    const std::string bad = temp_path("deflatron_indef.mtx");
    mm::write_sparse(indef, bad);
    cfg.matrix_file = bad;
    cfg.subspace_spec = "eigen:1";
    CHECK_THROWS_AS(run_solve(cfg), std::runtime_error);
    std::remove(bad.c_str());
}

TEST_SUITE_END();
