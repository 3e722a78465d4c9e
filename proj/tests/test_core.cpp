#include <doctest.h>

#include "test_helpers.hpp"

using namespace deflatron;
using namespace testutil;

TEST_SUITE_BEGIN("core");

TEST_CASE("spmv on the identity returns the input") {
    const auto a = SparseMatrix::identity(3);
    const Vector x = {1.0, 2.0, 3.0};
    CHECK(spmv(a, x) == Vector{1.0, 2.0, 3.0});
}

TEST_CASE("spmv on the 1d laplacian hits boundary rows only for constants") {
    const auto a = laplace_1d(3);
    CHECK(spmv(a, Vector{1.0, 1.0, 1.0}) == Vector{1.0, 0.0, 1.0});
}

TEST_CASE("spmv on the 3x3 grid stencil returns the centre column") {
    const auto prob = laplace_bilinear(3);
    Vector e5(9, 0.0);
    e5[4] = 1.0; // centre point (2,2)
    const Vector col = spmv(prob.matrix, e5);
    for (std::size_t i = 0; i < 9; ++i) CHECK(col[i] == (i == 4 ? 8.0 : -1.0));
}

TEST_CASE("spmv rejects dimension mismatch") {
    const auto a = SparseMatrix::identity(3);
    CHECK_THROWS_AS(spmv(a, Vector{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("spmv agrees with a dense triple-loop reference") {
    for (std::uint64_t seed : {11u, 22u, 33u}) {
        const SparseMatrix a = random_spd(20, seed);
        const Vector x = random_vector(20, seed + 100);
        const Vector y = spmv(a, x);
        const Vector ref = dense_reference_multiply(a.dense(), x);
        const double scale = norm2(ref);
        CHECK(max_abs_diff(y, ref) <= 1e-13 * std::max(scale, 1.0));
    }
}

TEST_CASE("dot basics") {
    CHECK(dot(Vector{1.0, 0.0}, Vector{0.0, 1.0}) == 0.0);
    CHECK(dot(Vector{1.0, 2.0}, Vector{3.0, 4.0}) == 11.0);
    CHECK_THROWS_AS(dot(Vector{1.0}, Vector{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("eigenvector columns are orthonormal under dot") {
    const SparseMatrix a = random_spd(12, 7);
    const EigenDecomposition eig = sym_eig(a.dense());
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 12; ++j) {
            const double d = dot(eig.vectors.col_vector(i), eig.vectors.col_vector(j));
            CHECK(std::abs(d - (i == j ? 1.0 : 0.0)) <= 1e-12);
        }
}

TEST_CASE("a_dot matches dot for the identity and is positive on the diagonal") {
    const auto id = SparseMatrix::identity(4);
    const Vector u = random_vector(4, 5), v = random_vector(4, 6);
    CHECK(a_dot(id, u, v) == dot(u, v));
    const SparseMatrix a = random_spd(10, 42);
    const Vector w = random_vector(10, 3);
    CHECK(a_dot(a, w, w) >= 0.0);
}

TEST_CASE("a_dot on tridiag(-1,2,-1) n=2 with unit vector") {
    const auto a = laplace_1d(2);
    CHECK(a_dot(a, Vector{1.0, 0.0}, Vector{1.0, 0.0}) == 2.0);
}

TEST_CASE("a_dot is self-adjoint on SPD inputs") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const SparseMatrix a = random_spd(15, seed);
        const Vector u = random_vector(15, seed + 10), v = random_vector(15, seed + 20);
        const double uv = a_dot(a, u, v), vu = a_dot(a, v, u);
        CHECK(rel_diff(uv, vu) <= 1e-13);
    }
}

TEST_CASE("a_norm and norm2 basics") {
    CHECK(a_norm(SparseMatrix::identity(2), Vector{3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(norm2(Vector(5, 0.0)) == 0.0);
    CHECK(a_norm(laplace_1d(2), Vector{1.0, 1.0}) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    // ||v||_A is defined as the square root of the quadratic form.
    const SparseMatrix a = random_spd(8, 9);
    const Vector v = random_vector(8, 4);
    CHECK(a_norm(a, v) == std::sqrt(a_dot(a, v, v)));
}

TEST_CASE("a_norm flags clearly indefinite input") {
    const auto a = SparseMatrix::diagonal(Vector{1.0, -1.0});
    CHECK_THROWS_AS(a_norm(a, Vector{0.0, 2.0}), std::runtime_error);
}

TEST_CASE("assert_spd_sample") {
    CHECK(assert_spd_sample(SparseMatrix::identity(5), 4, 1));
    CHECK_FALSE(assert_spd_sample(SparseMatrix::diagonal(Vector{1.0, -1.0}), 4, 1));
    const auto prob = laplace_bilinear(7);
    CHECK(assert_spd_sample(prob.matrix, 4, 7));
    // dense oracle: smallest eigenvalue strictly positive
    CHECK(sym_eig(prob.matrix.dense()).values.back() > 0.0);
}

TEST_CASE("sparse matrix construction rejects bad input") {
    CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}, false),
                    std::invalid_argument); // duplicate
    CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{0, 3, 1.0}}, false),
                    std::invalid_argument); // column out of range
    CHECK_THROWS_AS(
        SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 3.0}, {1, 1, 1.0}},
                                    true),
        std::invalid_argument); // asymmetric values
    CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{0, 1, 2.0}}, true),
                    std::invalid_argument); // missing mirror entry
}

TEST_CASE("sparse matmul and transpose agree with dense references") {
    const SparseMatrix a = random_spd(10, 77);
    const auto v = SparseMatrix::from_dense(random_dense(10, 3, 78), false);
    const SparseMatrix av = sparse_matmul(a, v);
    CHECK(frobenius_diff(av.dense(), matmul(a.dense(), v.dense())) <= 1e-12);
    const SparseMatrix vt = sparse_transpose(v);
    CHECK(frobenius_diff(vt.dense(), transpose(v.dense())) == 0.0);
    const SparseMatrix coarse = sparse_symmetrize(sparse_matmul(vt, av));
    CHECK(coarse.symmetric());
    CHECK(frobenius_diff(coarse.dense(), matmul_tn(v.dense(), av.dense())) <= 1e-12);
}

TEST_SUITE_END();
