#include "aonkit/error.hpp"
#include "aonkit/linalg.hpp"
#include "aonkit/specnorm.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace aonkit;

TEST_CASE("matrix construction checks size and finiteness") {
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(Matrix(1, 2, std::vector<double>{1, std::nan("")}), InputError);
    CHECK_THROWS_AS(Matrix(1, 1, std::vector<double>{std::numeric_limits<double>::infinity()}), InputError);
    CHECK_THROWS_AS(Vector(std::vector<double>{0.0, std::nan("")}), InputError);
    const Matrix m = Matrix::from_rows({{1, 2}, {3, 4}});
    CHECK(m.rows() == 2);
    CHECK(m(1, 0) == 3);
}

TEST_CASE("matmul examples") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    CHECK(matmul(Matrix::identity(2), a) == a);
    CHECK(matmul(Matrix::from_rows({{1, 2}}), Matrix::from_rows({{3}, {4}}))(0, 0) == 11);
    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
    CHECK_THROWS_AS(matmul_nt(Matrix(2, 3), Matrix(2, 4)), ShapeError);
    CHECK_THROWS_AS(matmul_tn(Matrix(2, 3), Matrix(3, 3)), ShapeError);
}

TEST_CASE("matmul matches the triple-loop oracle") {
    Rng rng(1);
    for (int t = 0; t < 10; ++t) {
        const Matrix a = random_gaussian(5, 7, rng), b = random_gaussian(7, 3, rng);
        CHECK(oracle::max_abs(matmul(a, b), oracle::matmul(a, b)) < 1e-13);
    }
}

TEST_CASE("matmul is associative within 1e-10 relative") {
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        const Matrix a = random_gaussian(4, 6, rng), b = random_gaussian(6, 5, rng), c = random_gaussian(5, 3, rng);
        const Matrix l = matmul(matmul(a, b), c), r = matmul(a, matmul(b, c));
        CHECK(oracle::fro(l - r) <= 1e-10 * oracle::fro(l));
    }
}

TEST_CASE("transpose, add, scale, identity") {
    const Matrix a = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    CHECK(transpose(a) == Matrix::from_rows({{1, 4}, {2, 5}, {3, 6}}));
    CHECK(transpose(transpose(a)) == a);
    CHECK(add(a, a) == scale(a, 2.0));
    CHECK(identity(3) == Matrix::identity(3));
    CHECK_THROWS_AS(add(a, transpose(a)), ShapeError);
}

TEST_CASE("gram examples and properties") {
    CHECK(gram(Matrix::identity(3)) == Matrix::identity(3));
    CHECK(gram(Matrix::from_rows({{1, 1}, {1, -1}})) == Matrix::from_rows({{2, 0}, {0, 2}}));
    Rng rng(4);
    for (int t = 0; t < 10; ++t) {
        const Matrix w = random_gaussian(4, 6, rng);
        const Matrix g = gram(w);
        CHECK(oracle::max_abs(g, matmul(w, transpose(w))) < 1e-13);
        CHECK(g == transpose(g));
        for (double ev : jacobi_eigenvalues(g)) CHECK(ev > -1e-12);
    }
}

TEST_CASE("frobenius norm examples and homogeneity") {
    CHECK(frobenius_norm(Matrix(3, 3)) == 0.0);
    CHECK(frobenius_norm(Matrix::from_rows({{3, 4}})) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(frobenius_norm(scale(Matrix::identity(2), 3.0)) == doctest::Approx(std::sqrt(18.0)).epsilon(1e-15));
    Rng rng(5);
    const Matrix a = random_gaussian(3, 4, rng);
    for (double c : {-3.0, 0.5, 1e-3, 1e150}) {
        const double l = frobenius_norm(scale(a, c)), r = std::abs(c) * frobenius_norm(a);
        CHECK(std::abs(l - r) <= 1e-12 * r);
    }
    // Scaled accumulation survives entries whose squares overflow.
    CHECK(std::isfinite(frobenius_norm(Matrix::from_rows({{1e200, 1e200}}))));
}

TEST_CASE("spectral norm oracle examples") {
    CHECK(spectral_norm_oracle(Matrix::from_rows({{3, 0}, {0, 1}})) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(spectral_norm_oracle(Matrix::from_rows({{0, 1}, {0, 0}})) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(spectral_norm_oracle(Matrix(3, 2)) == 0.0);

    Rng rng(6);
    const Matrix a = random_gaussian(6, 4, rng);
    PowerIterState s = init_state(6, 4, 1);
    double sigma = 0.0;
    for (int i = 0; i < 500; ++i) sigma = power_step_inplace(a, s);
    CHECK(std::abs(sigma - spectral_norm_oracle(a)) < 1e-9);
}

TEST_CASE("spectral norm oracle is transpose invariant") {
    Rng rng(7);
    for (int t = 0; t < 10; ++t) {
        const Matrix a = random_gaussian(3 + t % 4, 5, rng);
        CHECK(std::abs(spectral_norm_oracle(a) - spectral_norm_oracle(transpose(a))) < 1e-10);
    }
}

TEST_CASE("jacobi eigenvalues of a known symmetric matrix") {
    const auto ev = jacobi_eigenvalues(Matrix::from_rows({{2, 1}, {1, 2}}));
    REQUIRE(ev.size() == 2);
    CHECK(ev[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(ev[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(jacobi_eigenvalues(Matrix(2, 3)), ShapeError);
}

TEST_CASE("horner polynomial matches explicit powers") {
    Rng rng(8);
    const Matrix w = scale(random_gaussian(4, 6, rng), 0.4);
    const std::vector<double> c{1.0, -0.5, 0.375, -0.3125};
    const Matrix p = matrix_polynomial_horner(c, gram(w));
    const Matrix e = oracle::axpby(1.0, oracle::gram(w), -1.0, oracle::identity(4));
    Matrix ref = oracle::identity(4), pw = oracle::identity(4);
    ref = oracle::axpby(c[0], ref, 0.0, ref);
    for (std::size_t k = 1; k < c.size(); ++k) {
        pw = oracle::matmul(pw, e);
        ref = oracle::axpby(1.0, ref, c[k], pw);
    }
    CHECK(oracle::max_abs(p, ref) < 1e-12);
    CHECK(matrix_polynomial_horner(std::vector<double>{2.5}, gram(w)) == scale(Matrix::identity(4), 2.5));
}

TEST_CASE("vector helpers") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    const Vector x{1, -1};
    const Vector y = matvec(a, x);
    CHECK(y == Vector{-1, -1, -1});
    CHECK(matvec_t(a, Vector{1, 0, 1}) == Vector{6, 8});
    CHECK(norm2(Vector{3, 4}) == 5.0);
    CHECK(dot(Vector{1, 2}, Vector{3, 4}) == 11.0);
    CHECK(outer(Vector{1, 2}, Vector{3, 4, 5}) == Matrix::from_rows({{3, 4, 5}, {6, 8, 10}}));
    CHECK(frobenius_inner(a, a) == doctest::Approx(91.0));
}

TEST_CASE("random orthonormal rows are orthonormal") {
    Rng rng(10);
    const Matrix q = random_orthonormal_rows(5, 9, rng);
    CHECK(oracle::max_abs(oracle::gram(q), oracle::identity(5)) < 1e-14);
    CHECK_THROWS_AS(random_orthonormal_rows(4, 3, rng), ShapeError);
}
