#include "aonkit/error.hpp"
#include "aonkit/orthopoly.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace aonkit;

namespace {

Matrix diag_sqrt(double a, double b) { return Matrix::from_rows({{std::sqrt(a), 0}, {0, std::sqrt(b)}}); }

} // namespace

TEST_CASE("taylor coefficients") {
    CHECK(taylor_coeffs(2).coeffs == std::vector<double>{1.0, -0.5, 0.375});
    CHECK(taylor_coeffs(0).coeffs == std::vector<double>{1.0});
    CHECK(taylor_coeffs(4).coeffs == std::vector<double>{1.0, -0.5, 0.375, -0.3125, 0.2734375});
    CHECK(taylor_coeffs(3).order == 3);
    CHECK_THROWS_AS(taylor_coeffs(-1), InputError);
}

TEST_CASE("taylor coefficients match derivatives of x^(-1/2) and alternate in sign") {
    for (int q = 0; q <= 12; ++q) {
        const auto c = taylor_coeffs(q).coeffs;
        REQUIRE(c.size() == static_cast<std::size_t>(q + 1));
        for (int k = 0; k <= q; ++k) CHECK(std::abs(c[k] - oracle::inv_sqrt_taylor(k)) < 1e-14);
        for (int k = 1; k <= q; ++k) {
            CHECK(c[k] * c[k - 1] < 0.0);
            if (k >= 2) CHECK(std::abs(c[k]) < std::abs(c[k - 1]));
        }
    }
}

TEST_CASE("scalar polynomial") {
    CHECK(eval_scalar_pq(0.5, 2) == doctest::Approx(1.34375).epsilon(1e-15));
    CHECK(eval_scalar_pq(1.5, 2) == doctest::Approx(0.84375).epsilon(1e-15));
    CHECK(eval_scalar_pq(1.0, 7) == 1.0);
    // converges to x^(-1/2) inside (0, 2)
    CHECK(std::abs(eval_scalar_pq(0.7, 40) - 1.0 / std::sqrt(0.7)) < 1e-12);
}

TEST_CASE("eval_pq examples") {
    CHECK(oracle::max_abs(eval_pq(Matrix::identity(3), 2), Matrix::identity(3)) == 0.0);
    const Matrix p = eval_pq(diag_sqrt(0.5, 1.5), 2);
    CHECK(p(0, 0) == doctest::Approx(1.34375).epsilon(1e-14));
    CHECK(p(1, 1) == doctest::Approx(0.84375).epsilon(1e-14));
    CHECK(p(0, 1) == 0.0);
}

TEST_CASE("eval_pq at q = 2 is 1.875 I - 1.25 G + 0.375 G^2") {
    Rng rng(11);
    for (int t = 0; t < 20; ++t) {
        const Matrix w = sample_weight_with_spectrum(5, 8, 0.5, 1.5, rng);
        const Matrix g = oracle::gram(w);
        const Matrix ref = oracle::axpby(1.0, oracle::axpby(1.875, oracle::identity(5), -1.25, g), 0.375,
                                         oracle::matmul(g, g));
        CHECK(oracle::max_abs(eval_pq(w, 2), ref) < 1e-12);
    }
}

TEST_CASE("eval_pq agrees with explicit powers, is symmetric and commutes with G") {
    Rng rng(12);
    for (int q : {0, 1, 3, 5, 8}) {
        const Matrix w = sample_weight_with_spectrum(4, 7, 0.3, 1.7, rng);
        const Matrix p = eval_pq(w, q);
        CHECK(oracle::max_abs(p, oracle::poly_by_powers(w, q)) < 1e-12);
        CHECK(oracle::max_abs(p, oracle::transpose(p)) < 1e-10);
        const Matrix g = oracle::gram(w);
        CHECK(oracle::fro(oracle::axpby(1.0, oracle::matmul(p, g), -1.0, oracle::matmul(g, p))) < 1e-9);
    }
}

TEST_CASE("orthonormal rows are left unchanged") {
    Rng rng(13);
    const Matrix w = random_orthonormal_rows(4, 9, rng);
    for (int q : {0, 2, 4})
        CHECK(oracle::max_abs(oracle::matmul(eval_pq(w, q), w), w) < 1e-12);
}

TEST_CASE("approximation error examples") {
    Rng rng(14);
    CHECK(approximation_error(random_orthonormal_rows(3, 5, rng), 3) < 1e-13);
    const Matrix w = diag_sqrt(0.5, 1.5);
    const double e2 = approximation_error(w, 2);
    const double d0 = 0.5 * 1.34375 * 1.34375 - 1.0, d1 = 1.5 * 0.84375 * 0.84375 - 1.0;
    CHECK(e2 == doctest::Approx(std::sqrt(d0 * d0 + d1 * d1)).epsilon(1e-13));
    CHECK(e2 == doctest::Approx(0.11853).epsilon(1e-4));
    CHECK(approximation_error(w, 4) < e2);
    CHECK(e2 < approximation_error(w, 0));
}

TEST_CASE("approximation error decreases in q for spectra inside (0, 2)") {
    Rng rng(15);
    for (int t = 0; t < 30; ++t) {
        const Matrix w = sample_weight_with_spectrum(6, 10, 0.5, 1.5, rng);
        double prev = approximation_error(w, 0);
        for (int q = 1; q <= 8; ++q) {
            const double e = approximation_error(w, q);
            CHECK(e <= prev + 1e-15);
            prev = e;
        }
        CHECK(prev < 5e-3);
    }
}

TEST_CASE("sampled weights have the requested spectrum") {
    Rng rng(16);
    const Matrix w = sample_weight_with_spectrum(4, 6, 0.5, 1.5, rng);
    for (double ev : gram_spectrum(w)) {
        CHECK(ev >= 0.5 - 1e-12);
        CHECK(ev <= 1.5 + 1e-12);
    }
    const Matrix one = sample_weight_with_spectrum(3, 6, 1.0, 1.0, rng);
    CHECK(oracle::max_abs(oracle::gram(one), oracle::identity(3)) < 1e-13);
    CHECK_THROWS_AS(sample_weight_with_spectrum(5, 4, 0.5, 1.5, rng), ShapeError);
}

TEST_CASE("non-finite input is rejected by construction") {
    CHECK_THROWS_AS(Matrix(1, 2, std::vector<double>{1.0, std::nan("")}), InputError);
    Matrix w(2, 2);
    w(0, 0) = std::nan("");
    CHECK_THROWS_AS(eval_pq(w, 2), InputError);
}
