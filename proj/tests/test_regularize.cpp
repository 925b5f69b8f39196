#include "aonkit/error.hpp"
#include "aonkit/regularize.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace aonkit;

namespace {

// (1/m^2) sum_{i,j} (<w_i, w_j> - delta_ij)^2 with explicit row products.
double naive_penalty(const Matrix& w) {
    const std::size_t m = w.rows();
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double d = 0.0;
            for (std::size_t k = 0; k < w.cols(); ++k) d += w(i, k) * w(j, k);
            if (i == j) d -= 1.0;
            s += d * d;
        }
    return s / static_cast<double>(m * m);
}

} // namespace

TEST_CASE("penalty examples") {
    Rng rng(51);
    CHECK(orth_penalty(random_orthonormal_rows(3, 5, rng)) < 1e-28);
    const Matrix two = scale(Matrix::identity(2), 2.0);
    CHECK(orth_penalty(two) == doctest::Approx(4.5).epsilon(1e-15));
    CHECK(orth_penalty_grad(two) == scale(Matrix::identity(2), 6.0));
    CHECK(orth_penalty(Matrix(3, 4)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("penalty matches the double-loop oracle") {
    Rng rng(52);
    for (int t = 0; t < 10; ++t) {
        const Matrix w = random_gaussian(2 + t % 4, 6, rng);
        CHECK(orth_penalty(w) == doctest::Approx(naive_penalty(w)).epsilon(1e-12));
    }
}

TEST_CASE("penalty gradient matches finite differences") {
    Rng rng(53);
    for (auto [m, n] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 5}, {5, 3}, {4, 4}}) {
        Matrix w = scale(random_gaussian(m, n, rng), 0.5);
        const auto num = oracle::fd_gradient([&] { return naive_penalty(w); }, w.span());
        CHECK(oracle::rel_err(orth_penalty_grad(w).span(), num) < 1e-6);
    }
}

TEST_CASE("penalty is invariant to row permutation and right orthogonal factors") {
    Rng rng(54);
    const Matrix w = random_gaussian(4, 6, rng);
    Matrix perm = w;
    for (std::size_t j = 0; j < 6; ++j) std::swap(perm(0, j), perm(3, j));
    CHECK(orth_penalty(perm) == doctest::Approx(orth_penalty(w)).epsilon(1e-12));
    const Matrix q = random_orthonormal_rows(6, 6, rng);
    CHECK(orth_penalty(oracle::matmul(w, q)) == doctest::Approx(orth_penalty(w)).epsilon(1e-12));
}

TEST_CASE("gradient descent on the penalty reaches orthonormal rows") {
    Rng rng(55);
    Matrix w = scale(random_gaussian(3, 6, rng), 0.5);
    for (int i = 0; i < 3000; ++i) w = w - scale(orth_penalty_grad(w), 0.5);
    CHECK(orth_penalty(w) < 1e-6);
}

TEST_CASE("weight decay and penalty dispatch") {
    const Matrix w = Matrix::from_rows({{1, -2}, {3, 0}});
    CHECK(weight_decay_grad(w, 0.1) == scale(w, 0.1));
    CHECK(weight_decay_grad(w, 0.0) == Matrix(2, 2));
    CHECK_THROWS_AS(weight_decay_grad(w, -1.0), InputError);

    PenaltyConfig none;
    CHECK(penalty_value(none, w) == 0.0);
    CHECK(penalty_grad(none, w) == Matrix(2, 2));

    PenaltyConfig orth{PenaltyKind::orthonormal, 10.0};
    CHECK(penalty_value(orth, w) == doctest::Approx(10.0 * orth_penalty(w)));
    CHECK(penalty_grad(orth, w) == scale(orth_penalty_grad(w), 10.0));
    PenaltyConfig zero{PenaltyKind::orthonormal, 0.0};
    CHECK(penalty_grad(zero, w) == Matrix(2, 2));

    PenaltyConfig wd{PenaltyKind::weight_decay, 0.01};
    CHECK(penalty_value(wd, w) == doctest::Approx(0.5 * 0.01 * 14.0));
    CHECK(penalty_grad(wd, w) == scale(w, 0.01));
}
