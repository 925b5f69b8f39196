#pragma once

// Online spectral-norm estimation by power iteration.
//
// The left/right singular vector estimates persist across calls so that a
// single round per training step tracks the dominant singular pair of a
// slowly changing matrix.

#include "aonkit/linalg.hpp"

#include <cstdint>
#include <utility>

namespace aonkit {

struct PowerIterState {
    Vector u; // length = rows of the normalised matrix, unit norm
    Vector v; // length = cols, unit norm
    int iterations_per_step = 1;

    bool operator==(const PowerIterState&) const = default;
};

// u, v ~ N(0, I) from a seeded generator, then L2-normalised.
PowerIterState init_state(std::size_t rows, std::size_t cols, std::uint64_t seed);

// iterations_per_step rounds of v <- normalize(M^T u), u <- normalize(M v),
// then sigma = u^T M v. If ||M^T u|| < 1e-30 the state is returned unchanged
// and sigma = 0. Throws ShapeError when dims disagree.
std::pair<double, PowerIterState> power_step(const Matrix& m, const PowerIterState& state);

// In-place form of power_step; returns sigma.
double power_step_inplace(const Matrix& m, PowerIterState& state);

// u^T M v for fixed u, v.
double rayleigh_sigma(const Matrix& m, const Vector& u, const Vector& v);

} // namespace aonkit
