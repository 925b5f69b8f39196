#include "aonkit/specnorm.hpp"

#include "aonkit/error.hpp"

#include <cmath>
#include <string>

namespace aonkit {

namespace {

constexpr double kZeroGuard = 1e-30;

void normalize_in_place(Vector& x, double nrm) {
    for (double& e : x.span()) e /= nrm;
}

Vector unit_gaussian(std::size_t len, Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Vector x(len);
    double nrm = 0.0;
    // A zero draw has probability zero, but redraw rather than divide by it.
    while (nrm == 0.0) {
        for (double& e : x.span()) e = dist(rng);
        nrm = norm2(x);
    }
    normalize_in_place(x, nrm);
    return x;
}

} // namespace

PowerIterState init_state(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    if (rows == 0 || cols == 0) throw ShapeError("init_state: dimensions must be >= 1");
    Rng rng(seed);
    PowerIterState s;
    s.u = unit_gaussian(rows, rng);
    s.v = unit_gaussian(cols, rng);
    return s;
}

double power_step_inplace(const Matrix& m, PowerIterState& state) {
    if (m.rows() != state.u.size() || m.cols() != state.v.size())
        throw ShapeError("power_step: matrix " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " does not match state " + std::to_string(state.u.size()) + "x" +
                         std::to_string(state.v.size()));
    for (int it = 0; it < state.iterations_per_step; ++it) {
        Vector v = matvec_t(m, state.u);
        const double vn = norm2(v);
        if (vn < kZeroGuard) return 0.0;
        normalize_in_place(v, vn);
        Vector u = matvec(m, v);
        const double un = norm2(u);
        if (un < kZeroGuard) return 0.0;
        normalize_in_place(u, un);
        state.u = std::move(u);
        state.v = std::move(v);
    }
    return rayleigh_sigma(m, state.u, state.v);
}

std::pair<double, PowerIterState> power_step(const Matrix& m, const PowerIterState& state) {
    PowerIterState next = state;
    const double sigma = power_step_inplace(m, next);
    return {sigma, std::move(next)};
}

double rayleigh_sigma(const Matrix& m, const Vector& u, const Vector& v) { return dot(u, matvec(m, v)); }

} // namespace aonkit
