#include "aonkit/aon.hpp"

#include "aonkit/error.hpp"
#include "aonkit/orthopoly.hpp"

#include <cmath>
#include <string>

namespace aonkit {

namespace {

constexpr double kDegenerateSigma = 1e-30;

// Fills g, p, horner, product for X = cache.input.
void polynomial_product(AonForwardCache& cache) {
    if (cache.q == 0) {
        cache.product = cache.input;
        return;
    }
    const auto coeffs = taylor_coeffs(cache.q).coeffs;
    cache.g = gram(cache.input);
    const std::size_t m = cache.g.rows();
    Matrix e = cache.g;
    for (std::size_t i = 0; i < m; ++i) e(i, i) -= 1.0;

    // Same recurrence as matrix_polynomial_horner, keeping partial sums.
    const std::size_t q = static_cast<std::size_t>(cache.q);
    cache.horner.assign(q, Matrix());
    Matrix r = coeffs[q] * Matrix::identity(m);
    for (std::size_t k = q; k-- > 0;) {
        cache.horner[k] = r; // R_{k+1}
        r = matmul(r, e);
        for (std::size_t i = 0; i < m; ++i) r(i, i) += coeffs[k];
    }
    cache.p = std::move(r);
    cache.product = matmul(cache.p, cache.input);
}

// dL/dX for M = P_q(X) X given dL/dM.
Matrix polynomial_product_backward(const AonForwardCache& cache, const Matrix& grad_m) {
    if (cache.q == 0) return grad_m;
    Matrix grad_x = matmul_tn(cache.p, grad_m);

    Matrix e = cache.g;
    for (std::size_t i = 0; i < e.rows(); ++i) e(i, i) -= 1.0;

    Matrix grad_r = matmul_nt(grad_m, cache.input); // dL/dP = dL/dR_0
    Matrix grad_e(e.rows(), e.cols());
    for (std::size_t k = 0; k < cache.horner.size(); ++k) {
        grad_e += matmul_tn(cache.horner[k], grad_r);
        if (k + 1 < cache.horner.size()) grad_r = matmul_nt(grad_r, e);
    }
    // G = X X^T  =>  dL/dX += (dL/dG + dL/dG^T) X
    Matrix sym = grad_e + transpose(grad_e);
    grad_x += matmul(sym, cache.input);
    return grad_x;
}

// Division rule for Y = X / sigma with sigma = u^T X v, (u, v) fixed.
Matrix sigma_division_backward(const Matrix& grad_y, const Matrix& x, double sigma, const Vector& u,
                               const Vector& v) {
    const double coef = frobenius_inner(grad_y, x) / (sigma * sigma);
    Matrix grad = (1.0 / sigma) * grad_y;
    for (std::size_t i = 0; i < grad.rows(); ++i) {
        const double cu = coef * u[i];
        for (std::size_t j = 0; j < grad.cols(); ++j) grad(i, j) -= cu * v[j];
    }
    return grad;
}

void check_sigma(double sigma) {
    if (!(std::abs(sigma) >= kDegenerateSigma))
        throw DegenerateWeightError("AON: spectral normaliser vanished (all-zero weight?)");
}

void check_weight(const Matrix& w) {
    if (!w.all_finite()) throw InputError("AON: non-finite weight entry");
}

} // namespace

AonParam AonParam::create(Matrix w, int q, std::uint64_t seed, AonMode mode) {
    if (q < 0) throw InputError("AonParam: order must be >= 0");
    AonParam p;
    p.state = init_state(w.rows(), w.cols(), seed);
    p.gamma = Vector(w.rows(), 1.0);
    p.w = std::move(w);
    p.q = q;
    p.mode = mode;
    return p;
}

std::pair<Matrix, AonForwardCache> aon_forward(AonParam& param) {
    if (param.frozen()) return {*param.frozen_h, AonForwardCache{}};
    if (param.mode != AonMode::standard) throw InputError("aon_forward: parameter is in pre-SN mode");
    check_weight(param.w);

    AonForwardCache cache;
    cache.mode = AonMode::standard;
    cache.q = param.q;
    cache.input = param.w;
    polynomial_product(cache);

    const double sigma = power_step_inplace(cache.product, param.state);
    check_sigma(sigma);
    cache.sigma = sigma;
    cache.u = param.state.u;
    cache.v = param.state.v;
    return {(1.0 / sigma) * cache.product, std::move(cache)};
}

std::pair<Matrix, AonForwardCache> aon_forward_pre_sn(AonParam& param) {
    if (param.frozen()) return {*param.frozen_h, AonForwardCache{}};
    if (param.mode != AonMode::pre_sn) throw InputError("aon_forward_pre_sn: parameter is in standard mode");
    check_weight(param.w);

    const double sigma_w = power_step_inplace(param.w, param.state);
    check_sigma(sigma_w);

    AonForwardCache cache;
    cache.mode = AonMode::pre_sn;
    cache.q = param.q;
    cache.sigma = sigma_w;
    cache.u = param.state.u;
    cache.v = param.state.v;
    cache.input = (1.0 / sigma_w) * param.w;
    polynomial_product(cache);
    Matrix h = cache.product;
    return {std::move(h), std::move(cache)};
}

std::pair<Matrix, AonForwardCache> aon_forward_any(AonParam& param) {
    return param.mode == AonMode::standard ? aon_forward(param) : aon_forward_pre_sn(param);
}

std::pair<Matrix, AonForwardCache> aon_transform(const Matrix& w, int q, AonMode mode, const Vector& u,
                                                 const Vector& v) {
    check_weight(w);
    AonForwardCache cache;
    cache.mode = mode;
    cache.q = q;
    cache.u = u;
    cache.v = v;
    if (mode == AonMode::standard) {
        cache.input = w;
        polynomial_product(cache);
        cache.sigma = rayleigh_sigma(cache.product, u, v);
        check_sigma(cache.sigma);
        return {(1.0 / cache.sigma) * cache.product, std::move(cache)};
    }
    cache.sigma = rayleigh_sigma(w, u, v);
    check_sigma(cache.sigma);
    cache.input = (1.0 / cache.sigma) * w;
    polynomial_product(cache);
    Matrix h = cache.product;
    return {std::move(h), std::move(cache)};
}

Matrix aon_infer(const AonParam& param) {
    if (param.frozen()) return *param.frozen_h;
    return aon_transform(param.w, param.q, param.mode, param.state.u, param.state.v).first;
}

Matrix aon_backward(const AonForwardCache& cache, const AonParam& param, const Matrix& grad_h) {
    if (cache.input.empty()) throw InputError("aon_backward: no forward cache (frozen parameter?)");
    if (!grad_h.same_shape(cache.product) || !param.w.same_shape(cache.product))
        throw ShapeError("aon_backward: gradient shape does not match the forward pass");

    if (cache.mode == AonMode::standard) {
        const Matrix grad_m = sigma_division_backward(grad_h, cache.product, cache.sigma, cache.u, cache.v);
        return polynomial_product_backward(cache, grad_m);
    }
    const Matrix grad_wn = polynomial_product_backward(cache, grad_h);
    return sigma_division_backward(grad_wn, param.w, cache.sigma, cache.u, cache.v);
}

Vector apply_gamma(const Vector& z, const Vector& gamma) {
    if (z.size() != gamma.size())
        throw ShapeError("apply_gamma: length " + std::to_string(z.size()) + " vs " + std::to_string(gamma.size()));
    Vector out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = gamma[i] * z[i];
    return out;
}

AonParam freeze(AonParam param) {
    if (!param.frozen()) param.frozen_h = aon_infer(param);
    return param;
}

double orthonormality_deviation(const AonForwardCache& cache) {
    // Pre-SN has no second normaliser, so product is h itself there.
    Matrix d = matmul_nt(cache.product, cache.product);
    for (std::size_t i = 0; i < d.rows(); ++i) d(i, i) -= 1.0;
    return frobenius_norm(d);
}

} // namespace aonkit
