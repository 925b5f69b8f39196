#include "aonkit/regularize.hpp"

#include "aonkit/error.hpp"

#include <cmath>

namespace aonkit {

namespace {

Matrix gram_minus_identity(const Matrix& w) {
    Matrix d = gram(w);
    for (std::size_t i = 0; i < d.rows(); ++i) d(i, i) -= 1.0;
    return d;
}

} // namespace

double orth_penalty(const Matrix& w) {
    if (w.rows() == 0) return 0.0;
    const double m = static_cast<double>(w.rows());
    const double f = frobenius_norm(gram_minus_identity(w));
    return f * f / (m * m);
}

Matrix orth_penalty_grad(const Matrix& w) {
    if (w.rows() == 0) return w;
    const double m = static_cast<double>(w.rows());
    return (4.0 / (m * m)) * matmul(gram_minus_identity(w), w);
}

Matrix weight_decay_grad(const Matrix& w, double coeff) {
    if (!(coeff >= 0.0) || !std::isfinite(coeff)) throw InputError("weight_decay_grad: coeff must be >= 0");
    return coeff * w;
}

double penalty_value(const PenaltyConfig& cfg, const Matrix& w) {
    switch (cfg.kind) {
    case PenaltyKind::orthonormal: return cfg.beta * orth_penalty(w);
    case PenaltyKind::weight_decay: {
        const double f = frobenius_norm(w);
        return 0.5 * cfg.beta * f * f;
    }
    case PenaltyKind::none: break;
    }
    return 0.0;
}

Matrix penalty_grad(const PenaltyConfig& cfg, const Matrix& w) {
    switch (cfg.kind) {
    case PenaltyKind::orthonormal: return cfg.beta * orth_penalty_grad(w);
    case PenaltyKind::weight_decay: return weight_decay_grad(w, cfg.beta);
    case PenaltyKind::none: break;
    }
    return Matrix(w.rows(), w.cols());
}

} // namespace aonkit
