#pragma once

// Approximated orthonormal normalisation of a weight matrix.
//
// Standard mode:   M = P_q(W) W,  sigma = u^T M v,  h(W) = M / sigma
// Pre-SN mode:     sigma = u^T W v,  Wn = W / sigma,  h(W) = P_q(Wn) Wn
//
// P_q is the order-q Taylor polynomial of (W W^T)^(-1/2) (see orthopoly.hpp)
// and (u, v) is the persistent power-iteration state of the matrix being
// divided by its spectral norm. In training, each forward performs one
// power-iteration update and then uses the updated (u, v); at inference u and
// v are left untouched, or h is replaced outright by a frozen copy.
//
// Gradients treat u and v as constants.

#include "aonkit/linalg.hpp"
#include "aonkit/specnorm.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace aonkit {

enum class AonMode { standard, pre_sn };

struct AonParam {
    Matrix w;
    int q = 2;
    PowerIterState state; // dims of w (both modes normalise an m x n matrix)
    Vector gamma;         // per-row output scale, length m
    std::optional<Matrix> frozen_h;
    AonMode mode = AonMode::standard;

    // gamma = 1, state seeded from `seed`.
    static AonParam create(Matrix w, int q, std::uint64_t seed, AonMode mode = AonMode::standard);

    bool frozen() const { return frozen_h.has_value(); }
};

struct AonForwardCache {
    Matrix g;       // Gram matrix of the polynomial's argument (empty when q = 0)
    Matrix p;       // P_q (empty when q = 0, meaning the identity)
    Matrix product; // P_q(X) X, X = W (standard) or W / sigma(W) (pre-SN)
    double sigma = 0.0;
    AonMode mode = AonMode::standard;
    int q = 0;
    Matrix input;               // X above
    std::vector<Matrix> horner; // Horner partial sums R_1 .. R_q
    Vector u;
    Vector v;
};

// One power-iteration update on P_q(W) W followed by normalisation. A frozen
// parameter returns frozen_h and an empty cache. Throws DegenerateWeightError
// when sigma < 1e-30, InputError if called on a pre-SN parameter.
std::pair<Matrix, AonForwardCache> aon_forward(AonParam& param);

// Remark-style variant: spectral-normalise W first, then apply P_q.
std::pair<Matrix, AonForwardCache> aon_forward_pre_sn(AonParam& param);

// Dispatches on param.mode.
std::pair<Matrix, AonForwardCache> aon_forward_any(AonParam& param);

// h(W) for the given fixed (u, v), without touching the parameter's state.
// Used by inference and by finite-difference probes.
std::pair<Matrix, AonForwardCache> aon_transform(const Matrix& w, int q, AonMode mode, const Vector& u,
                                                 const Vector& v);

// h(W) with the parameter's current (u, v), or frozen_h if frozen.
Matrix aon_infer(const AonParam& param);

// Reverse-mode gradient of a scalar loss w.r.t. W given dL/dh.
Matrix aon_backward(const AonForwardCache& cache, const AonParam& param, const Matrix& grad_h);

// z_i * gamma_i. Throws ShapeError on length mismatch.
Vector apply_gamma(const Vector& z, const Vector& gamma);

// Stores h computed with the current state (no power-iteration update) so
// later forwards return it unchanged. Mutating w afterwards has no effect on
// the output.
AonParam freeze(AonParam param);

// || sigma^2 h h^T - I ||_F = || M M^T - I ||_F for standard mode.
double orthonormality_deviation(const AonForwardCache& cache);

} // namespace aonkit
