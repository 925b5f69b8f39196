#pragma once

// Penalty baselines with closed-form gradients.

#include "aonkit/linalg.hpp"

namespace aonkit {

enum class PenaltyKind { none, orthonormal, weight_decay };

struct PenaltyConfig {
    PenaltyKind kind = PenaltyKind::none;
    double beta = 10.0;
};

// (1/m^2) * || W W^T - I ||_F^2
double orth_penalty(const Matrix& w);

// (4/m^2) * (W W^T - I) W
Matrix orth_penalty_grad(const Matrix& w);

// coeff * W. Throws InputError for negative coeff.
Matrix weight_decay_grad(const Matrix& w, double coeff);

// Value and beta-scaled gradient of the configured penalty for one weight.
double penalty_value(const PenaltyConfig& cfg, const Matrix& w);
Matrix penalty_grad(const PenaltyConfig& cfg, const Matrix& w);

} // namespace aonkit
