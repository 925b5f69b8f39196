#pragma once

// Truncated Taylor series of (W W^T)^(-1/2) around the identity.
//
// The scalar series of x^(-1/2) at x = 1 is sum_k c_k (x - 1)^k with
// c_0 = 1 and c_k = c_{k-1} * (-(2k - 1) / (2k)). Substituting G = W W^T
// gives P_q(W) = sum_{k<=q} c_k (G - I)^k, which converges when every
// eigenvalue of G lies in (0, 2). No range check is made: outside that
// range the polynomial is still well defined and the spectral normaliser
// downstream keeps the product bounded.

#include "aonkit/linalg.hpp"

#include <vector>

namespace aonkit {

struct TaylorCoeffs {
    int order = 0;
    std::vector<double> coeffs; // c_0 .. c_order, powers of (x - 1)
};

// Throws InputError for q < 0.
TaylorCoeffs taylor_coeffs(int q);

// Scalar polynomial p_q(x) = sum_k c_k (x - 1)^k.
double eval_scalar_pq(double x, int q);

// P_q(W) as an m x m matrix. Throws InputError on non-finite W.
Matrix eval_pq(const Matrix& w, int q);

// || P_q G P_q^T - I ||_F, the distance of the rows of P_q(W) W from an
// orthonormal set.
double approximation_error(const Matrix& w, int q);

// Eigenvalues of G = W W^T (descending), for diagnosing whether the series
// is in its convergence region.
std::vector<double> gram_spectrum(const Matrix& w);

// Draws an m x n weight whose Gram eigenvalues are uniform in [lo, hi]:
// W = U diag(sqrt(lambda)) V with U orthogonal (m x m) and V having
// orthonormal rows (m x n). Requires m <= n and 0 <= lo <= hi.
Matrix sample_weight_with_spectrum(std::size_t m, std::size_t n, double lo, double hi, Rng& rng);

} // namespace aonkit
