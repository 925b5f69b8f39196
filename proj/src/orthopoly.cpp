#include "aonkit/orthopoly.hpp"

#include "aonkit/error.hpp"

#include <cmath>

namespace aonkit {

TaylorCoeffs taylor_coeffs(int q) {
    if (q < 0) throw InputError("taylor_coeffs: order must be >= 0");
    TaylorCoeffs t;
    t.order = q;
    t.coeffs.reserve(static_cast<std::size_t>(q) + 1);
    t.coeffs.push_back(1.0);
    for (int k = 1; k <= q; ++k)
        t.coeffs.push_back(t.coeffs.back() * (-static_cast<double>(2 * k - 1) / static_cast<double>(2 * k)));
    return t;
}

double eval_scalar_pq(double x, int q) {
    const auto t = taylor_coeffs(q);
    double r = 0.0;
    for (std::size_t k = t.coeffs.size(); k-- > 0;) r = r * (x - 1.0) + t.coeffs[k];
    return r;
}

Matrix eval_pq(const Matrix& w, int q) {
    if (!w.all_finite()) throw InputError("eval_pq: non-finite weight entry");
    const auto t = taylor_coeffs(q);
    return matrix_polynomial_horner(t.coeffs, gram(w));
}

double approximation_error(const Matrix& w, int q) {
    if (!w.all_finite()) throw InputError("approximation_error: non-finite weight entry");
    const Matrix g = gram(w);
    const Matrix p = matrix_polynomial_horner(taylor_coeffs(q).coeffs, g);
    Matrix d = matmul_nt(matmul(p, g), p);
    for (std::size_t i = 0; i < d.rows(); ++i) d(i, i) -= 1.0;
    return frobenius_norm(d);
}

std::vector<double> gram_spectrum(const Matrix& w) { return jacobi_eigenvalues(gram(w)); }

Matrix sample_weight_with_spectrum(std::size_t m, std::size_t n, double lo, double hi, Rng& rng) {
    if (m > n) throw ShapeError("sample_weight_with_spectrum: need rows <= cols");
    if (!(lo >= 0.0 && lo <= hi)) throw InputError("sample_weight_with_spectrum: need 0 <= lo <= hi");
    const Matrix u = random_orthonormal_rows(m, m, rng);
    const Matrix v = random_orthonormal_rows(m, n, rng);
    std::uniform_real_distribution<double> eig(lo, hi);
    std::vector<double> s(m);
    for (double& x : s) x = std::sqrt(lo == hi ? lo : eig(rng));
    Matrix us = u;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) us(i, j) *= s[j];
    return matmul(us, v);
}

} // namespace aonkit
