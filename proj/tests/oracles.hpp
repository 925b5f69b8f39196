#pragma once

// Reference implementations used only by tests. Plain loops, no calls into
// the kernels under test.

#include "aonkit/linalg.hpp"
#include "aonkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using aonkit::Matrix;

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            long double s = 0.0L;
            for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
            c(i, j) = static_cast<double>(s);
        }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline Matrix gram(const Matrix& w) { return oracle::matmul(w, oracle::transpose(w)); }

inline Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

inline Matrix axpby(double a, const Matrix& x, double b, const Matrix& y) {
    Matrix r(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) r.span()[i] = a * x.span()[i] + b * y.span()[i];
    return r;
}

inline double fro(const Matrix& a) {
    long double s = 0.0L;
    for (double x : a.span()) s += static_cast<long double>(x) * x;
    return std::sqrt(static_cast<double>(s));
}

inline double max_abs(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.span()[i] - b.span()[i]));
    return m;
}

// Largest singular value: cyclic Jacobi on the smaller Gram matrix, long double.
inline double top_singular(const Matrix& a) {
    const bool wide = a.rows() <= a.cols();
    const std::size_t n = wide ? a.rows() : a.cols();
    std::vector<long double> s(n * n, 0.0L);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            long double acc = 0.0L;
            const std::size_t k_end = wide ? a.cols() : a.rows();
            for (std::size_t k = 0; k < k_end; ++k)
                acc += wide ? static_cast<long double>(a(i, k)) * a(j, k) : static_cast<long double>(a(k, i)) * a(k, j);
            s[i * n + j] = acc;
        }
    for (int sweep = 0; sweep < 100; ++sweep) {
        long double off = 0.0L;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += s[p * n + q] * s[p * n + q];
        if (off < 1e-40L) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const long double apq = s[p * n + q];
                if (apq == 0.0L) continue;
                const long double theta = (s[q * n + q] - s[p * n + p]) / (2.0L * apq);
                const long double t = (theta >= 0 ? 1.0L : -1.0L) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0L));
                const long double c = 1.0L / std::sqrt(t * t + 1.0L), sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const long double kp = s[k * n + p], kq = s[k * n + q];
                    s[k * n + p] = c * kp - sn * kq;
                    s[k * n + q] = sn * kp + c * kq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const long double pk = s[p * n + k], qk = s[q * n + k];
                    s[p * n + k] = c * pk - sn * qk;
                    s[q * n + k] = sn * pk + c * qk;
                }
            }
    }
    long double top = 0.0L;
    for (std::size_t i = 0; i < n; ++i) top = std::max(top, s[i * n + i]);
    return static_cast<double>(std::sqrt(top));
}

// Taylor coefficient of x^(-1/2) around 1 from the k-th derivative:
// f^(k)(1) = prod_{j<k} (-1/2 - j), divided by k!.
inline double inv_sqrt_taylor(int k) {
    double deriv = 1.0;
    for (int j = 0; j < k; ++j) deriv *= -0.5 - j;
    double fact = 1.0;
    for (int j = 2; j <= k; ++j) fact *= j;
    return deriv / fact;
}

// sum_k c_k (G - I)^k by explicit powers (no Horner).
inline Matrix poly_by_powers(const Matrix& w, int q) {
    const Matrix g = oracle::gram(w);
    const Matrix e = oracle::axpby(1.0, g, -1.0, oracle::identity(g.rows()));
    Matrix power = oracle::identity(g.rows());
    Matrix acc(g.rows(), g.rows());
    for (int k = 0; k <= q; ++k) {
        acc = oracle::axpby(1.0, acc, inv_sqrt_taylor(k), power);
        power = oracle::matmul(power, e);
    }
    return acc;
}

// Central differences of f over every entry of x.
inline std::vector<double> fd_gradient(const std::function<double()>& f, std::span<double> x, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f();
        x[i] = x0 - h;
        const double fm = f();
        x[i] = x0;
        g[i] = (fp - fm) / (2 * h);
    }
    return g;
}

inline double rel_err(std::span<const double> a, std::span<const double> b) {
    double d = 0.0, ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        ma = std::max(ma, std::abs(a[i]));
        mb = std::max(mb, std::abs(b[i]));
    }
    return d / std::max({ma, mb, 1e-6});
}

// Direct 6-loop cross-correlation. kernel: d_o x d_i x kh x kw.
inline aonkit::Tensor4 conv2d(const aonkit::Tensor4& x, const aonkit::Tensor4& k, std::size_t stride,
                              std::size_t pad) {
    const std::size_t oh = (x.h() + 2 * pad - k.h()) / stride + 1;
    const std::size_t ow = (x.w() + 2 * pad - k.w()) / stride + 1;
    aonkit::Tensor4 y(x.n(), k.n(), oh, ow);
    for (std::size_t b = 0; b < x.n(); ++b)
        for (std::size_t o = 0; o < k.n(); ++o)
            for (std::size_t r = 0; r < oh; ++r)
                for (std::size_t c = 0; c < ow; ++c) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < k.c(); ++i)
                        for (std::size_t dy = 0; dy < k.h(); ++dy)
                            for (std::size_t dx = 0; dx < k.w(); ++dx) {
                                const long iy = static_cast<long>(r * stride + dy) - static_cast<long>(pad);
                                const long ix = static_cast<long>(c * stride + dx) - static_cast<long>(pad);
                                if (iy < 0 || ix < 0 || iy >= static_cast<long>(x.h()) ||
                                    ix >= static_cast<long>(x.w()))
                                    continue;
                                s += x(b, i, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix)) *
                                     k(o, i, dy, dx);
                            }
                    y(b, o, r, c) = s;
                }
    return y;
}

} // namespace oracle
