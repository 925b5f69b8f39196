#include "aonkit/linalg.hpp"

#include "aonkit/error.hpp"
#include "aonkit/simd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aonkit {

namespace {

bool finite_range(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

std::string dims(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": shape mismatch " + dims(a) + " vs " + dims(b));
}

} // namespace

Vector::Vector(std::vector<double> data) : data_(std::move(data)) {
    if (!finite_range(data_)) throw InputError("Vector: non-finite entry");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw ShapeError("Matrix: data length " + std::to_string(data_.size()) + " != " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
    if (!finite_range(data_)) throw InputError("Matrix: non-finite entry");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("Matrix::from_rows: ragged rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

bool Matrix::all_finite() const { return finite_range(data_); }

Matrix& Matrix::operator+=(const Matrix& o) {
    require_same_shape(*this, o, "add");
    simd::axpy(1.0, o.span(), span());
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    require_same_shape(*this, o, "sub");
    simd::axpy(-1.0, o.span(), span());
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: " + dims(a) + " * " + dims(b));
    Matrix c(a.rows(), b.cols());
    const auto& k = simd::kernels();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* out = c.row(i).data();
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double aip = a(i, p);
            if (aip != 0.0) k.axpy(aip, b.row(p).data(), out, b.cols());
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ShapeError("matmul_nt: " + dims(a) + " * " + dims(b) + "^T");
    Matrix c(a.rows(), b.rows());
    const auto& k = simd::kernels();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = k.dot(a.row(i).data(), b.row(j).data(), a.cols());
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeError("matmul_tn: " + dims(a) + "^T * " + dims(b));
    Matrix c(a.cols(), b.cols());
    const auto& k = simd::kernels();
    for (std::size_t p = 0; p < a.rows(); ++p) {
        const double* brow = b.row(p).data();
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double api = a(p, i);
            if (api != 0.0) k.axpy(api, brow, c.row(i).data(), b.cols());
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Matrix add(const Matrix& a, const Matrix& b) { return a + b; }

Matrix scale(const Matrix& a, double s) { return s * a; }

Matrix identity(std::size_t n) { return Matrix::identity(n); }

Matrix gram(const Matrix& w) {
    Matrix g = matmul_nt(w, w);
    const std::size_t m = g.rows();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double s = 0.5 * (g(i, j) + g(j, i));
            g(i, j) = s;
            g(j, i) = s;
        }
    return g;
}

double frobenius_norm(const Matrix& a) {
    // Scaled accumulation so huge or tiny entries do not over/underflow.
    double scale_ = 0.0;
    for (double x : a.span()) scale_ = std::max(scale_, std::abs(x));
    if (scale_ == 0.0) return 0.0;
    double acc = 0.0;
    for (double x : a.span()) {
        const double y = x / scale_;
        acc += y * y;
    }
    return scale_ * std::sqrt(acc);
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "frobenius_inner");
    return simd::dot(a.span(), b.span());
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.span()[i] - b.span()[i]));
    return d;
}

Matrix outer(const Vector& u, const Vector& v) {
    Matrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
    return m;
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw ShapeError("matvec: " + dims(a) + " * vector " + std::to_string(x.size()));
    Vector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = simd::dot(a.row(i), x.span());
    return y;
}

Vector matvec_t(const Matrix& a, const Vector& x) {
    if (a.rows() != x.size())
        throw ShapeError("matvec_t: " + dims(a) + "^T * vector " + std::to_string(x.size()));
    Vector y(a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) simd::axpy(x[i], a.row(i), y.span());
    return y;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
    return simd::dot(a.span(), b.span());
}

double norm2(const Vector& x) { return std::sqrt(simd::dot(x.span(), x.span())); }

Matrix matrix_polynomial_horner(std::span<const double> coeffs, const Matrix& g) {
    if (g.rows() != g.cols()) throw ShapeError("matrix_polynomial_horner: G must be square, got " + dims(g));
    const std::size_t n = g.rows();
    if (coeffs.empty()) return Matrix(n, n);
    Matrix e = g;
    for (std::size_t i = 0; i < n; ++i) e(i, i) -= 1.0;

    const std::size_t q = coeffs.size() - 1;
    Matrix r = coeffs[q] * Matrix::identity(n);
    for (std::size_t k = q; k-- > 0;) {
        r = matmul(r, e);
        for (std::size_t i = 0; i < n; ++i) r(i, i) += coeffs[k];
    }
    return r;
}

std::vector<double> jacobi_eigenvalues(const Matrix& sym) {
    if (sym.rows() != sym.cols()) throw ShapeError("jacobi_eigenvalues: matrix must be square");
    const std::size_t n = sym.rows();
    Matrix a = sym;

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    const double tol = 1e-12 * std::max(1.0, frobenius_norm(sym));
    for (int sweep = 0; sweep < 100 && off_norm() >= tol; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
}

double spectral_norm_oracle(const Matrix& a) {
    if (a.empty()) return 0.0;
    Matrix ata(a.cols(), a.cols());
    // Plain loops: the oracle must not share kernels with the code it checks.
    for (std::size_t i = 0; i < a.cols(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
            ata(i, j) = s;
        }
    const auto eig = jacobi_eigenvalues(ata);
    return std::sqrt(std::max(0.0, eig.front()));
}

Matrix random_gaussian(std::size_t rows, std::size_t cols, Rng& rng, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    Matrix m(rows, cols);
    for (double& x : m.span()) x = dist(rng);
    return m;
}

Matrix random_orthonormal_rows(std::size_t rows, std::size_t cols, Rng& rng) {
    if (rows > cols) throw ShapeError("random_orthonormal_rows: rows must not exceed cols");
    Matrix m = random_gaussian(rows, cols, rng);
    for (std::size_t i = 0; i < rows; ++i) {
        auto ri = m.row(i);
        // Two passes of modified Gram-Schmidt keep the rows orthonormal to
        // machine precision.
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j < i; ++j) {
                const double proj = simd::dot(ri, m.row(j));
                simd::axpy(-proj, m.row(j), ri);
            }
        const double nrm = std::sqrt(simd::dot(ri, ri));
        for (double& x : ri) x /= nrm;
    }
    return m;
}

} // namespace aonkit
