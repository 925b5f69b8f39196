#pragma once

// Dense row-major double precision matrices and vectors.
//
// Values are plain value types: copying copies the storage, operations
// return new objects. Construction from caller-supplied data rejects
// non-finite entries; results of arithmetic are not rechecked.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace aonkit {

class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
    // Throws InputError on non-finite entries.
    explicit Vector(std::vector<double> data);
    Vector(std::initializer_list<double> values) : Vector(std::vector<double>(values)) {}

    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> span() { return data_; }
    std::span<const double> span() const { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool operator==(const Vector&) const = default;

private:
    std::vector<double> data_;
};

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    // Throws ShapeError if data.size() != rows*cols, InputError on NaN/Inf.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    // Row-list literal, e.g. Matrix::from_rows({{1, 2}, {3, 4}}).
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> span() { return data_; }
    std::span<const double> span() const { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool all_finite() const;

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

// a * b. Throws ShapeError unless a.cols() == b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);
// a * b^T (rows of a dotted with rows of b).
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// a^T * b.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix identity(std::size_t n);

// W * W^T, symmetrised as (G + G^T) / 2.
Matrix gram(const Matrix& w);

double frobenius_norm(const Matrix& a);
// Sum over entries of a .* b.
double frobenius_inner(const Matrix& a, const Matrix& b);
double max_abs_diff(const Matrix& a, const Matrix& b);

// u * v^T.
Matrix outer(const Vector& u, const Vector& v);
Vector matvec(const Matrix& a, const Vector& x);
// a^T * x.
Vector matvec_t(const Matrix& a, const Vector& x);
double norm2(const Vector& x);
double dot(const Vector& a, const Vector& b);

// Evaluates sum_k coeffs[k] * (G - I)^k by Horner's scheme in (G - I),
// using coeffs.size() - 1 matrix products. G must be square.
Matrix matrix_polynomial_horner(std::span<const double> coeffs, const Matrix& g);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
// descending. Iterates until the off-diagonal Frobenius norm drops below
// 1e-12 (relative to the input norm for inputs larger than 1).
std::vector<double> jacobi_eigenvalues(const Matrix& sym);

// Largest singular value: sqrt of the largest eigenvalue of a^T a from
// jacobi_eigenvalues. Independent of the power-iteration path; used as the
// reference in tests and diagnostics.
double spectral_norm_oracle(const Matrix& a);

using Rng = std::mt19937_64;

Matrix random_gaussian(std::size_t rows, std::size_t cols, Rng& rng, double stddev = 1.0);
// rows x cols with orthonormal rows (rows <= cols), by Gram-Schmidt on a
// Gaussian draw.
Matrix random_orthonormal_rows(std::size_t rows, std::size_t cols, Rng& rng);

} // namespace aonkit
