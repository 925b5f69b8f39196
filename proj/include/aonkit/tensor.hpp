#pragma once

#include "aonkit/linalg.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace aonkit {

// NCHW activations, or (d_o, d_i, kh, kw) convolution kernels.
class Tensor4 {
public:
    Tensor4() = default;
    Tensor4(std::size_t n, std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
        : dims_{n, c, h, w}, data_(n * c * h * w, fill) {}
    // Throws ShapeError if the data length does not match.
    Tensor4(std::array<std::size_t, 4> dims, std::vector<double> data);

    std::size_t n() const { return dims_[0]; }
    std::size_t c() const { return dims_[1]; }
    std::size_t h() const { return dims_[2]; }
    std::size_t w() const { return dims_[3]; }
    const std::array<std::size_t, 4>& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }
    // Elements per leading index (c * h * w).
    std::size_t sample_size() const { return dims_[1] * dims_[2] * dims_[3]; }

    double& operator()(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
        return data_[((n * dims_[1] + c) * dims_[2] + y) * dims_[3] + x];
    }
    double operator()(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
        return data_[((n * dims_[1] + c) * dims_[2] + y) * dims_[3] + x];
    }

    std::span<double> span() { return data_; }
    std::span<const double> span() const { return data_; }
    std::span<const double> sample(std::size_t i) const { return {data_.data() + i * sample_size(), sample_size()}; }
    std::span<double> sample(std::size_t i) { return {data_.data() + i * sample_size(), sample_size()}; }

    bool operator==(const Tensor4&) const = default;

private:
    std::array<std::size_t, 4> dims_{0, 0, 0, 0};
    std::vector<double> data_;
};

// Leading index as rows, everything else flattened: (n) x (c*h*w).
Matrix flatten_rows(const Tensor4& t);
// Inverse of flatten_rows; m.cols() must equal c*h*w.
Tensor4 unflatten_rows(const Matrix& m, std::size_t c, std::size_t h, std::size_t w);

// d_o x d_i x h x w kernel -> d_o x (d_i*h*w) matrix, and back. Bijective.
Matrix conv_reshape(const Tensor4& weight);
Tensor4 conv_unreshape(const Matrix& m, std::array<std::size_t, 4> dims);

} // namespace aonkit
