#include "aonkit/tensor.hpp"

#include "aonkit/error.hpp"

#include <algorithm>
#include <string>

namespace aonkit {

Tensor4::Tensor4(std::array<std::size_t, 4> dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != dims_[0] * dims_[1] * dims_[2] * dims_[3])
        throw ShapeError("Tensor4: data length " + std::to_string(data_.size()) + " does not match dims");
}

Matrix flatten_rows(const Tensor4& t) {
    Matrix m(t.n(), t.sample_size());
    std::copy(t.span().begin(), t.span().end(), m.span().begin());
    return m;
}

Tensor4 unflatten_rows(const Matrix& m, std::size_t c, std::size_t h, std::size_t w) {
    if (m.cols() != c * h * w) throw ShapeError("unflatten_rows: column count does not match c*h*w");
    return Tensor4({m.rows(), c, h, w}, m.values());
}

Matrix conv_reshape(const Tensor4& weight) { return flatten_rows(weight); }

Tensor4 conv_unreshape(const Matrix& m, std::array<std::size_t, 4> dims) {
    if (m.rows() != dims[0] || m.cols() != dims[1] * dims[2] * dims[3])
        throw ShapeError("conv_unreshape: matrix size does not match kernel dims");
    return Tensor4(dims, m.values());
}

} // namespace aonkit
