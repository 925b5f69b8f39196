#include "aonkit/layers.hpp"

#include "aonkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace aonkit {

namespace {

const TensorBlob& require_blob(const std::vector<TensorBlob>& blobs, const std::string& name, std::size_t count) {
    for (const auto& b : blobs)
        if (b.name == name) {
            if (b.data.size() != count) throw FormatError("checkpoint: tensor '" + name + "' has the wrong size");
            return b;
        }
    throw FormatError("checkpoint: missing tensor '" + name + "'");
}

} // namespace

// ---------------------------------------------------------------------------
// BatchNormLayer
// ---------------------------------------------------------------------------

BatchNormLayer::BatchNormLayer(std::size_t channels, double eps, double momentum)
    : channels_(channels),
      eps_(eps),
      momentum_(momentum),
      gamma_(channels, 1.0),
      beta_(channels, 0.0),
      running_mean_(channels, 0.0),
      running_var_(channels, 1.0),
      grad_gamma_(channels),
      grad_beta_(channels) {}

Tensor4 BatchNormLayer::forward(const Tensor4& x, Pass pass) {
    if (x.c() != channels_)
        throw ShapeError("batchnorm: input has " + std::to_string(x.c()) + " channels, expected " +
                         std::to_string(channels_));
    const std::size_t n = x.n(), hw = x.h() * x.w();
    const double count = static_cast<double>(n * hw);
    batch_stats_ = pass != Pass::infer && !frozen_;
    if (batch_stats_ && n < 2) throw InputError("batchnorm: batch size must be >= 2 in training mode");

    xhat_ = Tensor4(x.n(), x.c(), x.h(), x.w());
    inv_std_ = Vector(channels_);
    Tensor4 out(x.n(), x.c(), x.h(), x.w());
    for (std::size_t c = 0; c < channels_; ++c) {
        double mean = running_mean_[c];
        double var = running_var_[c];
        if (batch_stats_) {
            double s = 0.0;
            for (std::size_t b = 0; b < n; ++b)
                for (std::size_t i = 0; i < hw; ++i) s += x.sample(b)[c * hw + i];
            mean = s / count;
            double ss = 0.0;
            for (std::size_t b = 0; b < n; ++b)
                for (std::size_t i = 0; i < hw; ++i) {
                    const double d = x.sample(b)[c * hw + i] - mean;
                    ss += d * d;
                }
            var = ss / count;
            if (pass == Pass::train) {
                running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean;
                running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * var;
            }
        }
        const double inv_std = 1.0 / std::sqrt(var + eps_);
        inv_std_[c] = inv_std;
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t i = 0; i < hw; ++i) {
                const std::size_t idx = c * hw + i;
                const double xh = (x.sample(b)[idx] - mean) * inv_std;
                xhat_.sample(b)[idx] = xh;
                out.sample(b)[idx] = gamma_[c] * xh + beta_[c];
            }
    }
    return out;
}

Tensor4 BatchNormLayer::backward(const Tensor4& grad_out) {
    if (grad_out.dims() != xhat_.dims()) throw ShapeError("batchnorm backward: bad gradient shape");
    const std::size_t n = grad_out.n(), hw = grad_out.h() * grad_out.w();
    const double count = static_cast<double>(n * hw);
    Tensor4 grad_x(grad_out.n(), grad_out.c(), grad_out.h(), grad_out.w());
    for (std::size_t c = 0; c < channels_; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t i = 0; i < hw; ++i) {
                const std::size_t idx = c * hw + i;
                sum_dy += grad_out.sample(b)[idx];
                sum_dy_xhat += grad_out.sample(b)[idx] * xhat_.sample(b)[idx];
            }
        grad_gamma_[c] += sum_dy_xhat;
        grad_beta_[c] += sum_dy;
        const double k = gamma_[c] * inv_std_[c];
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t i = 0; i < hw; ++i) {
                const std::size_t idx = c * hw + i;
                const double dy = grad_out.sample(b)[idx];
                grad_x.sample(b)[idx] =
                    batch_stats_ ? k / count * (count * dy - sum_dy - xhat_.sample(b)[idx] * sum_dy_xhat) : k * dy;
            }
    }
    return grad_x;
}

std::vector<ParamRef> BatchNormLayer::params() {
    return {{"bn.gamma", gamma_.span(), grad_gamma_.span(), nullptr},
            {"bn.beta", beta_.span(), grad_beta_.span(), nullptr}};
}

void BatchNormLayer::zero_grad() {
    grad_gamma_ = Vector(channels_);
    grad_beta_ = Vector(channels_);
}

nlohmann::json BatchNormLayer::describe() const {
    return {{"type", kind()}, {"channels", channels_}, {"eps", eps_}, {"momentum", momentum_}, {"frozen", frozen_}};
}

std::vector<TensorBlob> BatchNormLayer::export_tensors() const {
    return {{"gamma", {channels_}, gamma_.values()},
            {"beta", {channels_}, beta_.values()},
            {"running_mean", {channels_}, running_mean_.values()},
            {"running_var", {channels_}, running_var_.values()}};
}

void BatchNormLayer::import_tensors(const std::vector<TensorBlob>& blobs) {
    gamma_ = Vector(require_blob(blobs, "gamma", channels_).data);
    beta_ = Vector(require_blob(blobs, "beta", channels_).data);
    running_mean_ = Vector(require_blob(blobs, "running_mean", channels_).data);
    running_var_ = Vector(require_blob(blobs, "running_var", channels_).data);
    for (double v : running_var_.span())
        if (v < 0.0) throw FormatError("checkpoint: negative running variance");
    zero_grad();
}

// ---------------------------------------------------------------------------
// ReLU / max-pool
// ---------------------------------------------------------------------------

double relu(double x) { return x > 0.0 ? x : 0.0; }

Tensor4 ReluLayer::forward(const Tensor4& x, Pass) {
    x_ = x;
    Tensor4 out = x;
    for (double& v : out.span()) v = relu(v);
    return out;
}

Tensor4 ReluLayer::backward(const Tensor4& grad_out) {
    if (grad_out.dims() != x_.dims()) throw ShapeError("relu backward: bad gradient shape");
    Tensor4 g = grad_out;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!(x_.span()[i] > 0.0)) g.span()[i] = 0.0;
    return g;
}

nlohmann::json ReluLayer::describe() const { return {{"type", kind()}}; }

Tensor4 MaxPoolLayer::forward(const Tensor4& x, Pass) {
    in_dims_ = x.dims();
    const std::size_t oh = x.h() / 2, ow = x.w() / 2;
    if (oh == 0 || ow == 0) throw ShapeError("maxpool: input smaller than 2x2");
    Tensor4 out(x.n(), x.c(), oh, ow);
    argmax_.assign(out.size(), 0);
    std::size_t o = 0;
    for (std::size_t b = 0; b < x.n(); ++b)
        for (std::size_t c = 0; c < x.c(); ++c)
            for (std::size_t y = 0; y < oh; ++y)
                for (std::size_t xx = 0; xx < ow; ++xx, ++o) {
                    double best = -std::numeric_limits<double>::infinity();
                    std::size_t best_idx = 0;
                    for (std::size_t dy = 0; dy < 2; ++dy)
                        for (std::size_t dx = 0; dx < 2; ++dx) {
                            const std::size_t iy = 2 * y + dy, ix = 2 * xx + dx;
                            const std::size_t idx = ((b * x.c() + c) * x.h() + iy) * x.w() + ix;
                            if (x.span()[idx] > best) {
                                best = x.span()[idx];
                                best_idx = idx;
                            }
                        }
                    out.span()[o] = best;
                    argmax_[o] = best_idx;
                }
    return out;
}

Tensor4 MaxPoolLayer::backward(const Tensor4& grad_out) {
    if (grad_out.size() != argmax_.size()) throw ShapeError("maxpool backward: bad gradient shape");
    Tensor4 g(in_dims_[0], in_dims_[1], in_dims_[2], in_dims_[3]);
    for (std::size_t o = 0; o < argmax_.size(); ++o) g.span()[argmax_[o]] += grad_out.span()[o];
    return g;
}

nlohmann::json MaxPoolLayer::describe() const { return {{"type", kind()}}; }

// ---------------------------------------------------------------------------
// Softmax cross-entropy
// ---------------------------------------------------------------------------

std::pair<double, Vector> softmax_cross_entropy(const Vector& logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
        throw InputError("softmax_cross_entropy: label " + std::to_string(label) + " out of range");
    const double mx = *std::max_element(logits.span().begin(), logits.span().end());
    double z = 0.0;
    for (double l : logits.span()) z += std::exp(l - mx);
    const double log_z = mx + std::log(z);
    Vector grad(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) grad[k] = std::exp(logits[k] - log_z);
    grad[static_cast<std::size_t>(label)] -= 1.0;
    return {log_z - logits[static_cast<std::size_t>(label)], std::move(grad)};
}

LossResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
    if (logits.rows() != labels.size()) throw ShapeError("softmax_cross_entropy: batch size mismatch");
    LossResult r;
    r.grad = Matrix(logits.rows(), logits.cols());
    if (logits.rows() == 0) return r;
    const double inv_n = 1.0 / static_cast<double>(logits.rows());
    for (std::size_t b = 0; b < logits.rows(); ++b) {
        const auto row = logits.row(b);
        auto [loss, grad] = softmax_cross_entropy(Vector(std::vector<double>(row.begin(), row.end())), labels[b]);
        r.loss += loss * inv_n;
        const auto best = std::max_element(row.begin(), row.end()) - row.begin();
        if (best == labels[b]) ++r.correct;
        for (std::size_t k = 0; k < logits.cols(); ++k) r.grad(b, k) = grad[k] * inv_n;
    }
    return r;
}

} // namespace aonkit
