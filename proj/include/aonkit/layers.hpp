#pragma once

// Minimal layer zoo with exact backward passes.
//
// Activations travel as Tensor4 (N, C, H, W); dense layers flatten C*H*W and
// emit (N, m, 1, 1). Weight layers hold their matrix inside a NormalizedWeight
// which applies AON (any q), SN (AON with q = 0) or nothing.

#include "aonkit/aon.hpp"
#include "aonkit/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aonkit {

// train: updates power-iteration state and BN running statistics.
// probe: training semantics (batch statistics, current u/v) without mutating
//        any persistent state; used by finite-difference checks.
// infer: running statistics, fixed u/v or frozen h.
enum class Pass { train, probe, infer };

enum class NormMode { plain, sn, aon };

const char* norm_mode_name(NormMode m);
NormMode parse_norm_mode(const std::string& s);

struct ParamRef {
    std::string name;
    std::span<double> value;
    std::span<double> grad;
    const Matrix* weight = nullptr; // set for penalty-eligible weight matrices
};

struct TensorBlob {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> data;
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual std::string kind() const = 0;
    virtual Tensor4 forward(const Tensor4& x, Pass pass) = 0;
    // Accumulates parameter gradients; returns dL/dx.
    virtual Tensor4 backward(const Tensor4& grad_out) = 0;
    virtual std::vector<ParamRef> params() { return {}; }
    virtual void zero_grad() {}
    virtual void freeze() {}
    virtual bool frozen() const { return false; }
    virtual std::unique_ptr<Layer> clone() const = 0;

    virtual nlohmann::json describe() const = 0;
    virtual std::vector<TensorBlob> export_tensors() const { return {}; }
    virtual void import_tensors(const std::vector<TensorBlob>& blobs) { (void)blobs; }
};

struct WeightOptions {
    NormMode norm = NormMode::aon;
    int q = 2;
    AonMode aon_mode = AonMode::standard;
    bool use_gamma = true;
    bool use_bias = false;
};

// A weight matrix plus its normalisation, per-row gamma and optional bias.
class NormalizedWeight {
public:
    NormalizedWeight() = default;
    NormalizedWeight(Matrix w, const WeightOptions& opts, std::uint64_t seed);

    const WeightOptions& options() const { return opts_; }
    const AonParam& param() const { return param_; }
    AonParam& param() { return param_; }
    const Vector& bias() const { return bias_; }
    Vector& bias() { return bias_; }
    std::size_t rows() const { return param_.w.rows(); }
    std::size_t cols() const { return param_.w.cols(); }

    // Effective weight h for this pass (W itself in plain mode).
    const Matrix& effective(Pass pass);
    const Matrix& last_effective() const { return h_; }
    // dL/dh -> accumulates dL/dW.
    void backward_weight(const Matrix& grad_h);

    Matrix& grad_w() { return grad_w_; }
    Vector& grad_gamma() { return grad_gamma_; }
    Vector& grad_bias() { return grad_bias_; }

    void zero_grad();
    void append_params(const std::string& prefix, std::vector<ParamRef>& out);
    void freeze();
    bool frozen() const { return param_.frozen(); }

    // Deviation from orthonormality and the current normaliser.
    //   normalised: || M M^T - I ||_F with M = P_q(W) W, sigma = u^T M v
    //   plain:      || W W^T - I ||_F, sigma = spectral norm of W
    std::pair<double, double> diagnostics() const;

    nlohmann::json describe() const;
    void export_tensors(std::vector<TensorBlob>& out) const;
    void import_tensors(const std::vector<TensorBlob>& blobs);

private:
    WeightOptions opts_;
    AonParam param_;
    Vector bias_;
    Matrix h_;
    AonForwardCache cache_;
    Matrix grad_w_;
    Vector grad_gamma_;
    Vector grad_bias_;
};

class DenseLayer : public Layer {
public:
    DenseLayer(std::size_t in, std::size_t out, const WeightOptions& opts, std::uint64_t seed);
    DenseLayer(Matrix w, const WeightOptions& opts, std::uint64_t seed);

    std::string kind() const override { return "dense"; }
    Tensor4 forward(const Tensor4& x, Pass pass) override;
    Tensor4 backward(const Tensor4& grad_out) override;
    std::vector<ParamRef> params() override;
    void zero_grad() override { weight_.zero_grad(); }
    void freeze() override { weight_.freeze(); }
    bool frozen() const override { return weight_.frozen(); }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }
    nlohmann::json describe() const override;
    std::vector<TensorBlob> export_tensors() const override;
    void import_tensors(const std::vector<TensorBlob>& blobs) override;

    NormalizedWeight& weight() { return weight_; }
    const NormalizedWeight& weight() const { return weight_; }

private:
    NormalizedWeight weight_;
    std::array<std::size_t, 4> in_dims_{};
    Matrix x_;
    Matrix z_; // before gamma / bias
};

struct ConvGeometry {
    std::size_t kh = 3;
    std::size_t kw = 3;
    std::size_t stride = 1;
    std::size_t padding = 1;
};

// Cross-correlation (no kernel flip) via im2col.
class ConvLayer : public Layer {
public:
    ConvLayer(std::size_t in_channels, std::size_t out_channels, ConvGeometry geom, const WeightOptions& opts,
              std::uint64_t seed);
    ConvLayer(const Tensor4& kernel, ConvGeometry geom, const WeightOptions& opts, std::uint64_t seed);

    std::string kind() const override { return "conv"; }
    Tensor4 forward(const Tensor4& x, Pass pass) override;
    Tensor4 backward(const Tensor4& grad_out) override;
    std::vector<ParamRef> params() override;
    void zero_grad() override { weight_.zero_grad(); }
    void freeze() override { weight_.freeze(); }
    bool frozen() const override { return weight_.frozen(); }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<ConvLayer>(*this); }
    nlohmann::json describe() const override;
    std::vector<TensorBlob> export_tensors() const override;
    void import_tensors(const std::vector<TensorBlob>& blobs) override;

    NormalizedWeight& weight() { return weight_; }
    const NormalizedWeight& weight() const { return weight_; }
    std::array<std::size_t, 4> kernel_dims() const;
    const ConvGeometry& geometry() const { return geom_; }

private:
    std::size_t in_channels_;
    std::size_t out_channels_;
    ConvGeometry geom_;
    NormalizedWeight weight_;
    std::array<std::size_t, 4> in_dims_{};
    std::size_t out_h_ = 0;
    std::size_t out_w_ = 0;
    std::vector<Matrix> cols_; // per sample: (out_h*out_w) x (d_i*kh*kw)
    std::vector<Matrix> z_;    // per sample: (out_h*out_w) x d_o, before gamma / bias
};

// Per-channel batch normalisation over (N, H, W).
class BatchNormLayer : public Layer {
public:
    explicit BatchNormLayer(std::size_t channels, double eps = 1e-5, double momentum = 0.1);

    std::string kind() const override { return "batchnorm"; }
    Tensor4 forward(const Tensor4& x, Pass pass) override;
    Tensor4 backward(const Tensor4& grad_out) override;
    std::vector<ParamRef> params() override;
    void zero_grad() override;
    void freeze() override { frozen_ = true; }
    bool frozen() const override { return frozen_; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNormLayer>(*this); }
    nlohmann::json describe() const override;
    std::vector<TensorBlob> export_tensors() const override;
    void import_tensors(const std::vector<TensorBlob>& blobs) override;

    Vector& gamma() { return gamma_; }
    Vector& beta() { return beta_; }
    Vector& running_mean() { return running_mean_; }
    Vector& running_var() { return running_var_; }

private:
    std::size_t channels_;
    double eps_;
    double momentum_;
    bool frozen_ = false;
    Vector gamma_, beta_, running_mean_, running_var_;
    Vector grad_gamma_, grad_beta_;
    Tensor4 xhat_;
    Vector inv_std_;
    bool batch_stats_ = false; // whether the last forward used batch statistics
};

class ReluLayer : public Layer {
public:
    std::string kind() const override { return "relu"; }
    Tensor4 forward(const Tensor4& x, Pass pass) override;
    Tensor4 backward(const Tensor4& grad_out) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<ReluLayer>(*this); }
    nlohmann::json describe() const override;

private:
    Tensor4 x_;
};

// 2x2 max pooling with stride 2; odd trailing rows/columns are dropped.
class MaxPoolLayer : public Layer {
public:
    std::string kind() const override { return "maxpool"; }
    Tensor4 forward(const Tensor4& x, Pass pass) override;
    Tensor4 backward(const Tensor4& grad_out) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPoolLayer>(*this); }
    nlohmann::json describe() const override;

private:
    std::array<std::size_t, 4> in_dims_{};
    std::vector<std::size_t> argmax_;
};

double relu(double x);

struct LossResult {
    double loss = 0.0;   // mean over the batch
    Matrix grad;         // dL/dlogits, already divided by the batch size
    std::size_t correct = 0;
};

// Single sample: loss = -log softmax(logits)[label], grad = softmax - onehot.
// Throws InputError for a label outside [0, logits.size()).
std::pair<double, Vector> softmax_cross_entropy(const Vector& logits, int label);

// Batch of logits (N x K) against N labels, mean reduction.
LossResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

} // namespace aonkit
