#include "aonkit/layers.hpp"

#include "aonkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aonkit {

const char* norm_mode_name(NormMode m) {
    switch (m) {
    case NormMode::plain: return "plain";
    case NormMode::sn: return "sn";
    case NormMode::aon: return "aon";
    }
    return "plain";
}

NormMode parse_norm_mode(const std::string& s) {
    if (s == "plain") return NormMode::plain;
    if (s == "sn") return NormMode::sn;
    if (s == "aon") return NormMode::aon;
    throw ConfigError("unknown norm mode '" + s + "'");
}

namespace {

// Semi-orthogonal: orthonormal rows when rows <= cols, orthonormal columns
// otherwise. Every singular value is 1, so the Gram spectrum starts in {0, 1}.
Matrix semi_orthogonal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    if (rows <= cols) return random_orthonormal_rows(rows, cols, rng);
    return transpose(random_orthonormal_rows(cols, rows, rng));
}

const TensorBlob* find_blob(const std::vector<TensorBlob>& blobs, const std::string& name) {
    for (const auto& b : blobs)
        if (b.name == name) return &b;
    return nullptr;
}

const TensorBlob& require_blob(const std::vector<TensorBlob>& blobs, const std::string& name, std::size_t count) {
    const TensorBlob* b = find_blob(blobs, name);
    if (b == nullptr) throw FormatError("checkpoint: missing tensor '" + name + "'");
    if (b->data.size() != count) throw FormatError("checkpoint: tensor '" + name + "' has the wrong size");
    return *b;
}

std::span<double> as_span(Vector& v) { return v.span(); }

} // namespace

// ---------------------------------------------------------------------------
// NormalizedWeight
// ---------------------------------------------------------------------------

NormalizedWeight::NormalizedWeight(Matrix w, const WeightOptions& opts, std::uint64_t seed) : opts_(opts) {
    const int q = opts.norm == NormMode::sn ? 0 : opts.q;
    const AonMode mode = opts.norm == NormMode::sn ? AonMode::standard : opts.aon_mode;
    const std::size_t m = w.rows();
    param_ = AonParam::create(std::move(w), q, seed, mode);
    if (opts.use_bias) bias_ = Vector(m);
    zero_grad();
}

const Matrix& NormalizedWeight::effective(Pass pass) {
    cache_ = AonForwardCache{};
    if (param_.frozen()) {
        h_ = *param_.frozen_h;
    } else if (opts_.norm == NormMode::plain) {
        h_ = param_.w;
    } else if (pass == Pass::train) {
        auto [h, cache] = aon_forward_any(param_);
        h_ = std::move(h);
        cache_ = std::move(cache);
    } else if (pass == Pass::probe) {
        auto [h, cache] = aon_transform(param_.w, param_.q, param_.mode, param_.state.u, param_.state.v);
        h_ = std::move(h);
        cache_ = std::move(cache);
    } else {
        h_ = aon_infer(param_);
    }
    return h_;
}

void NormalizedWeight::backward_weight(const Matrix& grad_h) {
    if (param_.frozen()) throw InputError("backward through a frozen weight");
    if (opts_.norm == NormMode::plain) {
        grad_w_ += grad_h;
        return;
    }
    grad_w_ += aon_backward(cache_, param_, grad_h);
}

void NormalizedWeight::zero_grad() {
    grad_w_ = Matrix(param_.w.rows(), param_.w.cols());
    grad_gamma_ = Vector(param_.w.rows());
    grad_bias_ = Vector(opts_.use_bias ? param_.w.rows() : 0);
}

void NormalizedWeight::append_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".w", param_.w.span(), grad_w_.span(), &param_.w});
    if (opts_.use_gamma) out.push_back({prefix + ".gamma", as_span(param_.gamma), grad_gamma_.span(), nullptr});
    if (opts_.use_bias) out.push_back({prefix + ".bias", as_span(bias_), grad_bias_.span(), nullptr});
}

void NormalizedWeight::freeze() {
    if (param_.frozen()) return;
    if (opts_.norm == NormMode::plain)
        param_.frozen_h = param_.w;
    else
        param_ = aonkit::freeze(std::move(param_));
}

std::pair<double, double> NormalizedWeight::diagnostics() const {
    auto deviation = [](const Matrix& m) {
        Matrix d = matmul_nt(m, m);
        for (std::size_t i = 0; i < d.rows(); ++i) d(i, i) -= 1.0;
        return frobenius_norm(d);
    };
    if (param_.frozen()) return {deviation(*param_.frozen_h), 1.0};
    if (opts_.norm == NormMode::plain) {
        const Matrix& w = param_.w;
        const double sigma = w.rows() < w.cols() ? spectral_norm_oracle(transpose(w)) : spectral_norm_oracle(w);
        return {deviation(w), sigma};
    }
    auto [h, cache] = aon_transform(param_.w, param_.q, param_.mode, param_.state.u, param_.state.v);
    return {orthonormality_deviation(cache), cache.sigma};
}

nlohmann::json NormalizedWeight::describe() const {
    return {{"rows", rows()},
            {"cols", cols()},
            {"norm", norm_mode_name(opts_.norm)},
            {"q", param_.q},
            {"pre_sn", param_.mode == AonMode::pre_sn},
            {"gamma", opts_.use_gamma},
            {"bias", opts_.use_bias},
            {"frozen", param_.frozen()}};
}

void NormalizedWeight::export_tensors(std::vector<TensorBlob>& out) const {
    const std::size_t m = rows(), n = cols();
    if (param_.frozen()) {
        out.push_back({"h", {m, n}, param_.frozen_h->values()});
    } else {
        out.push_back({"w", {m, n}, param_.w.values()});
        if (opts_.norm != NormMode::plain) {
            out.push_back({"u", {m}, param_.state.u.values()});
            out.push_back({"v", {n}, param_.state.v.values()});
        }
    }
    if (opts_.use_gamma) out.push_back({"gamma", {m}, param_.gamma.values()});
    if (opts_.use_bias) out.push_back({"bias", {m}, bias_.values()});
}

void NormalizedWeight::import_tensors(const std::vector<TensorBlob>& blobs) {
    const std::size_t m = rows(), n = cols();
    if (const TensorBlob* h = find_blob(blobs, "h")) {
        if (h->data.size() != m * n) throw FormatError("checkpoint: tensor 'h' has the wrong size");
        param_.frozen_h = Matrix(m, n, h->data);
        param_.w = *param_.frozen_h;
    } else {
        param_.w = Matrix(m, n, require_blob(blobs, "w", m * n).data);
        param_.frozen_h.reset();
        if (opts_.norm != NormMode::plain) {
            param_.state.u = Vector(require_blob(blobs, "u", m).data);
            param_.state.v = Vector(require_blob(blobs, "v", n).data);
        }
    }
    if (opts_.use_gamma) param_.gamma = Vector(require_blob(blobs, "gamma", m).data);
    if (opts_.use_bias) bias_ = Vector(require_blob(blobs, "bias", m).data);
    zero_grad();
}

// ---------------------------------------------------------------------------
// DenseLayer
// ---------------------------------------------------------------------------

DenseLayer::DenseLayer(std::size_t in, std::size_t out, const WeightOptions& opts, std::uint64_t seed)
    : weight_(semi_orthogonal(out, in, seed), opts, seed ^ 0x9e3779b97f4a7c15ULL) {}

DenseLayer::DenseLayer(Matrix w, const WeightOptions& opts, std::uint64_t seed) : weight_(std::move(w), opts, seed) {}

Tensor4 DenseLayer::forward(const Tensor4& x, Pass pass) {
    if (x.sample_size() != weight_.cols())
        throw ShapeError("dense: input width " + std::to_string(x.sample_size()) + " != " +
                         std::to_string(weight_.cols()));
    in_dims_ = x.dims();
    x_ = flatten_rows(x);
    const Matrix& h = weight_.effective(pass);
    z_ = matmul_nt(x_, h);

    const auto& gamma = weight_.param().gamma;
    const bool use_gamma = weight_.options().use_gamma;
    const bool use_bias = weight_.options().use_bias;
    Tensor4 out(x.n(), h.rows(), 1, 1);
    for (std::size_t b = 0; b < x.n(); ++b)
        for (std::size_t j = 0; j < h.rows(); ++j) {
            double y = z_(b, j);
            if (use_gamma) y *= gamma[j];
            if (use_bias) y += weight_.bias()[j];
            out(b, j, 0, 0) = y;
        }
    return out;
}

Tensor4 DenseLayer::backward(const Tensor4& grad_out) {
    const std::size_t batch = x_.rows();
    const std::size_t m = weight_.rows();
    if (grad_out.n() != batch || grad_out.sample_size() != m) throw ShapeError("dense backward: bad gradient shape");

    const auto& gamma = weight_.param().gamma;
    const bool use_gamma = weight_.options().use_gamma;
    Matrix gz(batch, m);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t j = 0; j < m; ++j) {
            const double g = grad_out(b, j, 0, 0);
            if (use_gamma) weight_.grad_gamma()[j] += g * z_(b, j);
            if (weight_.options().use_bias) weight_.grad_bias()[j] += g;
            gz(b, j) = use_gamma ? g * gamma[j] : g;
        }
    const Matrix& h = weight_.last_effective();
    Matrix grad_x = matmul(gz, h);
    weight_.backward_weight(matmul_tn(gz, x_));

    Tensor4 out(in_dims_, std::vector<double>(grad_x.span().begin(), grad_x.span().end()));
    return out;
}

std::vector<ParamRef> DenseLayer::params() {
    std::vector<ParamRef> out;
    weight_.append_params("dense", out);
    return out;
}

nlohmann::json DenseLayer::describe() const {
    auto j = weight_.describe();
    j["type"] = kind();
    return j;
}

std::vector<TensorBlob> DenseLayer::export_tensors() const {
    std::vector<TensorBlob> out;
    weight_.export_tensors(out);
    return out;
}

void DenseLayer::import_tensors(const std::vector<TensorBlob>& blobs) { weight_.import_tensors(blobs); }

// ---------------------------------------------------------------------------
// ConvLayer
// ---------------------------------------------------------------------------

ConvLayer::ConvLayer(std::size_t in_channels, std::size_t out_channels, ConvGeometry geom,
                     const WeightOptions& opts, std::uint64_t seed)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      geom_(geom),
      weight_(semi_orthogonal(out_channels, in_channels * geom.kh * geom.kw, seed), opts,
              seed ^ 0x9e3779b97f4a7c15ULL) {
    if (geom.stride == 0) throw ConfigError("conv: stride must be >= 1");
}

ConvLayer::ConvLayer(const Tensor4& kernel, ConvGeometry geom, const WeightOptions& opts, std::uint64_t seed)
    : in_channels_(kernel.c()), out_channels_(kernel.n()), geom_(geom), weight_(conv_reshape(kernel), opts, seed) {
    geom_.kh = kernel.h();
    geom_.kw = kernel.w();
    if (geom_.stride == 0) throw ConfigError("conv: stride must be >= 1");
}

std::array<std::size_t, 4> ConvLayer::kernel_dims() const {
    return {out_channels_, in_channels_, geom_.kh, geom_.kw};
}

Tensor4 ConvLayer::forward(const Tensor4& x, Pass pass) {
    if (x.c() != in_channels_)
        throw ShapeError("conv: input has " + std::to_string(x.c()) + " channels, expected " +
                         std::to_string(in_channels_));
    const std::size_t ph = x.h() + 2 * geom_.padding;
    const std::size_t pw = x.w() + 2 * geom_.padding;
    if (ph < geom_.kh || pw < geom_.kw) throw ShapeError("conv: kernel larger than padded input");
    in_dims_ = x.dims();
    out_h_ = (ph - geom_.kh) / geom_.stride + 1;
    out_w_ = (pw - geom_.kw) / geom_.stride + 1;
    const std::size_t positions = out_h_ * out_w_;
    const std::size_t k = in_channels_ * geom_.kh * geom_.kw;

    const Matrix& h = weight_.effective(pass);
    const auto& gamma = weight_.param().gamma;
    const bool use_gamma = weight_.options().use_gamma;
    const bool use_bias = weight_.options().use_bias;

    cols_.assign(x.n(), Matrix());
    z_.assign(x.n(), Matrix());
    Tensor4 out(x.n(), out_channels_, out_h_, out_w_);
    const auto pad = static_cast<std::ptrdiff_t>(geom_.padding);
    for (std::size_t b = 0; b < x.n(); ++b) {
        Matrix cols(positions, k);
        for (std::size_t oy = 0; oy < out_h_; ++oy)
            for (std::size_t ox = 0; ox < out_w_; ++ox) {
                const std::size_t p = oy * out_w_ + ox;
                for (std::size_t ci = 0; ci < in_channels_; ++ci)
                    for (std::size_t ky = 0; ky < geom_.kh; ++ky) {
                        const auto iy = static_cast<std::ptrdiff_t>(oy * geom_.stride + ky) - pad;
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(x.h())) continue;
                        for (std::size_t kx = 0; kx < geom_.kw; ++kx) {
                            const auto ix = static_cast<std::ptrdiff_t>(ox * geom_.stride + kx) - pad;
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(x.w())) continue;
                            cols(p, (ci * geom_.kh + ky) * geom_.kw + kx) =
                                x(b, ci, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
                        }
                    }
            }
        Matrix z = matmul_nt(cols, h);
        for (std::size_t co = 0; co < out_channels_; ++co)
            for (std::size_t p = 0; p < positions; ++p) {
                double y = z(p, co);
                if (use_gamma) y *= gamma[co];
                if (use_bias) y += weight_.bias()[co];
                out(b, co, p / out_w_, p % out_w_) = y;
            }
        cols_[b] = std::move(cols);
        z_[b] = std::move(z);
    }
    return out;
}

Tensor4 ConvLayer::backward(const Tensor4& grad_out) {
    const std::size_t batch = in_dims_[0];
    if (grad_out.n() != batch || grad_out.c() != out_channels_ || grad_out.h() != out_h_ || grad_out.w() != out_w_)
        throw ShapeError("conv backward: bad gradient shape");
    const std::size_t positions = out_h_ * out_w_;
    const auto& gamma = weight_.param().gamma;
    const bool use_gamma = weight_.options().use_gamma;
    const bool use_bias = weight_.options().use_bias;
    const Matrix& h = weight_.last_effective();

    Tensor4 grad_x(in_dims_[0], in_dims_[1], in_dims_[2], in_dims_[3]);
    Matrix grad_h(h.rows(), h.cols());
    const auto pad = static_cast<std::ptrdiff_t>(geom_.padding);
    for (std::size_t b = 0; b < batch; ++b) {
        Matrix gz(positions, out_channels_);
        for (std::size_t co = 0; co < out_channels_; ++co)
            for (std::size_t p = 0; p < positions; ++p) {
                const double g = grad_out(b, co, p / out_w_, p % out_w_);
                if (use_gamma) weight_.grad_gamma()[co] += g * z_[b](p, co);
                if (use_bias) weight_.grad_bias()[co] += g;
                gz(p, co) = use_gamma ? g * gamma[co] : g;
            }
        grad_h += matmul_tn(gz, cols_[b]);
        const Matrix grad_cols = matmul(gz, h);
        for (std::size_t oy = 0; oy < out_h_; ++oy)
            for (std::size_t ox = 0; ox < out_w_; ++ox) {
                const std::size_t p = oy * out_w_ + ox;
                for (std::size_t ci = 0; ci < in_channels_; ++ci)
                    for (std::size_t ky = 0; ky < geom_.kh; ++ky) {
                        const auto iy = static_cast<std::ptrdiff_t>(oy * geom_.stride + ky) - pad;
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_dims_[2])) continue;
                        for (std::size_t kx = 0; kx < geom_.kw; ++kx) {
                            const auto ix = static_cast<std::ptrdiff_t>(ox * geom_.stride + kx) - pad;
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_dims_[3])) continue;
                            grad_x(b, ci, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix)) +=
                                grad_cols(p, (ci * geom_.kh + ky) * geom_.kw + kx);
                        }
                    }
            }
    }
    weight_.backward_weight(grad_h);
    return grad_x;
}

std::vector<ParamRef> ConvLayer::params() {
    std::vector<ParamRef> out;
    weight_.append_params("conv", out);
    return out;
}

nlohmann::json ConvLayer::describe() const {
    auto j = weight_.describe();
    j["type"] = kind();
    j["in_channels"] = in_channels_;
    j["out_channels"] = out_channels_;
    j["kh"] = geom_.kh;
    j["kw"] = geom_.kw;
    j["stride"] = geom_.stride;
    j["padding"] = geom_.padding;
    return j;
}

std::vector<TensorBlob> ConvLayer::export_tensors() const {
    std::vector<TensorBlob> out;
    weight_.export_tensors(out);
    // Kernels are stored in their natural 4-D shape; the payload order is
    // identical to the reshaped matrix.
    for (auto& b : out)
        if (b.name == "w" || b.name == "h") b.shape = {out_channels_, in_channels_, geom_.kh, geom_.kw};
    return out;
}

void ConvLayer::import_tensors(const std::vector<TensorBlob>& blobs) { weight_.import_tensors(blobs); }

} // namespace aonkit
