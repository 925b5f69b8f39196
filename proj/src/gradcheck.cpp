#include "aonkit/error.hpp"
#include "aonkit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aonkit {

namespace {

// L(y) = sum(B .* y) + 0.25 * sum(y .* y); dL/dy = B + 0.5 y.
struct ProbeLoss {
    std::vector<double> b;

    double value(std::span<const double> y) const {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += b[i] * y[i] + 0.25 * y[i] * y[i];
        return s;
    }
    std::vector<double> grad(std::span<const double> y) const {
        std::vector<double> g(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) g[i] = b[i] + 0.5 * y[i];
        return g;
    }
};

ProbeLoss make_loss(std::size_t n, Rng& rng) {
    const Matrix b = random_gaussian(1, n, rng);
    return {std::vector<double>(b.span().begin(), b.span().end())};
}

Tensor4 random_tensor(std::size_t n, std::size_t c, std::size_t h, std::size_t w, Rng& rng) {
    Tensor4 t(n, c, h, w);
    const Matrix g = random_gaussian(1, t.size(), rng);
    std::copy(g.span().begin(), g.span().end(), t.span().begin());
    return t;
}

void corrupt_first(std::vector<double>& g) {
    double mx = 0.0;
    for (double x : g) mx = std::max(mx, std::abs(x));
    g.front() += 1e-2 * (mx + 1.0);
}

// Analytic gradients from a probe forward/backward of `layer`, compared with
// central differences of the same probe forward.
void check_layer(const std::string& name, Layer& layer, Tensor4 x, Rng& rng, double step,
                 std::vector<GradcheckEntry>& out) {
    const Tensor4 y0 = layer.forward(x, Pass::probe);
    const ProbeLoss loss = make_loss(y0.size(), rng);
    const auto gy = loss.grad(y0.span());
    layer.zero_grad();
    const auto& d = y0.dims();
    const Tensor4 gx = layer.backward(Tensor4(d, gy));

    auto objective = [&] { return loss.value(layer.forward(x, Pass::probe).span()); };
    for (auto& p : layer.params()) {
        const std::vector<double> analytic(p.grad.begin(), p.grad.end());
        const auto numeric = numeric_gradient(objective, p.value, step);
        out.push_back({name + "/" + p.name, gradient_rel_error(analytic, numeric)});
    }
    const auto numeric = numeric_gradient(objective, x.span(), step);
    out.push_back({name + "/input", gradient_rel_error(gx.span(), numeric)});
}

void check_aon(const std::string& name, const GradcheckOptions& opts, AonMode mode, Rng& rng,
               std::vector<GradcheckEntry>& out) {
    Matrix w = random_gaussian(opts.rows, opts.cols, rng, 1.0 / std::sqrt(static_cast<double>(opts.cols)));
    AonParam param = AonParam::create(w, opts.q, opts.seed + 17, mode);
    // Bring u, v close to the top singular pair first.
    for (int i = 0; i < 50; ++i) aon_forward_any(param);
    const Vector u = param.state.u, v = param.state.v;

    const auto [h, cache] = aon_transform(param.w, opts.q, mode, u, v);
    const ProbeLoss loss = make_loss(h.size(), rng);
    const auto gh = loss.grad(h.span());
    const Matrix gw = aon_backward(cache, param, Matrix(h.rows(), h.cols(), gh));
    std::vector<double> analytic(gw.span().begin(), gw.span().end());
    if (opts.corrupt) corrupt_first(analytic);

    auto objective = [&] { return loss.value(aon_transform(w, opts.q, mode, u, v).first.span()); };
    const auto numeric = numeric_gradient(objective, w.span(), opts.step);
    out.push_back({name, gradient_rel_error(analytic, numeric)});
}

} // namespace

double GradcheckReport::max_rel_err() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.max_rel_err);
    return m;
}

double gradient_rel_error(std::span<const double> analytic, std::span<const double> numeric) {
    if (analytic.size() != numeric.size()) throw ShapeError("gradient_rel_error: length mismatch");
    double diff = 0.0, ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        if (!std::isfinite(analytic[i]) || !std::isfinite(numeric[i]))
            return std::numeric_limits<double>::infinity();
        diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
        ma = std::max(ma, std::abs(analytic[i]));
        mb = std::max(mb, std::abs(numeric[i]));
    }
    return diff / std::max({ma, mb, 1e-6});
}

std::vector<double> numeric_gradient(const std::function<double()>& loss, std::span<double> values, double step) {
    if (!(step > 0.0)) throw InputError("numeric_gradient: step must be > 0");
    std::vector<double> g(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double orig = values[i];
        values[i] = orig + step;
        const double up = loss();
        values[i] = orig - step;
        const double down = loss();
        values[i] = orig;
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

GradcheckReport run_gradcheck(const GradcheckOptions& opts) {
    if (opts.q < 0) throw InputError("gradcheck: q must be >= 0");
    if (opts.rows == 0 || opts.cols == 0) throw InputError("gradcheck: empty weight shape");
    GradcheckReport report;
    auto& out = report.entries;
    Rng rng(opts.seed);

    check_aon("aon_backward", opts, AonMode::standard, rng, out);
    check_aon("aon_backward_pre_sn", opts, AonMode::pre_sn, rng, out);

    WeightOptions wo;
    wo.q = opts.q;
    wo.use_bias = true;
    {
        DenseLayer dense(opts.cols, opts.rows, wo, opts.seed + 1);
        check_layer("dense", dense, random_tensor(3, opts.cols, 1, 1, rng), rng, opts.step, out);
    }
    {
        ConvLayer conv(2, 3, ConvGeometry{}, wo, opts.seed + 2);
        check_layer("conv", conv, random_tensor(2, 2, 4, 4, rng), rng, opts.step, out);
    }
    {
        BatchNormLayer bn(3);
        Rng init(opts.seed + 3);
        for (double& g : bn.gamma().span()) g = 1.0 + 0.3 * random_gaussian(1, 1, init)(0, 0);
        for (double& b : bn.beta().span()) b = 0.3 * random_gaussian(1, 1, init)(0, 0);
        check_layer("batchnorm", bn, random_tensor(4, 3, 2, 2, rng), rng, opts.step, out);
    }
    {
        ReluLayer relu;
        Tensor4 x = random_tensor(3, 4, 1, 1, rng);
        // Keep every input well away from the kink.
        for (double& v : x.span()) v += v >= 0.0 ? 0.1 : -0.1;
        check_layer("relu", relu, x, rng, opts.step, out);
    }
    {
        Matrix logits = random_gaussian(4, 3, rng);
        const std::vector<int> labels{0, 2, 1, 2};
        const LossResult r = softmax_cross_entropy(logits, labels);
        auto objective = [&] { return softmax_cross_entropy(logits, labels).loss; };
        const auto numeric = numeric_gradient(objective, logits.span(), opts.step);
        out.push_back({"softmax_ce", gradient_rel_error(r.grad.span(), numeric)});
    }
    {
        // Two AON dense layers with BN and ReLU between them, CE on top.
        // No bias: BN right after would make its gradient identically zero.
        WeightOptions nb = wo;
        nb.use_bias = false;
        Model net;
        net.add(std::make_unique<DenseLayer>(opts.cols, 5, nb, opts.seed + 4));
        net.add(std::make_unique<BatchNormLayer>(5));
        net.add(std::make_unique<ReluLayer>());
        net.add(std::make_unique<DenseLayer>(5, 3, nb, opts.seed + 5));
        Tensor4 x = random_tensor(4, opts.cols, 1, 1, rng);
        const std::vector<int> labels{0, 1, 2, 1};
        auto objective = [&] { return softmax_cross_entropy(flatten_rows(net.forward(x, Pass::probe)), labels).loss; };

        const Tensor4 logits = net.forward(x, Pass::probe);
        const LossResult r = softmax_cross_entropy(flatten_rows(logits), labels);
        net.zero_grad();
        const Tensor4 gx = net.backward(unflatten_rows(r.grad, logits.c(), logits.h(), logits.w()));
        for (auto& p : net.params()) {
            const std::vector<double> analytic(p.grad.begin(), p.grad.end());
            const auto numeric = numeric_gradient(objective, p.value, opts.step);
            out.push_back({"network/" + p.name, gradient_rel_error(analytic, numeric)});
        }
        const auto numeric = numeric_gradient(objective, x.span(), opts.step);
        out.push_back({"network/input", gradient_rel_error(gx.span(), numeric)});
    }
    return report;
}

} // namespace aonkit
