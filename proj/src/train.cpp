#include "aonkit/train.hpp"

#include "aonkit/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace aonkit {

void TrainConfig::validate() const {
    if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw ConfigError("train: lr0 must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must be in [0, 1)");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
    if (!(penalty.beta >= 0.0) || !std::isfinite(penalty.beta)) throw ConfigError("train: beta must be >= 0");
    double prev = 0.0;
    for (const auto& s : schedule) {
        if (!(s.fraction > prev && s.fraction < 1.0))
            throw ConfigError("train: schedule fractions must be strictly increasing in (0, 1)");
        if (!(s.divisor > 0.0)) throw ConfigError("train: schedule divisors must be > 0");
        prev = s.fraction;
    }
}

OptimizerState OptimizerState::for_model(Model& model, std::uint64_t seed) {
    OptimizerState s;
    for (const auto& p : model.params()) s.velocity.emplace_back(p.value.size(), 0.0);
    s.shuffle_rng.seed(seed);
    return s;
}

void sgd_momentum_step(std::span<double> param, std::span<const double> grad, std::span<double> velocity, double lr,
                       double momentum) {
    if (param.size() != grad.size() || param.size() != velocity.size())
        throw ShapeError("sgd_momentum_step: parameter, gradient and velocity lengths differ");
    for (std::size_t i = 0; i < param.size(); ++i) {
        velocity[i] = momentum * velocity[i] + grad[i];
        param[i] -= lr * velocity[i];
    }
}

double lr_at(const TrainConfig& cfg, int epoch) {
    double lr = cfg.lr0;
    for (const auto& s : cfg.schedule)
        // Boundaries are compared in epoch units so that e.g. 0.375 * 160 = 60
        // applies at exactly epoch 60.
        if (static_cast<double>(epoch) >= s.fraction * static_cast<double>(cfg.epochs) - 1e-9) lr /= s.divisor;
    return lr;
}

Tensor4 gather_batch(const Dataset& data, std::span<const std::size_t> order, std::vector<int>& labels) {
    const auto& d = data.inputs.dims();
    Tensor4 batch(order.size(), d[1], d[2], d[3]);
    labels.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto src = data.inputs.sample(order[i]);
        std::copy(src.begin(), src.end(), batch.sample(i).begin());
        labels[i] = data.labels[order[i]];
    }
    return batch;
}

MetricRecord train_epoch(Model& model, const Dataset& data, const TrainConfig& cfg, OptimizerState& opt, int epoch) {
    if (data.size() == 0) throw InputError("train_epoch: empty dataset");
    const auto start = std::chrono::steady_clock::now();
    const double lr = lr_at(cfg, epoch);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), opt.shuffle_rng);

    double loss_sum = 0.0;
    std::size_t correct = 0, seen = 0;
    std::vector<int> labels;
    std::vector<double> combined;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
        // A trailing single sample cannot be batch-normalised.
        if (end - begin < 2 && seen > 0) break;
        const std::span<const std::size_t> idx(order.data() + begin, end - begin);
        const Tensor4 x = gather_batch(data, idx, labels);

        model.zero_grad();
        const Tensor4 logits = model.forward(x, Pass::train);
        const LossResult loss = softmax_cross_entropy(flatten_rows(logits), labels);
        model.backward(unflatten_rows(loss.grad, logits.c(), logits.h(), logits.w()));

        auto params = model.params();
        if (params.size() != opt.velocity.size()) throw ShapeError("train_epoch: optimizer state does not match model");
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& p = params[i];
            std::span<const double> grad = p.grad;
            if (p.weight != nullptr && cfg.penalty.kind != PenaltyKind::none) {
                const Matrix pg = penalty_grad(cfg.penalty, *p.weight);
                combined.assign(p.grad.begin(), p.grad.end());
                for (std::size_t k = 0; k < combined.size(); ++k) combined[k] += pg.span()[k];
                grad = combined;
            }
            sgd_momentum_step(p.value, grad, opt.velocity[i], lr, cfg.momentum);
        }

        loss_sum += loss.loss * static_cast<double>(idx.size());
        correct += loss.correct;
        seen += idx.size();
    }

    MetricRecord r;
    r.seed = cfg.seed;
    r.epoch = epoch;
    r.train_loss = loss_sum / static_cast<double>(seen);
    r.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
    r.epoch_wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fill_diagnostics(model, r);
    return r;
}

Evaluation evaluate(Model& model, const Dataset& data, std::size_t batch_size) {
    if (data.size() == 0) throw InputError("evaluate: empty dataset");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::vector<int> labels;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
        const std::size_t end = std::min(order.size(), begin + batch_size);
        const std::span<const std::size_t> idx(order.data() + begin, end - begin);
        const Tensor4 logits = model.forward(gather_batch(data, idx, labels), Pass::infer);
        const LossResult loss = softmax_cross_entropy(flatten_rows(logits), labels);
        loss_sum += loss.loss * static_cast<double>(idx.size());
        correct += loss.correct;
    }
    const double n = static_cast<double>(data.size());
    return {loss_sum / n, static_cast<double>(correct) / n};
}

void fill_diagnostics(const Model& model, MetricRecord& record) {
    const auto weights = model.weights();
    if (weights.empty()) return;
    double dev = 0.0, sigma = 0.0;
    for (const auto* w : weights) {
        const auto [d, s] = w->diagnostics();
        dev += d;
        sigma += s;
    }
    record.mean_orth_dev = dev / static_cast<double>(weights.size());
    record.mean_sigma = sigma / static_cast<double>(weights.size());
}

Model freeze_model(Model model) {
    model.freeze();
    return model;
}

} // namespace aonkit
