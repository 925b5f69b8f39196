#pragma once

// SGD with heavy-ball momentum, a piecewise-constant learning-rate schedule
// expressed in fractions of the run, and an optional weight penalty.

#include "aonkit/data.hpp"
#include "aonkit/metrics.hpp"
#include "aonkit/model.hpp"
#include "aonkit/regularize.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace aonkit {

struct LrStep {
    double fraction; // boundary as a fraction of the total epochs
    double divisor;
};

struct TrainConfig {
    double lr0 = 0.1;
    double momentum = 0.9;
    int epochs = 20;
    // Divide by 2 at 3/8 and 3/4 of the run (60 and 120 of 160 epochs).
    std::vector<LrStep> schedule{{0.375, 2.0}, {0.75, 2.0}};
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;
    PenaltyConfig penalty{PenaltyKind::none, 10.0};

    // Throws ConfigError on lr0 <= 0, momentum outside [0, 1), epochs < 1,
    // batch_size < 1 or schedule fractions not strictly increasing in (0, 1).
    void validate() const;
};

struct OptimizerState {
    std::vector<std::vector<double>> velocity; // one buffer per ParamRef
    std::mt19937_64 shuffle_rng;

    static OptimizerState for_model(Model& model, std::uint64_t seed);
};

// velocity <- momentum * velocity + grad;  param <- param - lr * velocity.
// Throws ShapeError when the spans differ in length.
void sgd_momentum_step(std::span<double> param, std::span<const double> grad, std::span<double> velocity, double lr,
                       double momentum);

double lr_at(const TrainConfig& cfg, int epoch);

struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
};

// One pass over `data` in shuffled minibatches. Each minibatch runs a training
// forward (one power-iteration update per normalised weight), backward, adds
// the configured penalty gradient to every weight matrix, then steps. The
// returned record carries train metrics, diagnostics and wall time; the
// validation fields are left zero.
MetricRecord train_epoch(Model& model, const Dataset& data, const TrainConfig& cfg, OptimizerState& opt, int epoch);

// Inference-mode loss and accuracy.
Evaluation evaluate(Model& model, const Dataset& data, std::size_t batch_size = 256);

// Mean orthonormality deviation and mean normaliser over the weight layers.
void fill_diagnostics(const Model& model, MetricRecord& record);

Model freeze_model(Model model);

// Rows [begin, end) of `data` in the order given by `order`.
Tensor4 gather_batch(const Dataset& data, std::span<const std::size_t> order, std::vector<int>& labels);

} // namespace aonkit
