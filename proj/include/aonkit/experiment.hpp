#pragma once

// Experiment harness behind the CLI: seeded repetitions, q sweeps of the
// Taylor approximation, mode comparisons and gradient checks.

#include "aonkit/data.hpp"
#include "aonkit/metrics.hpp"
#include "aonkit/model.hpp"
#include "aonkit/train.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace aonkit {

// Every field maps to a CLI flag of the same name (see tools/aonkit_cli.cpp).
struct ExperimentConfig {
    std::string mode = "aon"; // plain | sn | aon | orthreg
    int q = 2;
    bool pre_sn = false;
    double beta = 10.0;
    double weight_decay = 0.0; // L2 coefficient; not combined with orthreg
    int epochs = 20;
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;
    int seeds = 1;
    double lr = 0.1;
    double momentum = 0.9;
    double lr_divisor = 2.0;
    std::string arch = "mlp:64,64";
    bool batchnorm = true;
    bool gamma = true;
    bool bias = false;
    DatasetOptions data;
    std::string out;

    void validate() const;
};

// Canonical label; "sn" and "aon" with q = 0 share the label "aon-q0".
std::string run_label(const ExperimentConfig& cfg);

WeightOptions weight_options(const ExperimentConfig& cfg);
TrainConfig train_config(const ExperimentConfig& cfg, std::uint64_t seed);
ModelSpec model_spec(const ExperimentConfig& cfg, const Dataset& train, std::uint64_t seed);

struct RunResult {
    std::uint64_t seed = 0;
    std::vector<MetricRecord> records;
    double best_val_acc = 0.0;
    int best_epoch = 0;
    Model best_model; // trainable snapshot at the best validation epoch
    double mean_epoch_seconds = 0.0;
};

// One seeded training run: data, model init and shuffling all derive from
// `seed`.
RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed);

// Number of worker threads for repetitions: hardware concurrency capped by
// AONKIT_THREADS, and by `jobs`.
std::size_t repetition_threads(std::size_t jobs);

// cfg.seeds runs with seeds cfg.seed, cfg.seed + 1, ...; results are in seed
// order regardless of thread scheduling.
std::vector<RunResult> run_repetitions(const ExperimentConfig& cfg);

// Checkpoint path for one seed next to the CSV: "<stem>.seed<S>.aonk".
std::filesystem::path checkpoint_path(const std::filesystem::path& csv, std::uint64_t seed);

struct SweepRow {
    int q = 0;
    double mean_err = 0.0;
    double max_err = 0.0;
};

struct SweepOptions {
    std::vector<int> qs{0, 1, 2, 3, 4};
    double lo = 0.5;
    double hi = 1.5;
    std::size_t rows = 8;
    std::size_t cols = 16;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
};

// approximation_error over `trials` random weights whose Gram spectrum is
// uniform in [lo, hi]; the same weights are scored for every q.
std::vector<SweepRow> ortho_sweep(const SweepOptions& opts);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

struct CompareRow {
    std::string label;
    std::size_t runs = 0;
    double best_val_acc_mean = 0.0;
    double best_val_acc_std = 0.0;
    double best_val_acc_median = 0.0;
    double epoch_seconds_mean = 0.0;
    std::vector<double> best_val_accs;
};

// Mode tokens: plain | sn | orthreg | aon | aon:<q>.
ExperimentConfig config_for_mode(const ExperimentConfig& base, const std::string& token);
CompareRow summarize(const std::string& label, const std::vector<RunResult>& runs);
std::vector<CompareRow> compare_modes(const ExperimentConfig& base, const std::vector<std::string>& modes);
void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows);
// Accuracy row and time row, one column per configuration.
void print_compare_table(std::ostream& os, const std::vector<CompareRow>& rows);

struct GradcheckEntry {
    std::string name;
    double max_rel_err = 0.0;
};

struct GradcheckOptions {
    int q = 2;
    std::size_t rows = 4;
    std::size_t cols = 6;
    std::uint64_t seed = 0;
    double step = 1e-5;
    bool corrupt = false; // perturbs one analytic gradient (negative control)
};

struct GradcheckReport {
    std::vector<GradcheckEntry> entries;
    double max_rel_err() const;
    bool passed(double tol = 1e-4) const { return max_rel_err() < tol; }
};

// max|a - b| / max(max|a|, max|b|, 1e-6) over one gradient tensor.
double gradient_rel_error(std::span<const double> analytic, std::span<const double> numeric);

// Central finite differences of loss() w.r.t. each entry of `values`,
// restoring every entry after probing.
std::vector<double> numeric_gradient(const std::function<double()>& loss, std::span<double> values, double step);

// Checks aon_backward (standard and pre-SN), dense, conv, batchnorm, relu,
// softmax cross-entropy and a 2-layer AON + BN + ReLU + CE network against
// central differences with u, v held fixed.
GradcheckReport run_gradcheck(const GradcheckOptions& opts);

} // namespace aonkit
