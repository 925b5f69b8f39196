#include "aonkit/experiment.hpp"

#include "aonkit/error.hpp"
#include "aonkit/orthopoly.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

namespace aonkit {

namespace {

bool is_normalised(const std::string& mode) { return mode == "aon" || mode == "sn"; }

double median(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace

void ExperimentConfig::validate() const {
    if (mode != "plain" && mode != "sn" && mode != "aon" && mode != "orthreg")
        throw ConfigError("unknown mode '" + mode + "' (expected plain, sn, aon or orthreg)");
    if (q < 0 || q > 32) throw ConfigError("q must be in [0, 32]");
    if (seeds < 1) throw ConfigError("seeds must be >= 1");
    if (!(lr_divisor > 0.0)) throw ConfigError("lr-divisor must be > 0");
    if (batchnorm && batch_size < 2) throw ConfigError("batch-size must be >= 2 with batch normalisation");
    if (data.classes < 2) throw ConfigError("classes must be >= 2");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight-decay must be >= 0");
    if (weight_decay > 0.0 && mode == "orthreg") throw ConfigError("weight-decay cannot be combined with orthreg");
    if (!(data.noise >= 0.0)) throw ConfigError("noise must be >= 0");
    train_config(*this, seed).validate();
}

std::string run_label(const ExperimentConfig& cfg) {
    if (cfg.mode == "plain") return cfg.weight_decay > 0.0 ? "plain-wd" + format_real(cfg.weight_decay) : "plain";
    if (cfg.mode == "orthreg") return "orthreg-b" + format_real(cfg.beta);
    const int q = cfg.mode == "sn" ? 0 : cfg.q;
    std::string label = "aon-q" + std::to_string(q) + (cfg.pre_sn ? "-presn" : "");
    if (cfg.weight_decay > 0.0) label += "-wd" + format_real(cfg.weight_decay);
    return label;
}

WeightOptions weight_options(const ExperimentConfig& cfg) {
    WeightOptions w;
    w.use_bias = cfg.bias;
    w.aon_mode = cfg.pre_sn ? AonMode::pre_sn : AonMode::standard;
    if (is_normalised(cfg.mode)) {
        w.norm = cfg.mode == "sn" ? NormMode::sn : NormMode::aon;
        w.q = cfg.mode == "sn" ? 0 : cfg.q;
        w.use_gamma = cfg.gamma;
    } else {
        // A per-row scale on an unnormalised weight is redundant.
        w.norm = NormMode::plain;
        w.q = 0;
        w.use_gamma = false;
    }
    return w;
}

TrainConfig train_config(const ExperimentConfig& cfg, std::uint64_t seed) {
    TrainConfig t;
    t.lr0 = cfg.lr;
    t.momentum = cfg.momentum;
    t.epochs = cfg.epochs;
    t.schedule = {{0.375, cfg.lr_divisor}, {0.75, cfg.lr_divisor}};
    t.batch_size = cfg.batch_size;
    t.seed = seed;
    if (cfg.mode == "orthreg")
        t.penalty = {PenaltyKind::orthonormal, cfg.beta};
    else if (cfg.weight_decay > 0.0)
        t.penalty = {PenaltyKind::weight_decay, cfg.weight_decay};
    else
        t.penalty = {PenaltyKind::none, cfg.beta};
    return t;
}

ModelSpec model_spec(const ExperimentConfig& cfg, const Dataset& train, std::uint64_t seed) {
    ModelSpec s;
    s.arch = cfg.arch;
    const auto& d = train.inputs.dims();
    s.input = {d[1], d[2], d[3]};
    s.classes = train.class_count;
    s.weights = weight_options(cfg);
    s.batchnorm = cfg.batchnorm;
    s.seed = seed;
    return s;
}

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
    const DataBundle data = make_data(cfg.data, seed);
    const TrainConfig tc = train_config(cfg, seed);
    tc.validate();
    Model model = build_model(model_spec(cfg, data.train, seed));
    OptimizerState opt = OptimizerState::for_model(model, seed ^ 0x6a09e667f3bcc908ULL);

    RunResult result;
    result.seed = seed;
    result.best_val_acc = -1.0;
    const std::string label = run_label(cfg);
    double seconds = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        MetricRecord r = train_epoch(model, data.train, tc, opt, epoch);
        const Evaluation val = evaluate(model, data.validation);
        r.run_id = label;
        r.seed = seed;
        r.val_loss = val.loss;
        r.val_acc = val.accuracy;
        seconds += r.epoch_wall_seconds;
        if (val.accuracy > result.best_val_acc) {
            result.best_val_acc = val.accuracy;
            result.best_epoch = epoch;
            result.best_model = model;
        }
        result.records.push_back(std::move(r));
    }
    result.mean_epoch_seconds = seconds / static_cast<double>(cfg.epochs);
    return result;
}

std::size_t repetition_threads(std::size_t jobs) {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("AONKIT_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || cap < 1) throw ConfigError("AONKIT_THREADS must be a positive integer");
        n = std::min(n, static_cast<std::size_t>(cap));
    }
    return std::max<std::size_t>(1, std::min(n, jobs));
}

std::vector<RunResult> run_repetitions(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::size_t jobs = static_cast<std::size_t>(cfg.seeds);
    std::vector<RunResult> results(jobs);
    const std::size_t threads = repetition_threads(jobs);
    if (threads == 1) {
        for (std::size_t i = 0; i < jobs; ++i) results[i] = run_single(cfg, cfg.seed + i);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs; i = next++) {
            try {
                results[i] = run_single(cfg, cfg.seed + i);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return results;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& csv, std::uint64_t seed) {
    std::filesystem::path p = csv;
    p.replace_extension();
    p += ".seed" + std::to_string(seed) + ".aonk";
    return p;
}

std::vector<SweepRow> ortho_sweep(const SweepOptions& opts) {
    if (opts.trials == 0) throw ConfigError("ortho-sweep: trials must be >= 1");
    if (!(opts.lo > 0.0 && opts.lo <= opts.hi)) throw ConfigError("ortho-sweep: need 0 < lo <= hi");
    for (int q : opts.qs)
        if (q < 0) throw ConfigError("ortho-sweep: q must be >= 0");
    Rng rng(opts.seed);
    std::vector<SweepRow> rows(opts.qs.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].q = opts.qs[i];
    for (std::size_t t = 0; t < opts.trials; ++t) {
        const Matrix w = sample_weight_with_spectrum(opts.rows, opts.cols, opts.lo, opts.hi, rng);
        for (auto& r : rows) {
            const double e = approximation_error(w, r.q);
            r.mean_err += e;
            r.max_err = std::max(r.max_err, e);
        }
    }
    for (auto& r : rows) r.mean_err /= static_cast<double>(opts.trials);
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "q,mean_err,max_err\n";
    for (const auto& r : rows) os << r.q << ',' << format_real(r.mean_err) << ',' << format_real(r.max_err) << '\n';
}

ExperimentConfig config_for_mode(const ExperimentConfig& base, const std::string& token) {
    ExperimentConfig cfg = base;
    const auto colon = token.find(':');
    cfg.mode = token.substr(0, colon);
    if (colon != std::string::npos) {
        if (cfg.mode != "aon") throw ConfigError("compare: only aon takes a q suffix ('" + token + "')");
        const std::string qs = token.substr(colon + 1);
        char* end = nullptr;
        const long q = std::strtol(qs.c_str(), &end, 10);
        if (qs.empty() || *end != '\0') throw ConfigError("compare: bad q in '" + token + "'");
        cfg.q = static_cast<int>(q);
    }
    cfg.validate();
    return cfg;
}

CompareRow summarize(const std::string& label, const std::vector<RunResult>& runs) {
    CompareRow row;
    row.label = label;
    row.runs = runs.size();
    if (runs.empty()) return row;
    double secs = 0.0;
    for (const auto& r : runs) {
        row.best_val_accs.push_back(r.best_val_acc);
        secs += r.mean_epoch_seconds;
    }
    const double n = static_cast<double>(runs.size());
    row.best_val_acc_mean = std::accumulate(row.best_val_accs.begin(), row.best_val_accs.end(), 0.0) / n;
    if (runs.size() > 1) {
        double ss = 0.0;
        for (double a : row.best_val_accs) ss += (a - row.best_val_acc_mean) * (a - row.best_val_acc_mean);
        row.best_val_acc_std = std::sqrt(ss / (n - 1.0));
    }
    row.best_val_acc_median = median(row.best_val_accs);
    row.epoch_seconds_mean = secs / n;
    return row;
}

std::vector<CompareRow> compare_modes(const ExperimentConfig& base, const std::vector<std::string>& modes) {
    if (modes.empty()) throw ConfigError("compare: no modes given");
    std::vector<ExperimentConfig> cfgs;
    for (const auto& m : modes) cfgs.push_back(config_for_mode(base, m));
    std::vector<CompareRow> rows;
    for (const auto& cfg : cfgs) rows.push_back(summarize(run_label(cfg), run_repetitions(cfg)));
    return rows;
}

void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows) {
    os << "mode,seeds,best_val_acc_mean,best_val_acc_std,best_val_acc_median,epoch_seconds_mean\n";
    for (const auto& r : rows)
        os << r.label << ',' << r.runs << ',' << format_real(r.best_val_acc_mean) << ','
           << format_real(r.best_val_acc_std) << ',' << format_real(r.best_val_acc_median) << ','
           << format_real(r.epoch_seconds_mean) << '\n';
}

void print_compare_table(std::ostream& os, const std::vector<CompareRow>& rows) {
    constexpr int first = 22, col = 18;
    const auto flags = os.flags();
    os << std::left << std::setw(first) << "";
    for (const auto& r : rows) os << std::setw(col) << r.label;
    os << '\n' << std::setw(first) << "val acc % (mean±std)";
    for (const auto& r : rows) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f ± %.2f", 100.0 * r.best_val_acc_mean, 100.0 * r.best_val_acc_std);
        // setw counts bytes; the ± sign is two.
        os << std::setw(col + 1) << buf;
    }
    os << '\n' << std::setw(first) << "epoch time (s)";
    for (const auto& r : rows) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", r.epoch_seconds_mean);
        os << std::setw(col) << buf;
    }
    os << '\n';
    os.flags(flags);
}

} // namespace aonkit
