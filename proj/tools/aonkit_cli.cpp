// aonkit command line: train, gradcheck, ortho-sweep, compare, freeze.

#include "aonkit/error.hpp"
#include "aonkit/experiment.hpp"
#include "aonkit/simd.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

namespace {

using namespace aonkit;

// Opens --out for writing, or returns std::cout when it is empty or "-".
std::ostream& open_out(const std::string& path, std::unique_ptr<std::ofstream>& holder) {
    if (path.empty() || path == "-") return std::cout;
    holder = std::make_unique<std::ofstream>(path);
    if (!*holder) throw std::runtime_error("cannot open '" + path + "' for writing");
    return *holder;
}

int cmd_train(const ExperimentConfig& cfg, bool save_checkpoints) {
    const auto runs = run_repetitions(cfg);
    std::unique_ptr<std::ofstream> file;
    std::ostream& os = open_out(cfg.out, file);
    write_metrics_header(os);
    for (const auto& r : runs)
        for (const auto& rec : r.records) write_metrics_row(os, rec);
    os.flush();
    for (const auto& r : runs) {
        std::cerr << run_label(cfg) << " seed " << r.seed << ": best val acc " << format_real(r.best_val_acc)
                  << " at epoch " << r.best_epoch << ", " << format_real(r.mean_epoch_seconds) << " s/epoch\n";
        if (save_checkpoints && file) {
            const auto path = checkpoint_path(cfg.out, r.seed);
            save_checkpoint(path, r.best_model);
            std::cerr << "  checkpoint " << path.string() << '\n';
        }
    }
    return 0;
}

int cmd_gradcheck(const GradcheckOptions& opts, double tol) {
    const auto report = run_gradcheck(opts);
    for (const auto& e : report.entries) std::cout << e.name << ' ' << format_real(e.max_rel_err) << '\n';
    const bool ok = report.passed(tol);
    std::cout << "gradcheck " << (ok ? "PASS" : "FAIL") << " max_rel_err=" << format_real(report.max_rel_err())
              << " tol=" << format_real(tol) << '\n';
    return ok ? 0 : 1;
}

int cmd_sweep(const SweepOptions& opts, const std::string& out) {
    const auto rows = ortho_sweep(opts);
    std::unique_ptr<std::ofstream> file;
    write_sweep_csv(open_out(out, file), rows);
    return 0;
}

int cmd_compare(const ExperimentConfig& cfg, const std::vector<std::string>& modes) {
    const auto rows = compare_modes(cfg, modes);
    if (!cfg.out.empty() && cfg.out != "-") {
        std::unique_ptr<std::ofstream> file;
        write_compare_csv(open_out(cfg.out, file), rows);
    } else {
        write_compare_csv(std::cout, rows);
        std::cout << '\n';
    }
    print_compare_table(std::cout, rows);
    return 0;
}

int cmd_freeze(const std::string& in, const std::string& out) {
    if (out.empty()) throw ConfigError("freeze: --out is required");
    Model model = load_checkpoint(std::filesystem::path(in));
    const bool already = model.frozen();
    model.freeze();
    save_checkpoint(std::filesystem::path(out), model);
    std::cerr << (already ? "already frozen; rewrote " : "frozen checkpoint written to ") << out << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    ExperimentConfig cfg;
    CLI::App app{"Approximated orthonormal normalisation experiments"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_config("--config", "", "flat key = value file; command-line flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);

    std::string simd;
    app.add_option("--mode", cfg.mode, "plain | sn | aon | orthreg")
        ->check(CLI::IsMember({"plain", "sn", "aon", "orthreg"}))
        ->capture_default_str();
    app.add_option("--q", cfg.q, "Taylor order of the orthonormalising polynomial")->capture_default_str();
    app.add_flag("--pre-sn", cfg.pre_sn, "divide by the spectral norm of W before the polynomial");
    app.add_option("--beta", cfg.beta, "orthonormality penalty weight (orthreg)")->capture_default_str();
    app.add_option("--weight-decay", cfg.weight_decay, "L2 penalty coefficient (not with orthreg)")
        ->capture_default_str();
    app.add_option("--epochs", cfg.epochs)->capture_default_str();
    app.add_option("--batch-size", cfg.batch_size)->capture_default_str();
    app.add_option("--seed", cfg.seed, "first seed")->capture_default_str();
    app.add_option("--seeds", cfg.seeds, "number of repetitions")->capture_default_str();
    app.add_option("--lr", cfg.lr, "initial learning rate")->capture_default_str();
    app.add_option("--momentum", cfg.momentum)->capture_default_str();
    app.add_option("--lr-divisor", cfg.lr_divisor, "lr divisor at 3/8 and 3/4 of the run")->capture_default_str();
    app.add_option("--arch", cfg.arch, "mlp:W1,W2,... or conv:C1,C2,...")->capture_default_str();
    app.add_option("--bn", cfg.batchnorm, "batch normalisation after hidden layers")->capture_default_str();
    app.add_option("--gamma", cfg.gamma, "learnable per-row scale on normalised weights")->capture_default_str();
    app.add_option("--bias", cfg.bias)->capture_default_str();
    app.add_option("--dataset", cfg.data.source, "blobs | spirals | idx:DIR")->capture_default_str();
    app.add_option("--classes", cfg.data.classes)->capture_default_str();
    app.add_option("--per-class", cfg.data.per_class, "training samples per class")->capture_default_str();
    app.add_option("--val-per-class", cfg.data.val_per_class)->capture_default_str();
    app.add_option("--noise", cfg.data.noise, "blob spread or spiral angular noise")->capture_default_str();
    app.add_option("--idx-limit", cfg.data.idx_limit, "cap on IDX samples per split, 0 = all")
        ->capture_default_str();
    app.add_option("--out", cfg.out, "output path (CSV, or checkpoint for freeze); stdout if omitted");
    app.add_option("--simd", simd, "kernel backend: scalar | avx2 | neon | auto (default: $AONKIT_SIMD)")
        ->check(CLI::IsMember({"scalar", "avx2", "neon", "auto"}));

    auto* train = app.add_subcommand("train", "train one configuration over --seeds repetitions")->fallthrough();
    bool no_checkpoint = false;
    train->add_flag("--no-checkpoint", no_checkpoint, "skip writing <out>.seed<S>.aonk");

    auto* grad = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients")->fallthrough();
    GradcheckOptions gopts;
    double gtol = 1e-4;
    bool corrupt = false;
    grad->add_option("--rows", gopts.rows)->capture_default_str();
    grad->add_option("--cols", gopts.cols)->capture_default_str();
    grad->add_option("--step", gopts.step)->capture_default_str();
    grad->add_option("--tol", gtol)->capture_default_str();
    grad->add_flag("--corrupt", corrupt, "perturb one analytic gradient (should fail)");

    auto* sweep = app.add_subcommand("ortho-sweep", "approximation error of the Taylor polynomial vs q")->fallthrough();
    SweepOptions sopts;
    sweep->add_option("--qs", sopts.qs, "orders to evaluate")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->delimiter(',')->capture_default_str();
    sweep->add_option("--trials", sopts.trials)->capture_default_str();
    sweep->add_option("--lo", sopts.lo, "smallest Gram eigenvalue")->capture_default_str();
    sweep->add_option("--hi", sopts.hi, "largest Gram eigenvalue")->capture_default_str();
    sweep->add_option("--rows", sopts.rows)->capture_default_str();
    sweep->add_option("--cols", sopts.cols)->capture_default_str();

    auto* compare = app.add_subcommand("compare", "best validation accuracy and epoch time per mode")->fallthrough();
    std::vector<std::string> modes{"aon:2", "sn", "plain"};
    compare->add_option("--modes", modes, "plain | sn | orthreg | aon | aon:<q>")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->delimiter(',')
        ->capture_default_str();

    auto* freeze = app.add_subcommand("freeze", "bake the normalised weights of a checkpoint")->fallthrough();
    std::string checkpoint;
    freeze->add_option("--checkpoint", checkpoint, "trainable checkpoint")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (simd == "auto") simd::set_backend(simd::best_backend());
        else if (simd == "scalar") simd::set_backend(simd::Backend::scalar);
        else if (simd == "avx2") simd::set_backend(simd::Backend::avx2);
        else if (simd == "neon") simd::set_backend(simd::Backend::neon);
        if (*train) return cmd_train(cfg, !no_checkpoint);
        if (*grad) {
            gopts.q = cfg.q;
            gopts.seed = cfg.seed;
            gopts.corrupt = corrupt;
            return cmd_gradcheck(gopts, gtol);
        }
        if (*sweep) {
            sopts.seed = cfg.seed;
            return cmd_sweep(sopts, cfg.out);
        }
        if (*compare) return cmd_compare(cfg, modes);
        if (*freeze) return cmd_freeze(checkpoint, cfg.out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
