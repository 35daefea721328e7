// dealloy: desk-scale liquid-metal-dealloying workbench.
//
// Subcommands cover the whole pipeline: high-fidelity simulation, surrogate
// training, auto-regressive / hybrid roll-out, QoI extraction, error metrics,
// and speedup reporting. Exit codes: 0 success, 2 config error, 3 I/O error,
// 4 numeric error.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "lmd/commands.hpp"
#include "lmd/parallel.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    int threads = 1;
};

lmd::RunConfig resolve_config(const CommonOpts& opts) {
    lmd::RunConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = lmd::load_run_config(opts.config_path);
    } else {
        cfg.model.input_h = cfg.grid.ny;
        cfg.model.input_w = cfg.grid.nx;
        cfg.validate();
    }
    if (opts.seed) { // --seed overrides both the field-init and training seeds
        cfg.init.seed = *opts.seed;
        cfg.train.seed = *opts.seed;
    }
    if (!opts.out_dir.empty()) cfg.paths.out_dir = opts.out_dir;
    lmd::set_worker_threads(opts.threads);
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Run configuration (JSON)");
    cmd->add_option("--seed", opts.seed, "Override init/train seeds");
    cmd->add_option("--out", opts.out_dir, "Override paths.out_dir");
    cmd->add_option("--threads", opts.threads, "Worker threads for internal parallelism");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Liquid-metal-dealloying phase-field workbench"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* sim = app.add_subcommand("simulate", "Run the high-fidelity solver");
    add_common(sim, opts);

    auto* train = app.add_subcommand("train", "Train the surrogate on snapshot pairs");
    add_common(train, opts);

    std::string weights_path;
    std::optional<std::uint64_t> hybrid_relax;
    auto* roll = app.add_subcommand("rollout", "Surrogate roll-out (auto-regressive or hybrid)");
    add_common(roll, opts);
    roll->add_option("--weights", weights_path, "Trained weights file (default out_dir/weights.uafw)");
    roll->add_option("--hybrid", hybrid_relax, "Relaxation steps per cycle (omit for fully auto-regressive)");

    std::string snapshot_dir, qoi_out;
    auto* qoi = app.add_subcommand("qoi", "Extract QoIs from a snapshot directory");
    add_common(qoi, opts);
    qoi->add_option("snapshots", snapshot_dir, "Snapshot directory")->required();
    qoi->add_option("--csv", qoi_out, "Output CSV (default out_dir/qoi.csv)");

    std::string pred_dir;
    std::vector<std::string> truth_dirs;
    auto* metrics = app.add_subcommand("metrics", "Autocorrelation and QoI error tables");
    add_common(metrics, opts);
    metrics->add_option("pred", pred_dir, "Prediction snapshot directory")->required();
    metrics->add_option("truth", truth_dirs, "Truth snapshot directories")->required();

    double t_hf = 0.0, t_model = 0.0;
    auto* report = app.add_subcommand("report", "Speedup arithmetic for measured timings");
    add_common(report, opts);
    report->add_option("--hf-seconds-per-step", t_hf, "Measured HF seconds per step")->required();
    report->add_option("--model-seconds-per-leap", t_model, "Measured surrogate seconds per leap")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const lmd::RunConfig cfg = resolve_config(opts);
        if (sim->parsed()) {
            lmd::cmd_simulate(cfg);
        } else if (train->parsed()) {
            lmd::cmd_train(cfg);
        } else if (roll->parsed()) {
            const std::string weights =
                weights_path.empty() ? cfg.paths.out_dir + "/weights.uafw" : weights_path;
            lmd::cmd_rollout(cfg, weights, hybrid_relax);
        } else if (qoi->parsed()) {
            lmd::cmd_qoi(cfg, snapshot_dir,
                         qoi_out.empty() ? cfg.paths.out_dir + "/qoi.csv" : qoi_out);
        } else if (metrics->parsed()) {
            lmd::cmd_metrics(cfg, pred_dir, truth_dirs);
        } else if (report->parsed()) {
            lmd::cmd_report(cfg, t_hf, t_model);
        }
    } catch (const lmd::ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const lmd::IoError& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return 3;
    } catch (const lmd::NumericError& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
