#include "lmd/commands.hpp"

#include <filesystem>

#include "lmd/csv.hpp"
#include "lmd/metrics.hpp"
#include "lmd/snapshot.hpp"

namespace fs = std::filesystem;

namespace lmd {

namespace {

void prepare_out_dir(const RunConfig& cfg) {
    fs::create_directories(cfg.paths.out_dir);
    write_resolved_config(cfg, cfg.paths.out_dir + "/resolved_config.json");
}

std::vector<std::string> snapshot_paths(const std::string& dir) {
    std::vector<std::string> paths;
    for (const auto& [step, path] : list_snapshots(dir)) paths.push_back(path);
    if (paths.empty()) throw IoError("no snapshots found in " + dir);
    return paths;
}

class StepCsv {
public:
    explicit StepCsv(const std::string& path) : csv_(path) {
        csv_.header({"step", "time_s", "wall_s", "m_phi", "m_A", "m_B", "phi_min", "phi_max"});
    }
    void add(const StepReport& r) {
        csv_.field(r.step);
        csv_.field(r.time_s);
        csv_.field(r.wall_s);
        csv_.field(r.m_phi);
        csv_.field(r.m_A);
        csv_.field(r.m_B);
        csv_.field(r.phi_min);
        csv_.field(r.phi_max);
        csv_.end_row();
    }

private:
    CsvWriter csv_;
};

SnapshotSink dir_sink(const std::string& dir) {
    return [dir](const FieldState& s) { write_snapshot(s, dir + "/" + snapshot_filename(s.step)); };
}

} // namespace

void cmd_simulate(const RunConfig& cfg) {
    cfg.validate();
    prepare_out_dir(cfg);
    const std::uint64_t total =
        cfg.rollout.n_init +
        cfg.rollout.n_leaps * (cfg.rollout.leap.leap_steps + cfg.rollout.n_relax);
    FieldState state = init_state(cfg.grid, cfg.init.solid_fraction, cfg.init.noise_amp,
                                  cfg.init.seed);
    StepCsv steps(cfg.paths.out_dir + "/steps.csv");
    run_hf(state, cfg.params, cfg.solver, total, dir_sink(cfg.paths.out_dir),
           [&](const StepReport& r) { steps.add(r); });
}

void cmd_train(const RunConfig& cfg) {
    cfg.validate();
    prepare_out_dir(cfg);
    // Each subdirectory of data_dir is one run; a data_dir that itself holds
    // snapshots is treated as a single run.
    std::vector<std::string> run_dirs;
    if (!fs::is_directory(cfg.paths.data_dir))
        throw IoError("train: data_dir is not a directory: " + cfg.paths.data_dir);
    for (const auto& entry : fs::directory_iterator(cfg.paths.data_dir))
        if (entry.is_directory()) run_dirs.push_back(entry.path().string());
    if (run_dirs.empty()) run_dirs.push_back(cfg.paths.data_dir);

    const Dataset ds = build_dataset(run_dirs, cfg.rollout.leap);
    Model model = build(cfg.model, cfg.train.seed);
    const std::vector<double> losses = train(model, ds, cfg.train);
    save_weights(model, cfg.paths.out_dir + "/weights.uafw");

    CsvWriter csv(cfg.paths.out_dir + "/loss.csv");
    csv.header({"epoch", "mean_mse"});
    for (std::size_t e = 0; e < losses.size(); ++e) {
        csv.field(static_cast<std::uint64_t>(e));
        csv.field(losses[e]);
        csv.end_row();
    }
}

void cmd_rollout(const RunConfig& cfg, const std::string& weights_path,
                 std::optional<std::uint64_t> hybrid_relax) {
    cfg.validate();
    prepare_out_dir(cfg);
    Model model = load_weights(weights_path);
    RolloutSchedule schedule = cfg.rollout;
    if (hybrid_relax) schedule.n_relax = *hybrid_relax;
    FieldState state0 = init_state(cfg.grid, cfg.init.solid_fraction, cfg.init.noise_amp,
                                   cfg.init.seed);
    rollout(state0, model, schedule, cfg.params, cfg.solver, dir_sink(cfg.paths.out_dir));
}

void cmd_qoi(const RunConfig& cfg, const std::string& snapshot_dir, const std::string& out_csv) {
    cfg.validate();
    prepare_out_dir(cfg);
    const auto records = qoi_timeseries(snapshot_paths(snapshot_dir), cfg.grid.dx_nm);
    write_qoi_csv(records, out_csv);
}

void cmd_metrics(const RunConfig& cfg, const std::string& pred_dir,
                 const std::vector<std::string>& truth_dirs) {
    cfg.validate();
    if (truth_dirs.empty()) throw ConfigError("metrics: need at least one truth directory");
    prepare_out_dir(cfg);
    const EvaluateResult res =
        evaluate(snapshot_paths(pred_dir), snapshot_paths(truth_dirs[0]), cfg.grid.dx_nm);
    write_ac_error_csv(res.ac_errors, cfg.paths.out_dir + "/metrics.csv");
    write_qoi_error_csv(res.qoi_errors, cfg.paths.out_dir + "/qoi_errors.csv");

    if (truth_dirs.size() >= 2) {
        std::vector<std::vector<FieldState>> runs;
        for (const auto& dir : truth_dirs) {
            std::vector<FieldState> run;
            for (const auto& path : snapshot_paths(dir))
                run.push_back(read_snapshot(path, cfg.grid.dx_nm));
            runs.push_back(std::move(run));
        }
        write_ac_error_csv(pairwise_discrepancy(runs), cfg.paths.out_dir + "/discrepancy.csv");
    }
}

void cmd_report(const RunConfig& cfg, double t_hf_per_step_s, double t_model_per_leap_s) {
    cfg.validate();
    prepare_out_dir(cfg);
    const SpeedupReport r = speedup_report(t_hf_per_step_s, t_model_per_leap_s, cfg.rollout);
    write_speedup_report(r, cfg.paths.out_dir + "/speedup.txt");
}

} // namespace lmd
