#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lmd/metrics.hpp"
#include "lmd/qoi.hpp"
#include "lmd/solver.hpp"
#include "lmd/uafno.hpp"

namespace lmd {

// One surrogate forward pass advances the clock by leap_steps solver steps.
struct LeapSpec {
    std::uint64_t leap_steps = 1000;
    double dt_s = 1e-12;

    void validate() const {
        if (leap_steps < 1) throw ConfigError("leap: leap_steps must be >= 1");
        if (!(dt_s > 0.0)) throw ConfigError("leap: dt must be positive");
    }
};

// Roll-out plan: n_init high-fidelity steps, then n_leaps cycles of one
// surrogate leap followed by n_relax high-fidelity relaxation steps
// (n_relax = 0 is the fully auto-regressive protocol). After k full cycles
// the clock sits at n_init + k * (leap_steps + n_relax).
struct RolloutSchedule {
    LeapSpec leap;
    std::uint64_t n_init = 10000;
    std::uint64_t n_leaps = 10;
    std::uint64_t n_relax = 0;

    std::uint64_t step_after_cycle(std::uint64_t k) const {
        return n_init + k * (leap.leap_steps + n_relax);
    }
};

struct TrainConfig {
    int epochs = 20;
    double lr = 1e-4;
    int batch = 1;
    std::uint64_t seed = 0;
    double dx_nm = 0.2; // grid spacing snapshots are read back with

    void validate() const {
        if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
        if (batch < 1) throw ConfigError("train: batch must be >= 1");
        if (lr < 0.0) throw ConfigError("train: learning rate must be >= 0");
    }
};

struct Dataset {
    struct Pair {
        std::string input_path;
        std::string target_path;
        std::uint64_t input_step = 0;
        std::uint64_t target_step = 0;
    };
    std::vector<Pair> pairs; // chronological, never straddling two runs
    int skipped = 0;         // inputs whose leap counterpart was missing
};

// Sorted snapshot files (snapshot_<step>.pfld) of one run directory.
std::vector<std::pair<std::uint64_t, std::string>> list_snapshots(const std::string& dir);

// Pairs every snapshot with the one leap_steps later within the same run.
// Zero usable pairs is an error.
Dataset build_dataset(const std::vector<std::string>& run_dirs, const LeapSpec& leap);

// Seeded epoch-shuffled MSE minimization with Adam; returns per-epoch mean
// loss. The model is updated in place. Non-finite losses abort with the
// epoch/pair location.
std::vector<double> train(Model& model, const Dataset& dataset, const TrainConfig& cfg);

// Field <-> tensor bridges (channels phi, cA, cB; values already in [0,1],
// so normalization is the identity on both sides).
ad::Tensor state_to_tensor(const FieldState& state);
FieldState tensor_to_state(const ad::Tensor& t, const GridSpec& grid, double time_s,
                           std::uint64_t step);

// Runs the schedule from state0 (which must sit at step 0): n_init HF steps
// with snapshots at the solver cadence, then per cycle a surrogate leap and
// n_relax HF relaxation steps, emitting one snapshot after each leap and one
// after each non-empty relaxation block. Returns the final state.
FieldState rollout(const FieldState& state0, const Model& model, const RolloutSchedule& schedule,
                   const ModelParams& p, const SolverConfig& solver_cfg,
                   const SnapshotSink& on_snapshot);

// Fully auto-regressive (n_relax forced to 0) and hybrid entry points.
FieldState rollout_auto(const FieldState& state0, const Model& model, RolloutSchedule schedule,
                        const ModelParams& p, const SolverConfig& solver_cfg,
                        const SnapshotSink& on_snapshot);
FieldState rollout_hybrid(const FieldState& state0, const Model& model,
                          const RolloutSchedule& schedule, const ModelParams& p,
                          const SolverConfig& solver_cfg, const SnapshotSink& on_snapshot);

// Relative errors of the eight reported quantities over an aligned timeline.
struct QoiErrorReport {
    std::optional<double> mean_curvature;
    std::optional<double> curvature_std;
    std::optional<double> perimeter;
    std::optional<double> total_mass;
    std::optional<double> cA_mass;
    std::optional<double> cB_mass;
    std::optional<double> max_penetration_depth;
    std::optional<double> mean_ligament_height;
};

struct EvaluateResult {
    std::vector<AcErrorRecord> ac_errors;
    QoiErrorReport qoi_errors;
};

// Aligns prediction and truth snapshots by step index (their intersection
// must be non-empty), computes per-step autocorrelation errors for the three
// fields and the QoI relative-error vector.
EvaluateResult evaluate(const std::vector<std::string>& pred_snapshots,
                        const std::vector<std::string>& truth_snapshots, double dx_nm,
                        const QoiOptions& qoi_opt = {});

void write_qoi_error_csv(const QoiErrorReport& report, const std::string& path);

struct SpeedupReport {
    double t_hf_per_step_s = 0.0;
    double t_model_per_leap_s = 0.0;
    std::uint64_t leap_steps = 0;
    double per_leap = 0.0;   // (leap_steps * t_hf) / t_model
    double end_to_end = 0.0; // whole-schedule wall-time ratio vs pure HF
};

SpeedupReport speedup_report(double t_hf_per_step_s, double t_model_per_leap_s,
                             const RolloutSchedule& schedule);
void write_speedup_report(const SpeedupReport& r, const std::string& path);

} // namespace lmd
