#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lmd/runconfig.hpp"

namespace lmd {

// Workflow entry points behind the CLI. Every command validates its config,
// writes all artifacts under out_dir next to a resolved_config.json, and is
// bit-reproducible for fixed config and seeds (wall-clock columns aside).

// Ground-truth run: integrates the full schedule horizon
// (n_init + n_leaps * (leap + relax) steps) at high fidelity, emitting
// snapshots at the solver cadence plus a steps.csv report table.
void cmd_simulate(const RunConfig& cfg);

// Builds the (t, t+leap) dataset from the run directories under data_dir,
// trains the surrogate, writes weights.uafw and loss.csv.
void cmd_train(const RunConfig& cfg);

// Auto-regressive (n_relax = 0) or hybrid roll-out from a fresh initial
// state using trained weights.
void cmd_rollout(const RunConfig& cfg, const std::string& weights_path,
                 std::optional<std::uint64_t> hybrid_relax);

// QoI table for every snapshot in a directory.
void cmd_qoi(const RunConfig& cfg, const std::string& snapshot_dir, const std::string& out_csv);

// Autocorrelation and QoI error tables for prediction vs the first truth
// directory; with two or more truth directories also the pairwise
// ground-truth discrepancy table.
void cmd_metrics(const RunConfig& cfg, const std::string& pred_dir,
                 const std::vector<std::string>& truth_dirs);

// Speedup arithmetic for measured timings under the configured schedule.
void cmd_report(const RunConfig& cfg, double t_hf_per_step_s, double t_model_per_leap_s);

} // namespace lmd
