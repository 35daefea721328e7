#pragma once

#include <string>

#include "lmd/orchestrator.hpp"

namespace lmd {

// One JSON document drives every command. Unknown keys are rejected, missing
// keys take the production defaults, and the fully resolved document is
// echoed next to the outputs so any run can be reproduced from its artifacts.
struct RunConfig {
    GridSpec grid;
    ModelParams params;
    SolverConfig solver;
    struct Init {
        double solid_fraction = 0.75;
        double noise_amp = 0.025;
        std::uint64_t seed = 0;
    } init;
    UAFNOConfig model; // input dims default to the grid dims
    TrainConfig train;
    RolloutSchedule rollout;
    struct Paths {
        std::string data_dir = "data";
        std::string out_dir = "out";
    } paths;

    void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string resolved_config_json(const RunConfig& cfg);
void write_resolved_config(const RunConfig& cfg, const std::string& path);

} // namespace lmd
