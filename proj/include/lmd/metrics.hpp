#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lmd/field.hpp"

namespace lmd {

// Two-point spatial autocorrelation over the periodic torus:
//   S(r) = (1/N) sum_x u(x) u(x+r),
// computed as inverse-transform of |FFT(u)|^2. For a 0/1 phase indicator this
// is the probability that two points separated by r share the phase. Both
// axes are treated periodically regardless of the physical y boundaries
// (standard microstructure-statistics convention; see README).
Field2D autocorrelation(const Field2D& u);

// || S_pred - S_true ||_2 / || S_true ||_2 over all offsets. No value when
// the reference norm vanishes.
std::optional<double> ac_relative_error(const Field2D& u_true, const Field2D& u_pred);

// L2 relative error over a time-indexed QoI sequence, skipping slots where
// either side is undefined. No value when nothing remains or ||q||_2 = 0.
std::optional<double> qoi_relative_error(const std::vector<std::optional<double>>& q_true,
                                         const std::vector<std::optional<double>>& q_pred);

struct AcErrorRecord {
    std::uint64_t step = 0;
    double time_s = 0.0;
    std::optional<double> eac_phi, eac_cA, eac_cB;
};

// Mean autocorrelation discrepancy over all unordered pairs of runs, per time
// slot and per field. Runs must share an identical step timeline; mismatches
// raise ConfigError listing the offending steps.
std::vector<AcErrorRecord> pairwise_discrepancy(const std::vector<std::vector<FieldState>>& runs);

void write_ac_error_csv(const std::vector<AcErrorRecord>& records, const std::string& path);

} // namespace lmd
