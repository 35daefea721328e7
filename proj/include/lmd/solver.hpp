#pragma once

#include <complex>
#include <functional>
#include <memory>

#include "lmd/energy.hpp"
#include "lmd/fft.hpp"
#include "lmd/pentadiag.hpp"

namespace lmd {

struct SolverConfig {
    double dt_s = 1e-12;
    // Coefficient of the implicit biharmonic; < 0 selects the default
    // 2 * D_liq * (V_a/kT) * kappa * 0.25, sized to the stiffest flux the
    // mobility can produce.
    double stabilization = -1.0;
    BoundarySpec boundary = BoundarySpec::paper();
    int snapshot_cadence = 1000;

    void validate() const {
        if (!(dt_s > 0.0)) throw ConfigError("solver: dt must be positive");
        if (snapshot_cadence < 1) throw ConfigError("solver: snapshot cadence must be >= 1");
    }
    double effective_stabilization(const ModelParams& p) const {
        if (stabilization >= 0.0) return stabilization;
        return 2.0 * p.D_liq * p.Va_over_kT() * p.kappa * 0.25;
    }
};

struct StepReport {
    std::uint64_t step = 0;
    double time_s = 0.0;
    double wall_s = 0.0; // cumulative wall time of the run so far
    double phi_min = 0.0, phi_max = 0.0;
    double cA_min = 0.0, cA_max = 0.0;
    double cB_min = 0.0, cB_max = 0.0;
    double m_phi = 0.0, m_A = 0.0, m_B = 0.0; // nm^2
};

using SnapshotSink = std::function<void(const FieldState&)>;
using ReportSink = std::function<void(const StepReport&)>;

// Forward Euler on phi:  phi <- clamp(phi - dt * M_phi * (pi^2 / 8 eta) * dF/dphi).
// The double-obstacle well requires the clamp; without it phi leaves [0,1].
void step_phi(FieldState& state, const ModelParams& p, double dt_s, const BoundarySpec& bc);

// div sum_j M_ij grad(mu_j) in conservative form: face fluxes from
// arithmetically averaged mobilities and compact potential gradients,
// divergence by face differences. Closed boundaries telescope exactly.
void explicit_species_rhs(const FieldState& state, const ModelParams& p, const BoundarySpec& bc,
                          Field2D& dcA_dt, Field2D& dcB_dt);

// Stabilized first-order splitting for the stiff species update. With B the
// discrete biharmonic assembled per x-Fourier mode,
//   (1 + dt S B) c^{n+1} = c^n + dt (R(c^n) + S B c^n),
// which reduces to solving (1 + dt S B) delta = dt R. Fourier handles x;
// a pentadiagonal direct solve handles y (paper mode); fully periodic mode
// divides by 1 + dt S |k|^4 instead. S = 0 degenerates to forward Euler.
class SpeciesStepper {
public:
    SpeciesStepper(const GridSpec& grid, const ModelParams& p, const SolverConfig& cfg);
    void step(FieldState& state) const;

private:
    void apply_implicit(Field2D& c, const Field2D& rhs) const;

    GridSpec grid_;
    ModelParams params_;
    SolverConfig cfg_;
    double S_ = 0.0;
    std::unique_ptr<Fft> row_fft_;
    std::unique_ptr<Fft2> fft2_;
    std::vector<PentaFactor> mode_factors_; // kx = 0 .. nx/2 (paper mode)
    std::vector<double> closed_scale_;      // dt / (1 + dt S |k|^4) (closed mode)
};

// One-shot convenience wrapper around SpeciesStepper.
void step_species_semi_implicit(FieldState& state, const ModelParams& p, const SolverConfig& cfg);

// Integration loop: phi step then species step, n_steps times, advancing the
// clock by dt each step. Snapshots and reports are emitted every
// snapshot_cadence completed steps.
FieldState run_hf(FieldState state, const ModelParams& p, const SolverConfig& cfg,
                  std::uint64_t n_steps, const SnapshotSink& on_snapshot = {},
                  const ReportSink& on_report = {});

StepReport make_step_report(const FieldState& state, double wall_s);

} // namespace lmd
