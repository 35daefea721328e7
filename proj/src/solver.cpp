#include "lmd/solver.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "lmd/parallel.hpp"

namespace lmd {

namespace {

constexpr double kPi = std::numbers::pi;

// Bulk diffusion potentials of the pure-liquid reservoir above the top edge
// (phi = 0, cA = cB = 0, gradient corrections dropped).
struct Reservoir {
    double mu_A, mu_B;
};

Reservoir reservoir_potentials(const ModelParams& p) {
    const double kTV = p.kT_over_Va();
    const double d0 = detail::dentln(0.0), d1 = detail::dentln(1.0);
    return {kTV * (d0 - d1) + p.Omega_AC, kTV * (d0 - d1)};
}

} // namespace

void step_phi(FieldState& state, const ModelParams& p, double dt_s, const BoundarySpec& bc) {
    const Field2D dfdphi = dF_dphi(state, p, bc);
    const double rate = p.M_phi_si() * kPi * kPi / (8.0 * p.eta);
    for (std::size_t i = 0; i < state.phi.size(); ++i) {
        const double next = state.phi.v[i] - dt_s * rate * dfdphi.v[i];
        if (!std::isfinite(next)) throw NumericError("phi update produced a non-finite value");
        state.phi.v[i] = std::clamp(next, 0.0, 1.0);
    }
}

void explicit_species_rhs(const FieldState& state, const ModelParams& p, const BoundarySpec& bc,
                          Field2D& dcA_dt, Field2D& dcB_dt) {
    const int nx = state.grid.nx, ny = state.grid.ny;
    const double h = state.grid.dx_m();
    const double inv_h = 1.0 / h;

    Field2D mu_A, mu_B;
    species_potentials(state, p, bc, mu_A, mu_B);

    dcA_dt = Field2D(ny, nx);
    dcB_dt = Field2D(ny, nx);

    // East-face fluxes, one per cell; the west face of a cell is its west
    // neighbor's east face, so every flux is computed exactly once and the
    // divergence telescopes.
    Field2D fxA(ny, nx), fxB(ny, nx);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const int e = ix + 1 == nx ? 0 : ix + 1;
            const MobilityPoint mp =
                mobility_point(state.phi.at(iy, ix), state.cA.at(iy, ix), state.cB.at(iy, ix), p);
            const MobilityPoint me =
                mobility_point(state.phi.at(iy, e), state.cA.at(iy, e), state.cB.at(iy, e), p);
            const double mAA = 0.5 * (mp.AA + me.AA);
            const double mAB = 0.5 * (mp.AB + me.AB);
            const double mBB = 0.5 * (mp.BB + me.BB);
            const double gA = (mu_A.at(iy, e) - mu_A.at(iy, ix)) * inv_h;
            const double gB = (mu_B.at(iy, e) - mu_B.at(iy, ix)) * inv_h;
            fxA.at(iy, ix) = mAA * gA + mAB * gB;
            fxB.at(iy, ix) = mAB * gA + mBB * gB;
        }
    }

    // North-face fluxes. Paper mode: the face above the top row couples to
    // the reservoir ghost (whose mobilities vanish since cA = cB = 0 there);
    // the face below the bottom row carries no flux.
    const bool periodic_y = bc.periodic_y();
    const Reservoir res = reservoir_potentials(p);
    Field2D fyA(ny, nx), fyB(ny, nx);
    for (int iy = 0; iy < ny; ++iy) {
        const bool top = iy + 1 == ny;
        const int up = top ? 0 : iy + 1;
        for (int ix = 0; ix < nx; ++ix) {
            double phi_u, a_u, b_u, muA_u, muB_u;
            if (top && !periodic_y) {
                phi_u = 0.0;
                a_u = 0.0;
                b_u = 0.0;
                muA_u = res.mu_A;
                muB_u = res.mu_B;
            } else {
                phi_u = state.phi.at(up, ix);
                a_u = state.cA.at(up, ix);
                b_u = state.cB.at(up, ix);
                muA_u = mu_A.at(up, ix);
                muB_u = mu_B.at(up, ix);
            }
            const MobilityPoint mp =
                mobility_point(state.phi.at(iy, ix), state.cA.at(iy, ix), state.cB.at(iy, ix), p);
            const MobilityPoint mu = mobility_point(phi_u, a_u, b_u, p);
            const double mAA = 0.5 * (mp.AA + mu.AA);
            const double mAB = 0.5 * (mp.AB + mu.AB);
            const double mBB = 0.5 * (mp.BB + mu.BB);
            const double gA = (muA_u - mu_A.at(iy, ix)) * inv_h;
            const double gB = (muB_u - mu_B.at(iy, ix)) * inv_h;
            fyA.at(iy, ix) = mAA * gA + mAB * gB;
            fyB.at(iy, ix) = mAB * gA + mBB * gB;
        }
    }

    for (int iy = 0; iy < ny; ++iy) {
        const int dn = iy == 0 ? ny - 1 : iy - 1;
        const bool bottom = iy == 0 && !periodic_y;
        for (int ix = 0; ix < nx; ++ix) {
            const int w = ix == 0 ? nx - 1 : ix - 1;
            const double south_A = bottom ? 0.0 : fyA.at(dn, ix);
            const double south_B = bottom ? 0.0 : fyB.at(dn, ix);
            dcA_dt.at(iy, ix) = (fxA.at(iy, ix) - fxA.at(iy, w) + fyA.at(iy, ix) - south_A) * inv_h;
            dcB_dt.at(iy, ix) = (fxB.at(iy, ix) - fxB.at(iy, w) + fyB.at(iy, ix) - south_B) * inv_h;
        }
    }
}

SpeciesStepper::SpeciesStepper(const GridSpec& grid, const ModelParams& p, const SolverConfig& cfg)
    : grid_(grid), params_(p), cfg_(cfg), S_(cfg.effective_stabilization(p)) {
    grid.validate();
    cfg.validate();
    if (S_ == 0.0) return; // plain forward Euler, no transforms needed

    const int nx = grid.nx, ny = grid.ny;
    const double h2 = grid.dx_m() * grid.dx_m();
    const double dt = cfg.dt_s;

    if (cfg.boundary.periodic_y()) {
        fft2_ = std::make_unique<Fft2>(ny, nx);
        closed_scale_.resize(static_cast<std::size_t>(nx) * ny);
        for (int iy = 0; iy < ny; ++iy) {
            const double ly = (2.0 - 2.0 * std::cos(2.0 * kPi * iy / ny)) / h2;
            for (int ix = 0; ix < nx; ++ix) {
                const double lx = (2.0 - 2.0 * std::cos(2.0 * kPi * ix / nx)) / h2;
                const double lap = lx + ly;
                closed_scale_[static_cast<std::size_t>(iy) * nx + ix] =
                    dt / (1.0 + dt * S_ * lap * lap);
            }
        }
        return;
    }

    row_fft_ = std::make_unique<Fft>(nx);
    // Wall-normal part of -laplacian: mirror ghost at the bottom, zero
    // Dirichlet ghost at the top (boundary constants cancel in the delta
    // formulation).
    Tridiag ay;
    ay.sub.assign(ny - 1, -1.0 / h2);
    ay.sup.assign(ny - 1, -1.0 / h2);
    ay.diag.assign(ny, 2.0 / h2);
    ay.diag[0] = 1.0 / h2;
    mode_factors_.reserve(static_cast<std::size_t>(nx / 2 + 1));
    for (int k = 0; k <= nx / 2; ++k) {
        const double lx = (2.0 - 2.0 * std::cos(2.0 * kPi * k / nx)) / h2;
        Tridiag t = ay;
        for (double& d : t.diag) d += lx;
        mode_factors_.emplace_back(penta_from_tridiag_square(t, 1.0, dt * S_));
    }
}

void SpeciesStepper::apply_implicit(Field2D& c, const Field2D& rhs) const {
    const int nx = grid_.nx, ny = grid_.ny;
    const double dt = cfg_.dt_s;

    if (cfg_.boundary.periodic_y()) {
        std::vector<std::complex<double>> work(rhs.v.begin(), rhs.v.end());
        fft2_->forward(work.data());
        for (std::size_t i = 0; i < work.size(); ++i) work[i] *= closed_scale_[i];
        fft2_->inverse(work.data());
        for (std::size_t i = 0; i < c.size(); ++i) c.v[i] += work[i].real();
        return;
    }

    // Fourier in x, banded solves in y; conjugate symmetry halves the modes
    // and keeps the inverse transform exactly real.
    std::vector<std::vector<std::complex<double>>> rows(ny);
    for (int iy = 0; iy < ny; ++iy) {
        rows[iy].assign(nx, {});
        for (int ix = 0; ix < nx; ++ix) rows[iy][ix] = rhs.at(iy, ix);
        row_fft_->forward(rows[iy].data());
    }
    const int kmax = nx / 2;
    std::vector<std::vector<double>> sol_re(kmax + 1), sol_im(kmax + 1);
    parallel_for(
        0, kmax + 1,
        [&](int k) {
            std::vector<double> re(ny), im(ny);
            for (int iy = 0; iy < ny; ++iy) {
                re[iy] = rows[iy][k].real() * dt;
                im[iy] = rows[iy][k].imag() * dt;
            }
            mode_factors_[k].solve(re);
            mode_factors_[k].solve(im);
            sol_re[k] = std::move(re);
            sol_im[k] = std::move(im);
        },
        64);
    for (int iy = 0; iy < ny; ++iy) {
        auto& row = rows[iy];
        for (int k = 0; k <= kmax; ++k) {
            row[k] = {sol_re[k][iy], sol_im[k][iy]};
            if (k != 0 && k != kmax) row[nx - k] = std::conj(row[k]);
        }
        row_fft_->inverse(row.data());
        for (int ix = 0; ix < nx; ++ix) c.at(iy, ix) += row[ix].real();
    }
}

void SpeciesStepper::step(FieldState& state) const {
    Field2D rA, rB;
    explicit_species_rhs(state, params_, cfg_.boundary, rA, rB);
    if (S_ == 0.0) { // degenerate stabilization: exact forward Euler
        const double dt = cfg_.dt_s;
        for (std::size_t i = 0; i < state.cA.size(); ++i) {
            state.cA.v[i] += dt * rA.v[i];
            state.cB.v[i] += dt * rB.v[i];
        }
        return;
    }
    apply_implicit(state.cA, rA);
    apply_implicit(state.cB, rB);
}

void step_species_semi_implicit(FieldState& state, const ModelParams& p, const SolverConfig& cfg) {
    SpeciesStepper(state.grid, p, cfg).step(state);
}

StepReport make_step_report(const FieldState& state, double wall_s) {
    StepReport r;
    r.step = state.step;
    r.time_s = state.time_s;
    r.wall_s = wall_s;
    r.phi_min = state.phi.min();
    r.phi_max = state.phi.max();
    r.cA_min = state.cA.min();
    r.cA_max = state.cA.max();
    r.cB_min = state.cB.min();
    r.cB_max = state.cB.max();
    r.m_phi = field_integral_nm2(state.phi, state.grid);
    r.m_A = field_integral_nm2(state.cA, state.grid);
    r.m_B = field_integral_nm2(state.cB, state.grid);
    return r;
}

FieldState run_hf(FieldState state, const ModelParams& p, const SolverConfig& cfg,
                  std::uint64_t n_steps, const SnapshotSink& on_snapshot,
                  const ReportSink& on_report) {
    cfg.validate();
    p.validate();
    SpeciesStepper stepper(state.grid, p, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t i = 0; i < n_steps; ++i) {
        try {
            step_phi(state, p, cfg.dt_s, cfg.boundary);
            stepper.step(state);
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " at step " +
                               std::to_string(state.step + 1));
        }
        state.step += 1;
        state.time_s += cfg.dt_s;
        if (state.step % static_cast<std::uint64_t>(cfg.snapshot_cadence) == 0) {
            if (on_report) {
                const double wall = std::chrono::duration<double>(
                                        std::chrono::steady_clock::now() - t0)
                                        .count();
                on_report(make_step_report(state, wall));
            }
            if (on_snapshot) on_snapshot(state);
        }
    }
    return state;
}

} // namespace lmd
