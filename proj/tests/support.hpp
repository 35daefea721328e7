#pragma once

// Shared helpers for the test suites: deterministic smooth random states,
// finite-difference oracles, scratch directories.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "lmd/energy.hpp"
#include "lmd/field.hpp"
#include "lmd/rng.hpp"

namespace lmd::test {

// Scratch directory under the system temp root, unique per tag, wiped on
// construction so reruns start clean.
class TmpDir {
public:
    explicit TmpDir(const std::string& tag) {
        path_ = (std::filesystem::temp_directory_path() / ("lmd_test_" + tag)).string();
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const { return path_ + "/" + name; }

private:
    std::string path_;
};

// Smooth periodic-in-x field: a few low-frequency Fourier modes. Values land
// in [center - span, center + span].
inline Field2D smooth_field(int ny, int nx, double center, double span, Rng& rng,
                            int max_mode = 3) {
    Field2D f(ny, nx, 0.0);
    constexpr int modes = 3;
    std::vector<double> amp, kx, ky, phase;
    for (int m = 0; m < modes; ++m) {
        amp.push_back(uniform(rng, 0.2, 1.0));
        kx.push_back(1.0 + std::floor(uniform(rng, 0.0, max_mode)));
        ky.push_back(1.0 + std::floor(uniform(rng, 0.0, max_mode)));
        phase.push_back(uniform(rng, 0.0, 2.0 * std::numbers::pi));
    }
    double max_abs = 0.0;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            double v = 0.0;
            for (int m = 0; m < modes; ++m)
                v += amp[m] *
                     std::sin(2.0 * std::numbers::pi *
                                  (kx[m] * ix / nx + ky[m] * iy / ny) +
                              phase[m]);
            f.at(iy, ix) = v;
            max_abs = std::max(max_abs, std::abs(v));
        }
    for (double& v : f.v) v = center + span * (max_abs > 0 ? v / max_abs : 0.0);
    return f;
}

// Random smooth state safely inside the composition simplex and the phi box,
// usable under both boundary modes. max_mode = 1 or 2 gives the very smooth
// states the small-step scheme-equivalence checks call for.
inline FieldState smooth_state(const GridSpec& grid, std::uint64_t seed, int max_mode = 3) {
    FieldState s(grid);
    Rng rng(seed);
    s.phi = smooth_field(grid.ny, grid.nx, 0.5, 0.3, rng, max_mode);
    s.cA = smooth_field(grid.ny, grid.nx, 0.28, 0.08, rng, max_mode);
    s.cB = smooth_field(grid.ny, grid.nx, 0.38, 0.10, rng, max_mode);
    return s;
}

enum class Knob { phi, cA, cB };

// Central finite difference of the total free energy with respect to one
// cell of one field, expressed as an energy density (divided by the cell
// measure), the quantity dF_dphi / diffusion_potential return.
inline double fd_functional_derivative(const FieldState& state, const ModelParams& p,
                                       const BoundarySpec& bc, Knob knob, int iy, int ix,
                                       double eps) {
    FieldState plus = state, minus = state;
    Field2D& fp = knob == Knob::phi ? plus.phi : (knob == Knob::cA ? plus.cA : plus.cB);
    Field2D& fm = knob == Knob::phi ? minus.phi : (knob == Knob::cA ? minus.cA : minus.cB);
    fp.at(iy, ix) += eps;
    fm.at(iy, ix) -= eps;
    const double Fp = total_free_energy(plus, p, bc).F_total;
    const double Fm = total_free_energy(minus, p, bc).F_total;
    const double cell = state.grid.dx_m() * state.grid.dx_m();
    return (Fp - Fm) / (2.0 * eps * cell);
}

// Max relative mismatch between an analytic derivative field and its finite
// difference, normalized by the largest analytic magnitude.
inline double max_rel_derivative_error(const FieldState& state, const ModelParams& p,
                                       const BoundarySpec& bc, Knob knob,
                                       const Field2D& analytic, double eps) {
    double scale = 0.0;
    for (double v : analytic.v) scale = std::max(scale, std::abs(v));
    double worst = 0.0;
    for (int iy = 0; iy < state.grid.ny; ++iy)
        for (int ix = 0; ix < state.grid.nx; ++ix) {
            const double fd = fd_functional_derivative(state, p, bc, knob, iy, ix, eps);
            worst = std::max(worst, std::abs(fd - analytic.at(iy, ix)) / scale);
        }
    return worst;
}

} // namespace lmd::test
