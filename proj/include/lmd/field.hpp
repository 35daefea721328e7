#pragma once

#include <cstdint>
#include <vector>

#include "lmd/errors.hpp"

namespace lmd {

// Uniform 2D grid. Rows are indexed bottom (iy = 0) to top (iy = ny-1);
// columns wrap periodically in x. Spacing is stored in nm, the unit of the
// physical domain description (512 cells at 0.2 nm = 102.4 nm).
struct GridSpec {
    int nx = 512;
    int ny = 512;
    double dx_nm = 0.2;

    double dx_m() const { return dx_nm * 1e-9; }
    double width_nm() const { return nx * dx_nm; }
    double height_nm() const { return ny * dx_nm; }
    void validate() const;
};

// Boundary handling. "paper" is periodic in x, Dirichlet at the top
// (phi = 0, cA = cB = 0, i.e. pure liquid C) and zero-normal-gradient at the
// bottom. "closed" is fully periodic and exists so conservation can be tested
// exactly.
enum class BoundaryMode { paper, closed };

struct BoundarySpec {
    BoundaryMode mode = BoundaryMode::paper;

    static BoundarySpec paper() { return {BoundaryMode::paper}; }
    static BoundarySpec closed() { return {BoundaryMode::closed}; }
    bool periodic_y() const { return mode == BoundaryMode::closed; }
};

// Dense row-major ny x nx array of doubles.
struct Field2D {
    int nx = 0;
    int ny = 0;
    std::vector<double> v;

    Field2D() = default;
    Field2D(int ny_, int nx_, double fill = 0.0)
        : nx(nx_), ny(ny_), v(static_cast<std::size_t>(nx_) * ny_, fill) {}

    double& at(int iy, int ix) { return v[static_cast<std::size_t>(iy) * nx + ix]; }
    double at(int iy, int ix) const { return v[static_cast<std::size_t>(iy) * nx + ix]; }
    std::size_t size() const { return v.size(); }
    bool same_shape(const Field2D& o) const { return nx == o.nx && ny == o.ny; }

    double min() const;
    double max() const;
    double sum() const;
    bool all_finite() const;
};

// Out-of-range row lookups resolve to either an interior row or a boundary
// constant, depending on the BoundarySpec. Both the energy module and the
// solver build their stencils through this one mapping so that discrete
// energies and their functional derivatives stay exact adjoints.
struct RowRef {
    bool interior = true;
    int row = 0;        // valid when interior
    double value = 0.0; // Dirichlet constant otherwise
};

// `dirichlet_top` is the constant this particular field takes in the top
// ghost rows under paper boundaries (phi, cA, cB: 0; cC: 1).
RowRef resolve_row(int iy, int ny, const BoundarySpec& bc, double dirichlet_top);

// Sample a field at (iy, ix) where iy may lie up to two rows outside the grid
// and ix is wrapped periodically.
double sample(const Field2D& f, const BoundarySpec& bc, double dirichlet_top, int iy, int ix);

inline int wrap_x(int ix, int nx) {
    ix %= nx;
    return ix < 0 ? ix + nx : ix;
}

// The coupled state: solid fraction phi plus the two tracked mole fractions.
// cC is derived (cA + cB + cC = 1) and never stored. A FieldState is a plain
// value; copying it is the supported way to hand work to another thread.
struct FieldState {
    GridSpec grid;
    Field2D phi;
    Field2D cA;
    Field2D cB;
    double time_s = 0.0;
    std::uint64_t step = 0;

    FieldState() = default;
    explicit FieldState(const GridSpec& g)
        : grid(g), phi(g.ny, g.nx), cA(g.ny, g.nx), cB(g.ny, g.nx) {}

    // Checks finiteness, phi in [0,1] and the composition simplex. Throws
    // NumericError on violation. Surrogate-produced states may legitimately
    // fail the simplex check, so validation is explicit rather than implied.
    void validate() const;
};

// Alloy below solid_fraction*ny with nominal composition (0.3, 0.7) plus
// per-cell uniform noise in [-noise_amp, noise_amp] on each species, clamped
// back to the simplex; pure liquid above. Identical seeds give bit-identical
// states.
FieldState init_state(const GridSpec& grid, double solid_fraction, double noise_amp,
                      std::uint64_t seed);

// cC = 1 - cA - cB, elementwise.
Field2D derived_cc(const FieldState& state);

// Sum of field * dx^2 with dx in nm (the mass integrals of the QoI set).
double field_integral_nm2(const Field2D& f, const GridSpec& grid);

} // namespace lmd
