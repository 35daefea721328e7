#include "lmd/field.hpp"

#include <algorithm>
#include <cmath>

#include "lmd/rng.hpp"

namespace lmd {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

void GridSpec::validate() const {
    if (nx < 8 || ny < 8)
        throw ConfigError("grid: nx and ny must be at least 8");
    if (!power_of_two(nx) || !power_of_two(ny))
        throw ConfigError("grid: nx and ny must be powers of two");
    if (!(dx_nm > 0.0))
        throw ConfigError("grid: dx must be positive");
}

double Field2D::min() const {
    double m = v.empty() ? 0.0 : v[0];
    for (double x : v) m = std::min(m, x);
    return m;
}

double Field2D::max() const {
    double m = v.empty() ? 0.0 : v[0];
    for (double x : v) m = std::max(m, x);
    return m;
}

double Field2D::sum() const {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

bool Field2D::all_finite() const {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

RowRef resolve_row(int iy, int ny, const BoundarySpec& bc, double dirichlet_top) {
    if (iy >= 0 && iy < ny) return {true, iy, 0.0};
    if (bc.periodic_y()) {
        int r = iy % ny;
        if (r < 0) r += ny;
        return {true, r, 0.0};
    }
    if (iy >= ny) return {false, 0, dirichlet_top}; // liquid reservoir above the top edge
    return {true, -1 - iy, 0.0};                    // mirror across the bottom face
}

double sample(const Field2D& f, const BoundarySpec& bc, double dirichlet_top, int iy, int ix) {
    const RowRef r = resolve_row(iy, f.ny, bc, dirichlet_top);
    if (!r.interior) return r.value;
    return f.at(r.row, wrap_x(ix, f.nx));
}

void FieldState::validate() const {
    grid.validate();
    if (!phi.same_shape(cA) || !phi.same_shape(cB) || phi.nx != grid.nx || phi.ny != grid.ny)
        throw NumericError("state: field shapes disagree with the grid");
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double p = phi.v[i], a = cA.v[i], b = cB.v[i];
        if (!std::isfinite(p) || !std::isfinite(a) || !std::isfinite(b))
            throw NumericError("state: non-finite entry");
        if (p < 0.0 || p > 1.0)
            throw NumericError("state: phi outside [0,1]");
        if (a < 0.0 || b < 0.0 || a + b > 1.0)
            throw NumericError("state: composition outside the simplex");
    }
}

FieldState init_state(const GridSpec& grid, double solid_fraction, double noise_amp,
                      std::uint64_t seed) {
    grid.validate();
    if (!(solid_fraction > 0.0 && solid_fraction < 1.0))
        throw ConfigError("init: solid_fraction must lie in (0,1)");
    if (noise_amp < 0.0)
        throw ConfigError("init: noise_amp must be non-negative");

    FieldState s(grid);
    Rng rng(seed);
    const int solid_rows = static_cast<int>(solid_fraction * grid.ny);
    for (int iy = 0; iy < grid.ny; ++iy) {
        const bool solid = iy < solid_rows;
        for (int ix = 0; ix < grid.nx; ++ix) {
            if (!solid) continue; // liquid rows stay phi = cA = cB = 0
            double a = 0.3 + uniform(rng, -noise_amp, noise_amp);
            double b = 0.7 + uniform(rng, -noise_amp, noise_amp);
            // Project onto the simplex by splitting any excess equally; this
            // keeps each species within its nominal +/- noise_amp band.
            const double excess = a + b - 1.0;
            if (excess > 0.0) {
                a -= 0.5 * excess;
                b -= 0.5 * excess;
            }
            a = std::max(a, 0.0);
            b = std::max(b, 0.0);
            const double tot = a + b;
            if (tot > 1.0) {
                a /= tot;
                b /= tot;
            }
            s.phi.at(iy, ix) = 1.0;
            s.cA.at(iy, ix) = a;
            s.cB.at(iy, ix) = b;
        }
    }
    return s;
}

Field2D derived_cc(const FieldState& state) {
    Field2D cc(state.grid.ny, state.grid.nx);
    for (std::size_t i = 0; i < cc.size(); ++i)
        cc.v[i] = 1.0 - state.cA.v[i] - state.cB.v[i];
    return cc;
}

double field_integral_nm2(const Field2D& f, const GridSpec& grid) {
    return f.sum() * grid.dx_nm * grid.dx_nm;
}

} // namespace lmd
