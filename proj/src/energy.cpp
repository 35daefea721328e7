#include "lmd/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lmd {

namespace {
constexpr double kPi = std::numbers::pi;
}

namespace detail {

double h_unchecked(double phi) {
    const double u = phi * (1.0 - phi);
    const double root = std::sqrt(std::max(u, 0.0));
    const double arg = 2.0 * phi - 1.0;
    return 0.5 + (2.0 / kPi) * (arg * root + 0.5 * std::asin(std::clamp(arg, -1.0, 1.0)));
}

double entln(double c) { return c * std::log(std::max(c, kLogEps)); }

double dentln(double c) { return c > kLogEps ? std::log(c) + 1.0 : std::log(kLogEps); }

void add_grad_energy_adjoint(const Field2D& f, const BoundarySpec& bc, double dirichlet_top,
                             double coef, double dx_m, double sign, Field2D& out) {
    const int nx = f.nx, ny = f.ny;
    const double inv_h = 1.0 / dx_m;
    for (int iy = 0; iy < ny; ++iy) {
        const RowRef up = resolve_row(iy + 1, ny, bc, dirichlet_top);
        for (int ix = 0; ix < nx; ++ix) {
            const int e = ix + 1 == nx ? 0 : ix + 1;
            const double gx = (f.at(iy, e) - f.at(iy, ix)) * inv_h;
            const double tx = sign * coef * 2.0 * gx * inv_h;
            out.at(iy, e) += tx;
            out.at(iy, ix) -= tx;
            const double fu = up.interior ? f.at(up.row, ix) : up.value;
            const double gy = (fu - f.at(iy, ix)) * inv_h;
            const double ty = sign * coef * 2.0 * gy * inv_h;
            if (up.interior) out.at(up.row, ix) += ty;
            out.at(iy, ix) -= ty;
        }
    }
}

namespace {

double h_prime_unchecked(double phi) {
    return (8.0 / kPi) * std::sqrt(std::max(phi * (1.0 - phi), 0.0));
}

double clamp_phi(double phi, const char* who) {
    if (phi < -1e-12 || phi > 1.0 + 1e-12)
        throw NumericError(std::string(who) + ": phi outside [0,1]");
    return std::clamp(phi, 0.0, 1.0);
}

struct Grad {
    double x, y;
};

// Central difference at the cell's east and north face midpoints; together
// with the per-cell energy attribution each grid face is counted once.
Grad face_grad(const Field2D& f, const BoundarySpec& bc, double dtop, int iy, int ix,
               double inv_h) {
    const int nx = f.nx;
    const int e = ix + 1 == nx ? 0 : ix + 1;
    const double fu = sample(f, bc, dtop, iy + 1, ix);
    return {(f.at(iy, e) - f.at(iy, ix)) * inv_h, (fu - f.at(iy, ix)) * inv_h};
}

} // namespace

} // namespace detail

double h_interp(double phi) { return detail::h_unchecked(detail::clamp_phi(phi, "h_interp")); }

double h_prime(double phi) {
    return detail::h_prime_unchecked(detail::clamp_phi(phi, "h_prime"));
}

double delta_g_sl(double cA, double cB, double cC, const ModelParams& p) {
    if (cA < 0.0 || cB < 0.0 || cC < 0.0 || std::abs(cA + cB + cC - 1.0) > 1e-9)
        throw NumericError("delta_g_sl: composition off the simplex");
    return cA * p.g_A() + cB * p.g_B() + cC * p.g_C();
}

double f_phase_density(double phi, const std::array<double, 2>& grad_phi, const ModelParams& p) {
    const double g2 = grad_phi[0] * grad_phi[0] + grad_phi[1] * grad_phi[1];
    return (4.0 * p.sigma_sl / p.eta) *
           ((p.eta * p.eta / (kPi * kPi)) * g2 + phi * (1.0 - phi));
}

double f_chem_density(double phi, double cA, double cB, const std::array<double, 2>& grad_cA,
                      const std::array<double, 2>& grad_cB, const ModelParams& p) {
    const double cC = 1.0 - cA - cB;
    const double entropy =
        p.kT_over_Va() * (detail::entln(cA) + detail::entln(cB) + detail::entln(cC));
    const double enthalpy = p.Omega_AC * cA * cC;
    const double driving = detail::h_unchecked(phi) * (cA * p.g_A() + cB * p.g_B() + cC * p.g_C());
    const double gCx = -grad_cA[0] - grad_cB[0];
    const double gCy = -grad_cA[1] - grad_cB[1];
    const double grad2 = grad_cA[0] * grad_cA[0] + grad_cA[1] * grad_cA[1] +
                         grad_cB[0] * grad_cB[0] + grad_cB[1] * grad_cB[1] + gCx * gCx + gCy * gCy;
    return entropy + enthalpy + driving + 0.5 * p.kappa * grad2;
}

EnergyBreakdown total_free_energy(const FieldState& state, const ModelParams& p,
                                  const BoundarySpec& bc) {
    const int nx = state.grid.nx, ny = state.grid.ny;
    const double h = state.grid.dx_m();
    const double inv_h = 1.0 / h;
    double phase = 0.0, chem = 0.0;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const double phi = state.phi.at(iy, ix);
            const double a = state.cA.at(iy, ix);
            const double b = state.cB.at(iy, ix);
            const auto gp = detail::face_grad(state.phi, bc, 0.0, iy, ix, inv_h);
            const auto ga = detail::face_grad(state.cA, bc, 0.0, iy, ix, inv_h);
            const auto gb = detail::face_grad(state.cB, bc, 0.0, iy, ix, inv_h);
            phase += f_phase_density(phi, {gp.x, gp.y}, p);
            chem += f_chem_density(phi, a, b, {ga.x, ga.y}, {gb.x, gb.y}, p);
        }
    }
    const double cell = h * h;
    EnergyBreakdown out;
    out.f_phase_total = phase * cell;
    out.f_chem_total = chem * cell;
    out.F_total = out.f_phase_total + out.f_chem_total;
    return out;
}

Field2D dF_dphi(const FieldState& state, const ModelParams& p, const BoundarySpec& bc) {
    const int nx = state.grid.nx, ny = state.grid.ny;
    Field2D out(ny, nx);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const double phi = state.phi.at(iy, ix);
            const double a = state.cA.at(iy, ix);
            const double b = state.cB.at(iy, ix);
            const double cC = 1.0 - a - b;
            const double dg = a * p.g_A() + b * p.g_B() + cC * p.g_C();
            out.at(iy, ix) = (4.0 * p.sigma_sl / p.eta) * (1.0 - 2.0 * phi) +
                             detail::h_prime_unchecked(phi) * dg;
        }
    }
    const double coef = 4.0 * p.sigma_sl * p.eta / (kPi * kPi);
    detail::add_grad_energy_adjoint(state.phi, bc, 0.0, coef, state.grid.dx_m(), 1.0, out);
    return out;
}

void species_potentials(const FieldState& state, const ModelParams& p, const BoundarySpec& bc,
                        Field2D& mu_A, Field2D& mu_B) {
    const int nx = state.grid.nx, ny = state.grid.ny;
    mu_A = Field2D(ny, nx);
    mu_B = Field2D(ny, nx);
    const double kTV = p.kT_over_Va();
    const double gA = p.g_A(), gB = p.g_B(), gC = p.g_C();
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const double phi = state.phi.at(iy, ix);
            const double a = state.cA.at(iy, ix);
            const double b = state.cB.at(iy, ix);
            const double cC = 1.0 - a - b;
            const double hphi = detail::h_unchecked(std::clamp(phi, 0.0, 1.0));
            const double dC = detail::dentln(cC);
            mu_A.at(iy, ix) =
                kTV * (detail::dentln(a) - dC) + p.Omega_AC * (cC - a) + hphi * (gA - gC);
            mu_B.at(iy, ix) =
                kTV * (detail::dentln(b) - dC) - p.Omega_AC * a + hphi * (gB - gC);
        }
    }
    // Gradient-penalty adjoints: own-species term plus the shared cC term
    // entering through cC = 1 - cA - cB with a factor of -1.
    const double h = state.grid.dx_m();
    const double coef = 0.5 * p.kappa;
    detail::add_grad_energy_adjoint(state.cA, bc, 0.0, coef, h, 1.0, mu_A);
    detail::add_grad_energy_adjoint(state.cB, bc, 0.0, coef, h, 1.0, mu_B);
    Field2D sC(ny, nx);
    Field2D cC(ny, nx);
    for (std::size_t i = 0; i < cC.size(); ++i)
        cC.v[i] = 1.0 - state.cA.v[i] - state.cB.v[i];
    detail::add_grad_energy_adjoint(cC, bc, 1.0, coef, h, 1.0, sC);
    for (std::size_t i = 0; i < sC.size(); ++i) {
        mu_A.v[i] -= sC.v[i];
        mu_B.v[i] -= sC.v[i];
    }
}

Field2D diffusion_potential(const FieldState& state, const ModelParams& p, Species j,
                            const BoundarySpec& bc) {
    Field2D mu_A, mu_B;
    species_potentials(state, p, bc, mu_A, mu_B);
    return j == Species::A ? mu_A : mu_B;
}

MobilityPoint mobility_point(double phi, double cA, double cB, const ModelParams& p) {
    // Compositions are projected onto the simplex before evaluating, which
    // keeps the mobility matrix positive semidefinite (det = cA cB cC >= 0)
    // when a stiff front momentarily under- or overshoots.
    double a = std::clamp(cA, 0.0, 1.0);
    double b = std::clamp(cB, 0.0, 1.0);
    const double s = a + b;
    if (s > 1.0) {
        a /= s;
        b /= s;
    }
    const double front = p.D_liq * (1.0 - phi) * p.Va_over_kT();
    return {front * a * (1.0 - a), front * a * (-b), front * b * (1.0 - b)};
}

Field2D solute_mobility(const FieldState& state, const ModelParams& p, Species i, Species j) {
    const int nx = state.grid.nx, ny = state.grid.ny;
    Field2D out(ny, nx);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const MobilityPoint m = mobility_point(state.phi.v[k], state.cA.v[k], state.cB.v[k], p);
        if (i == Species::A && j == Species::A)
            out.v[k] = m.AA;
        else if (i == Species::B && j == Species::B)
            out.v[k] = m.BB;
        else
            out.v[k] = m.AB;
    }
    return out;
}

} // namespace lmd
