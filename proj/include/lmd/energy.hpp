#pragma once

#include <array>

#include "lmd/field.hpp"
#include "lmd/params.hpp"

namespace lmd {

// Mole fractions below this are log-regularized: ln(max(c, kLogEps)). The
// pure phases the simulation starts from (cA = cB = 0 in the liquid) make
// the ideal-entropy term singular otherwise.
inline constexpr double kLogEps = 1e-9;

enum class Species { A, B };

// Energy totals per unit depth (density integrated over the 2D domain with
// cell measure dx^2), in J/m.
struct EnergyBreakdown {
    double f_phase_total = 0.0;
    double f_chem_total = 0.0;
    double F_total = 0.0;
};

// Interpolation between the liquid (h(0)=0) and solid (h(1)=1) reference
// states:  h(phi) = 1/2 + (2/pi)[(2phi-1)sqrt(phi(1-phi)) + arcsin(2phi-1)/2].
// Inputs may drift outside [0,1] by at most 1e-12; anything larger throws.
double h_interp(double phi);
// dh/dphi = (8/pi) sqrt(phi(1-phi)).
double h_prime(double phi);

// Solid-liquid reference energy difference sum_i c_i L_i (T - T_i)/T_i for a
// composition on the simplex (checked to 1e-9).
double delta_g_sl(double cA, double cB, double cC, const ModelParams& p);

// (4 sigma / eta) [ (eta^2/pi^2) |grad phi|^2 + phi(1-phi) ], J/m^3.
double f_phase_density(double phi, const std::array<double, 2>& grad_phi, const ModelParams& p);

// Regular-solution chemical energy density: ideal entropy + Omega_AC cA cC +
// h(phi) delta_g_sl + (kappa/2) sum_i |grad c_i|^2 with grad cC = -gA - gB.
double f_chem_density(double phi, double cA, double cB, const std::array<double, 2>& grad_cA,
                      const std::array<double, 2>& grad_cB, const ModelParams& p);

// Sums the densities over all cells times dx^2. Gradient energies use the
// central difference at each cell's east and north face (ghost rows from the
// BoundarySpec), so every face is counted exactly once and the functional
// derivative of the gradient term is the compact 5-point Laplacian.
EnergyBreakdown total_free_energy(const FieldState& state, const ModelParams& p,
                                  const BoundarySpec& bc);

// delta F / delta phi as a field (J/m^3). In the bulk this is
//   (4 sigma/eta)(1 - 2 phi) - (8 sigma eta / pi^2) lap(phi) + h'(phi) dg_sl,
// discretized as the exact adjoint of the discrete energy above, so a central
// finite difference of total_free_energy reproduces it to rounding.
Field2D dF_dphi(const FieldState& state, const ModelParams& p, const BoundarySpec& bc);

// delta F / delta c_j under the substitution cC = 1 - cA - cB (the diffusion
// potential of species j measured against C). Same exact-adjoint contract.
Field2D diffusion_potential(const FieldState& state, const ModelParams& p, Species j,
                            const BoundarySpec& bc);

// Computes both species potentials in one pass (the solver hot path).
void species_potentials(const FieldState& state, const ModelParams& p, const BoundarySpec& bc,
                        Field2D& mu_A, Field2D& mu_B);

// M_ij = D_liq (1 - phi) (V_a/kT) c_i (delta_ij - c_j), evaluated pointwise.
Field2D solute_mobility(const FieldState& state, const ModelParams& p, Species i, Species j);

// Scalar mobility triple at one sample point; the conservative flux assembly
// evaluates this on cell faces.
struct MobilityPoint {
    double AA, AB, BB;
};
MobilityPoint mobility_point(double phi, double cA, double cB, const ModelParams& p);

namespace detail {

// Unchecked scalar kernels shared by the field loops and the public ops.
double h_unchecked(double phi);
double entln(double c);  // c * ln(max(c, kLogEps))
double dentln(double c); // derivative of entln

// Scatters the exact derivative of the face-difference gradient energy
//   sum_faces coef * ((f_across - f_here)/dx)^2
// into `out` (density-level, i.e. already divided by dx^2). In the bulk this
// equals -2*coef*laplacian(f) with the compact 5-point stencil; Dirichlet-top
// ghost faces contribute only to their interior cell and the zero-gradient
// bottom face contributes nothing.
void add_grad_energy_adjoint(const Field2D& f, const BoundarySpec& bc, double dirichlet_top,
                             double coef, double dx_m, double sign, Field2D& out);

} // namespace detail

} // namespace lmd
