#pragma once

#include "lmd/errors.hpp"

namespace lmd {

// Thermodynamic and kinetic constants of the dealloying model, SI units.
// Defaults are the production parameter set for the Ta/Ti/Cu-like A/B/C
// system: A nearly insoluble in the liquid C bath (large positive Omega_AC,
// high melting point), B selectively dissolved.
struct ModelParams {
    double T = 1775.0;          // K
    double eta = 4e-9;          // m, diffuse interface width
    double sigma_sl = 0.2;      // J/m^2, solid-liquid interfacial energy
    double kappa = 2.4e-9;      // J/m, composition gradient penalty
    double L_A = 2.82e9;        // J/m^3, latent heats of melting
    double L_B = 1.89e9;
    double L_C = 1.84e9;
    double T_A = 3290.0;        // K, melting temperatures
    double T_B = 1941.0;
    double T_C = 1358.0;
    double V_a = 0.01e-27;      // m^3, atomic volume
    double Omega_AC = 1.44e10;  // J/m^3, A-C excess mixing enthalpy
    double M_phi = 12.0;        // m/(s*GPa), interface mobility
    double D_liq = 7e-9;        // m^2/s, liquid diffusivity
    static constexpr double k_B = 1.380649e-23; // J/K

    double kT_over_Va() const { return k_B * T / V_a; }
    double Va_over_kT() const { return V_a / (k_B * T); }
    // Interface mobility in SI (m/(s*Pa)).
    double M_phi_si() const { return M_phi * 1e-9; }
    // Latent-heat driving force per unit mole fraction of species i.
    double g_A() const { return L_A * (T - T_A) / T_A; }
    double g_B() const { return L_B * (T - T_B) / T_B; }
    double g_C() const { return L_C * (T - T_C) / T_C; }

    void validate() const {
        if (T <= 0 || eta <= 0 || sigma_sl <= 0 || kappa <= 0 || L_A <= 0 || L_B <= 0 ||
            L_C <= 0 || T_A <= 0 || T_B <= 0 || T_C <= 0 || V_a <= 0 || M_phi < 0 || D_liq < 0)
            throw ConfigError("params: non-positive physical constant");
    }
};

} // namespace lmd
