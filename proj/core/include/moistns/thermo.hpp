#pragma once

#include "moistns/params.hpp"

namespace moistns {

// Moisture-weighted coefficients at a single point. In simplified mode the
// inertia and heat-capacity weights coincide (Q_m = Q_th = 1+q_v+q_c+q_r)
// and Q_cp = -(1+q_v); in the general mode they come from the full
// heat-capacity bookkeeping.
struct ThermoCoeffs {
    double Q_m;    // inertia weight multiplying rho_d in the momentum balance
    double Q_th;   // heat-capacity weight multiplying D_t T
    double Q_cp;   // compression-work weight (multiplies T div u as -Q_cp)
    double c_nu;   // mixture heat capacity at constant volume
    double sigma;  // moisture correction to the heat capacity
};

ThermoCoeffs thermo_coeffs(const PhysParams& p, double q_v, double q_c,
                           double q_r);

// Latent-heat couplings in the temperature equation. In simplified mode
// Q_1 = Q_2 = 1.
double thermo_Q1(const PhysParams& p, double q_v);
// Un-collapsed form of Q_1 (kept as a self-check against the short form;
// the q_c, q_r dependence must cancel).
double thermo_Q1_long(const PhysParams& p, double q_v, double q_c, double q_r);
double thermo_Q2(const PhysParams& p);
double latent_heat(const PhysParams& p, double T);

// Moist ideal-gas law. Simplified: p = rho_d (1+q_v) T; general:
// p = rho_d (R_d + R_v q_v) T. Requires rho_d > 0 and T >= 0.
double eos_pressure(const PhysParams& p, double rho_d, double T, double q_v);

// T = theta * (pres/p_ref)^((gamma-1)/gamma)
double temperature_from_potential(const PhysParams& p, double theta,
                                  double pres);

// Saturation mixing ratio as a function of pressure and temperature,
// clamped to [0, q_vs_star].
double saturation_ratio(const PhysParams& p, double pres, double T);

} // namespace moistns
