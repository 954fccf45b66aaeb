#include "moistns/thermo.hpp"

#include <algorithm>
#include <cmath>

namespace moistns {

ThermoCoeffs thermo_coeffs(const PhysParams& p, double q_v, double q_c,
                           double q_r) {
    ThermoCoeffs c;
    c.Q_m = 1.0 + q_v + q_c + q_r;
    if (p.simplified_mode) {
        c.Q_th = c.Q_m;
        c.Q_cp = -(1.0 + q_v);
        c.c_nu = 0.0;
        c.sigma = 0.0;
        return c;
    }
    const double gam = gamma_coeff(p);
    c.c_nu = p.c_pd + p.c_pv * q_v + p.c_1 * (q_c + q_r);
    c.sigma = ((p.c_pv / p.c_pd) * p.R_d - p.R_v) * q_v +
              (p.c_1 / p.c_pd) * p.R_d * (q_c + q_r);
    c.Q_th = c.c_nu / gam + c.sigma;
    c.Q_cp = -p.R_d - p.R_v * q_v;
    return c;
}

double thermo_Q1(const PhysParams& p, double q_v) {
    if (p.simplified_mode) return 1.0;
    // The long form R_v/(R_d + R_v q_v) * (sigma - (R_d/c_pd) c_nu) + c_pv - c_1
    // collapses to c_pv - c_1 - R_v for every admissible parameter set, so the
    // collapsed form is used; q_v stays in the signature for clarity at call
    // sites.
    (void)q_v;
    return p.c_pv - p.c_1 - p.R_v;
}

double thermo_Q1_long(const PhysParams& p, double q_v, double q_c,
                      double q_r) {
    if (p.simplified_mode) return 1.0;
    // Literal transcription of the un-collapsed display,
    //   R_v/(R_d + R_v q_v) * (sigma - (R_d/c_pd) c_nu) + c_pv - c_1,
    // kept as an independent path: the q_c, q_r contributions to sigma and
    // c_nu must cancel, leaving c_pv - c_1 - R_v.
    const double c_nu = p.c_pd + p.c_pv * q_v + p.c_1 * (q_c + q_r);
    const double sigma = ((p.c_pv / p.c_pd) * p.R_d - p.R_v) * q_v +
                         (p.c_1 / p.c_pd) * p.R_d * (q_c + q_r);
    return p.R_v / (p.R_d + p.R_v * q_v) *
               (sigma - (p.R_d / p.c_pd) * c_nu) +
           p.c_pv - p.c_1;
}

double thermo_Q2(const PhysParams& p) {
    if (p.simplified_mode) return 1.0;
    return p.L_ref - (p.c_pv - p.c_1) * p.T_ref;
}

double latent_heat(const PhysParams& p, double T) {
    if (p.simplified_mode) return 1.0;
    return p.L_ref + (p.c_pv - p.c_1) * (T - p.T_ref);
}

double eos_pressure(const PhysParams& p, double rho_d, double T, double q_v) {
    if (!(rho_d > 0.0)) throw DomainError("eos requires rho_d > 0");
    if (T < 0.0) throw DomainError("eos requires T >= 0");
    if (p.simplified_mode) return rho_d * (1.0 + q_v) * T;
    return rho_d * (p.R_d + p.R_v * q_v) * T;
}

double temperature_from_potential(const PhysParams& p, double theta,
                                  double pres) {
    if (!(pres > 0.0)) throw DomainError("potential temperature requires p > 0");
    const double gam = gamma_coeff(p);
    return theta * std::pow(pres / p.p_ref, (gam - 1.0) / gam);
}

double saturation_ratio(const PhysParams& p, double pres, double T) {
    switch (p.q_vs_mode) {
    case QvsMode::Zero:
        return 0.0;
    case QvsMode::Constant:
        return p.q_vs_value;
    case QvsMode::Affine:
    default:
        return std::clamp(p.q_vs_c0 + p.q_vs_cp * pres + p.q_vs_cT * T, 0.0,
                          p.q_vs_star);
    }
}

} // namespace moistns
