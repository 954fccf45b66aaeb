#pragma once

#include <string>

#include "moistns/errors.hpp"

namespace moistns {

enum class VrMode { Constant, Profile };
enum class QvsMode { Zero, Constant, Affine };
enum class Scheme { ImexEuler, ImexMidpoint };
enum class RunMode { Eulerian, Lagrangian, Both };
enum class InitKind { Equilibrium, Bump };

// Physical constants and model-mode switches. Immutable after load; safe to
// share across threads. All values are in the model's nondimensional units.
struct PhysParams {
    // fluid
    double mu = 1.0;       // shear viscosity, mu > 0
    double lambda = 0.0;   // second viscosity, 2*mu + lambda > 0
    double kappa = 1.0;    // heat conductivity
    double g = 0.0;        // gravity (0 in the small-data regime)

    // gas / heat-capacity constants
    double R_d = 1.0;
    double R_v = 1.0;
    double c_pd = 2.0;     // requires c_pd > R_d so gamma > 1
    double c_pv = 2.0;
    double c_1 = 1.0;      // liquid water heat capacity
    double p_ref = 1.0;
    double T_ref = 1.0;
    double L_ref = 1.0;

    // microphysics rate constants and thresholds
    double c_ev = 1.0;
    double c_cd = 1.0;
    double c_cn = 1.0;
    double c_ac = 1.0;
    double c_cr = 1.0;
    double q_cn = 1.0;
    double q_ac = 1.0;

    // saturation mixing ratio model
    double q_vs_star = 1.0;       // cap: 0 <= q_vs <= q_vs_star
    QvsMode q_vs_mode = QvsMode::Zero;
    double q_vs_value = 0.0;      // Constant mode
    double q_vs_c0 = 0.0;         // Affine mode: clamp(c0 + cp*p + cT*T, 0, q_vs_star)
    double q_vs_cp = 0.0;
    double q_vs_cT = 0.0;

    // sedimentation velocity
    VrMode V_r_mode = VrMode::Constant;
    double V_r_value = 1.0;

    bool simplified_mode = true;

    // Sedimentation velocity at height z. The profile variant is the smooth
    // parabola 4 z (1-z) scaled by V_r_value.
    double V_r(double z) const {
        if (V_r_mode == VrMode::Constant) return V_r_value;
        return V_r_value * 4.0 * z * (1.0 - z);
    }

    void validate() const;
};

// gamma = c_pd / (c_pd - R_d), strictly > 1.
double gamma_coeff(const PhysParams& p);

// Run configuration (grid, time stepping, output).
struct RunConfig {
    int nx = 32, ny = 32, nz = 32;
    double t_end = 1.0;
    double dt = 0.0;            // 0 means "auto"
    double cfl = 0.5;
    std::string output_dir = "out";
    int snapshot_every = 10;
    RunMode mode = RunMode::Eulerian;
    Scheme scheme = Scheme::ImexEuler;

    // initial condition
    InitKind init = InitKind::Equilibrium;
    double rho_bar = 1.0;
    double T_bar = 1.0;
    double delta = 0.0;          // bump amplitude for init=bump
    double u0_amplitude = 0.0;   // smooth initial velocity amplitude

    // verification switches
    bool freeze_velocity = false;
    bool micro_enabled = true;
    double negativity_floor = -1e-10;

    void validate() const;
};

// Parses a flat "key = value" file ('#' comments, UTF-8). Unknown keys are an
// error; validation failures name the violated constraint.
struct Config {
    PhysParams phys;
    RunConfig run;
};
Config load_config(const std::string& path);
Config parse_config_text(const std::string& text);

// Canonical textual form of the parameter set; hashed into output artifacts.
std::string canonical_params_text(const PhysParams& p);
unsigned long long params_hash(const PhysParams& p);

} // namespace moistns
