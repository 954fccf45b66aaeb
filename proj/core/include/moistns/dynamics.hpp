#pragma once

#include "moistns/grid.hpp"
#include "moistns/params.hpp"

namespace moistns {

// The six prognostic fields. rho_d carries no wall condition of its own
// (the continuity equation is hyperbolic); velocity is no-slip at the
// walls; T and the mixing ratios are zero-flux.
struct State {
    Grid grid;
    Field rho_d;
    VectorField u;
    Field T, q_v, q_c, q_r;
    double t = 0.0;
};

State make_state(const Grid& g);

// The constant steady state (rho_bar, 0, T_bar, 0, 1, 0). With q_vs = 0 and
// g = 0 every tendency vanishes.
State equilibrium_state(const Grid& g, double rho_bar, double T_bar);

// Throws StateInvalid on NaN/Inf, rho_d <= 0, or a mixing ratio below the
// negativity floor.
void check_state(const State& s, double negativity_floor);

// Optional manufactured forcing added to the explicit tendencies.
struct Forcing {
    Field f_rho;
    VectorField f_u;
    Field f_T, f_qv, f_qc, f_qr;
};

struct RhsOptions {
    bool freeze_velocity = false;  // keep u fixed (tendency 0)
    bool micro = true;             // evaluate phase-change sources
    const Forcing* forcing = nullptr;
};

// Split tendencies: the stiff diffusion operators ride implicitly with
// coefficients frozen at the evaluation state (scalar, so the implicit
// operators stay symmetric positive definite); everything else, including
// the drift between the frozen and the true diffusion coefficient, is
// explicit.
struct Tendencies {
    Field d_rho;           // fully explicit (conservative upwind flux form)
    VectorField expl_u;    // du/dt = expl_u + coef_u * Lame(u)
    Field expl_T;          // dT/dt = expl_T + coef_T * lap(T)
    Field expl_qv, expl_qc, expl_qr;  // dq/dt = expl_q + coef_q * lap(q)
    double coef_u = 0.0;   // 1 / mean(rho_d * Q_m)
    double coef_T = 0.0;   // kappa / mean(Q_th)
    double coef_q = 1.0;
};

Tendencies rhs(const State& s, const PhysParams& p, const RhsOptions& opts = {});

// Assembles the unsplit right-hand side d/dt of every field (explicit part
// plus the diffusion terms evaluated on the same state). Used by residual
// and consistency checks.
struct FullTendency {
    Field d_rho;
    VectorField d_u;
    Field d_T, d_qv, d_qc, d_qr;
};

FullTendency total_tendency(const State& s, const PhysParams& p,
                            const RhsOptions& opts = {});

double tendency_linf(const FullTendency& t);

// Conservative flux divergence of rho advected by u, with minmod-limited
// upwind reconstruction of rho at faces. Returns -div(rho u). Wall faces
// carry exactly zero flux (no-slip), so the cell sum telescopes to zero.
Field continuity_tendency(const Field& rho, const VectorField& u);

} // namespace moistns
