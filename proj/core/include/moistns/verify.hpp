#pragma once

#include <vector>

#include "moistns/dynamics.hpp"
#include "moistns/grid.hpp"
#include "moistns/params.hpp"

namespace moistns {

// --- manufactured-solution convergence ------------------------------------

// DiffusionOnly: frozen velocity, sources off, a single temperature Fourier
// mode with known analytic decay. Coupled: all six fields active with smooth
// trig profiles and precomputed forcing making them an exact steady
// solution; switch arguments are kept strictly one-sided (q_v > 0, q_c > 1,
// q_vs = 0) so every source term is smooth.
enum class MMSCaseKind { DiffusionOnly, Coupled };

struct MMSRow {
    int n = 0;
    double error = 0.0;
    double observed_order = 0.0;  // vs the previous level; 0 on the first row
};

// Physical parameters used by the coupled manufactured case; must agree with
// the generator of the forcing tables (scripts/gen_mms_forcing.py).
PhysParams mms_params(MMSCaseKind kind);

// Builds the exact fields of `kind` at time t on grid g.
State mms_exact_state(MMSCaseKind kind, const Grid& g, double t);

// Samples the forcing tables at cell centers (zero for DiffusionOnly).
Forcing mms_forcing(MMSCaseKind kind, const Grid& g);

// Integrates each level to t_end and reports max-over-fields Linf errors
// against the exact solution, with pairwise observed orders.
std::vector<MMSRow> mms_convergence(MMSCaseKind kind,
                                    const std::vector<int>& levels);

// --- 0-D box model ---------------------------------------------------------

// The spatially uniform reduction: rho_d and u frozen, only the phase-change
// sources and their latent heating act. Total water q_v+q_c+q_r is an exact
// invariant.
struct BoxState {
    double T = 1.0;
    double q_v = 0.0, q_c = 0.0, q_r = 0.0;
    double t = 0.0;
};

// Time derivative of the box system (the same algebra as the PDE sources,
// with every spatial operator dropped).
BoxState box_rhs(const BoxState& b, const PhysParams& p);

// Classical 4-stage explicit reference integrator at step dt_ref.
BoxState box_oracle(BoxState b0, double t_end, double dt_ref,
                    const PhysParams& p);

// Runs the PDE stepper on uniform fields initialized from b0 and returns the
// max discrepancy against (T, q_v, q_c, q_r) of a reference trajectory
// integrated at dt_ref.
double box_pde_discrepancy(const BoxState& b0, double t_end, double pde_dt,
                           double dt_ref, const PhysParams& p);

// --- equilibrium and small-data experiments --------------------------------

// ||rhs||_inf at the constant state (rho_bar, 0, T_bar, 0, 1, 0).
double equilibrium_residual(const PhysParams& p, const Grid& g,
                            double rho_bar, double T_bar);

// Max over cells and fields of the deviation from the equilibrium values.
double perturbation_norm(const State& s, double rho_bar, double T_bar);

struct StabilityReport {
    double norm_ratio = 0.0;    // sup_t ||perturbation|| / delta
    double min_rho_ratio = 1.0; // min_{t,x} rho_d / rho_bar
    std::vector<double> norms;  // per recorded step, aligned with reports
};

// Perturbs the equilibrium by a fixed smooth BC-compatible bump scaled by
// delta (mixing-ratio bumps kept nonnegative) and integrates to t_end.
StabilityReport stability_experiment(double delta, double t_end,
                                     const PhysParams& p, int n);

// --- linearized operator ---------------------------------------------------

// A smooth deterministic probe direction with q_v and q_c components
// strictly negative everywhere, so the switch terms are one-sided (locally
// linear or locally zero) at the equilibrium.
struct ProbeDirection {
    Field z_rho;
    VectorField z_u;
    Field z_T, z_qv, z_qc, z_qr;
};
ProbeDirection make_probe(const Grid& g);

// Action of the equilibrium-linearized block operator, assembled from the
// same discrete stencils the nonlinear right-hand side uses.
FullTendency linearized_apply(const ProbeDirection& z, const PhysParams& p,
                              double rho_bar, double T_bar);

struct LinOpRow {
    double eps = 0.0;
    double residual = 0.0;  // || A z - (RHS(eq+eps z) - RHS(eq))/eps ||_inf
};

// Finite-difference consistency of the linearized operator over an epsilon
// sweep; the residual should scale linearly with eps.
std::vector<LinOpRow> linearized_operator_residual(
    const PhysParams& p, const Grid& g, const std::vector<double>& eps_list);

} // namespace moistns
