#pragma once

#include <functional>
#include <vector>

#include "moistns/dynamics.hpp"
#include "moistns/params.hpp"

namespace moistns {

struct StepReport {
    double t = 0.0;
    double dt_used = 0.0;
    int implicit_iters = 0;     // total CG iterations across the solves
    double max_cfl = 0.0;
    double min_rho_d = 0.0;
    double min_q = 0.0;         // most negative mixing ratio
    double max_rel_residual = 0.0;
};

// Advective step-size bound: dt = cfl * min(h/(|u|_inf + |V_r|_inf + eps),
// cap). Diffusion is implicit and imposes no constraint.
double auto_dt(const State& s, const PhysParams& p, double cfl);

// One IMEX step. Explicit Euler on advection/pressure/sources/coefficient
// drift, backward Euler (or Crank-Nicolson for the midpoint scheme) on the
// frozen-coefficient diffusion; rho_d fully explicit in flux form.
StepReport step(State& s, double dt, const PhysParams& p,
                const RunConfig& run, Scheme scheme = Scheme::ImexEuler,
                const RhsOptions& opts = {});

using SnapshotCallback =
    std::function<void(const State&, const StepReport&, int step_index)>;

// Integrates to run.t_end. Snapshots fire every run.snapshot_every steps and
// at the final step. Errors are rethrown with the failing time attached.
std::vector<StepReport> run(State& s, const Config& cfg,
                            const RhsOptions& opts = {},
                            const SnapshotCallback& on_snapshot = nullptr);

} // namespace moistns
