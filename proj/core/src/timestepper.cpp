#include "moistns/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "moistns/parallel.hpp"
#include "moistns/solver.hpp"

namespace moistns {

namespace {

constexpr double kDtCap = 0.1;
constexpr double kVelEps = 1e-14;

double vmax(const State& s) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c) m = std::max(m, linf(s.u[c]));
    return m;
}

double vr_max(const PhysParams& p) {
    // the parabolic profile peaks at mid-height with value V_r_value
    return p.V_r_value;
}

void add_scaled(const Field& base, double dt, const Field& tend, Field& out) {
    const Grid& g = out.grid();
    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                out(i, j, k) = base(i, j, k) + dt * tend(i, j, k);
    });
}

double min_interior(const Field& f) {
    const Grid& g = f.grid();
    double m = f(0, 0, 0);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                m = std::min(m, f(i, j, k));
    return m;
}

struct SolveAccum {
    int iters = 0;
    double max_rel = 0.0;
    void add(const SolveStats& st) {
        iters += st.iters;
        max_rel = std::max(max_rel, st.rel_residual);
    }
};

} // namespace

double auto_dt(const State& s, const PhysParams& p, double cfl) {
    const Grid& g = s.grid;
    const double h = std::min({g.hx, g.hy, g.hz});
    const double speed = vmax(s) + vr_max(p) + kVelEps;
    return cfl * std::min(h / speed, kDtCap);
}

StepReport step(State& s, double dt, const PhysParams& p,
                const RunConfig& runcfg, Scheme scheme,
                const RhsOptions& opts) {
    if (!(dt > 0.0)) throw ValidationError("step requires dt > 0");
    const Grid& g = s.grid;
    SolveAccum acc;

    auto advance = [&](const State& base, const Tendencies& t, double step_dt,
                       double theta, State& out) {
        add_scaled(base.rho_d, step_dt, t.d_rho, out.rho_d);
        if (!opts.freeze_velocity) {
            VectorField b = {Field(g, BcKind::None), Field(g, BcKind::None),
                             Field(g, BcKind::None)};
            for (int c = 0; c < 3; ++c)
                add_scaled(base.u[c], step_dt, t.expl_u[c], b[c]);
            if (theta < 1.0) {
                const VectorField lb = lame(base.u, p.mu, p.lambda);
                for (int c = 0; c < 3; ++c)
                    axpy((1.0 - theta) * step_dt * t.coef_u, lb[c], b[c]);
            }
            acc.add(lame_solve(out.u, b, theta * step_dt * t.coef_u, p.mu,
                               p.lambda));
        }
        auto scalar = [&](Field& x, const Field& xb, const Field& expl,
                          double a) {
            Field b(g, BcKind::None);
            add_scaled(xb, step_dt, expl, b);
            if (theta < 1.0) axpy((1.0 - theta) * step_dt * a, laplacian(xb), b);
            acc.add(helmholtz_solve(x, b, theta * step_dt * a));
        };
        scalar(out.T, base.T, t.expl_T, t.coef_T);
        scalar(out.q_v, base.q_v, t.expl_qv, t.coef_q);
        scalar(out.q_c, base.q_c, t.expl_qc, t.coef_q);
        scalar(out.q_r, base.q_r, t.expl_qr, t.coef_q);
    };

    if (scheme == Scheme::ImexEuler) {
        const Tendencies t = rhs(s, p, opts);
        State next = s;  // initial guesses for the implicit solves
        advance(s, t, dt, 1.0, next);
        next.t = s.t + dt;
        s = std::move(next);
    } else {
        // midpoint predictor (IMEX Euler over dt/2), Crank-Nicolson corrector
        const Tendencies t0 = rhs(s, p, opts);
        State mid = s;
        advance(s, t0, 0.5 * dt, 1.0, mid);
        mid.t = s.t + 0.5 * dt;
        const Tendencies tm = rhs(mid, p, opts);
        State next = s;
        advance(s, tm, dt, 0.5, next);
        next.t = s.t + dt;
        s = std::move(next);
    }

    check_state(s, runcfg.negativity_floor);

    StepReport rep;
    rep.t = s.t;
    rep.dt_used = dt;
    rep.implicit_iters = acc.iters;
    rep.max_rel_residual = acc.max_rel;
    const double h = std::min({g.hx, g.hy, g.hz});
    rep.max_cfl = dt * (vmax(s) + vr_max(p)) / h;
    rep.min_rho_d = min_interior(s.rho_d);
    rep.min_q = std::min({min_interior(s.q_v), min_interior(s.q_c),
                          min_interior(s.q_r)});
    return rep;
}

std::vector<StepReport> run(State& s, const Config& cfg,
                            const RhsOptions& opts,
                            const SnapshotCallback& on_snapshot) {
    const RunConfig& rc = cfg.run;
    std::vector<StepReport> series;
    if (rc.t_end <= 0.0) return series;  // degenerate: nothing to do
    int index = 0;
    while (s.t < rc.t_end - 1e-14) {
        double dt = rc.dt > 0.0 ? rc.dt : auto_dt(s, cfg.phys, rc.cfl);
        dt = std::min(dt, rc.t_end - s.t);
        StepReport rep;
        try {
            rep = step(s, dt, cfg.phys, rc, rc.scheme, opts);
        } catch (const Error& e) {
            throw StateInvalid(std::string(e.what()) + " at t = " +
                               std::to_string(s.t));
        }
        series.push_back(rep);
        ++index;
        if (on_snapshot &&
            (index % rc.snapshot_every == 0 || s.t >= rc.t_end - 1e-14))
            on_snapshot(s, rep, index);
    }
    return series;
}

} // namespace moistns
