#include <doctest.h>

#include <cmath>

#include "moistns/timestepper.hpp"

using namespace moistns;

namespace {
constexpr double kPi = 3.14159265358979323846;

State diffusion_mode_state(const Grid& g, double amp) {
    State s = make_state(g);
    s.rho_d.fill(1.0);
    s.q_c.fill(1.0);  // Q_th = 2
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                s.T(i, j, k) = 1.0 + amp * std::cos(2 * kPi * g.x(i));
    return s;
}
} // namespace

TEST_CASE("auto dt follows the advective bound with a cap") {
    PhysParams p;  // V_r = 1
    const Grid g(8, 8, 8);
    State s = equilibrium_state(g, 1.0, 1.0);
    CHECK(auto_dt(s, p, 0.5) == doctest::Approx(0.05));  // h/(|u|+V_r) hits the cap
    s.u[0].fill(4.0);
    CHECK(auto_dt(s, p, 0.5) == doctest::Approx(0.5 * g.hx / 5.0).epsilon(1e-10));
    p.V_r_value = 0.0;
    s.u[0].fill(0.0);
    CHECK(auto_dt(s, p, 0.5) == doctest::Approx(0.05));  // capped
}

TEST_CASE("backward Euler damps a diffusion mode by the exact discrete factor") {
    PhysParams p;
    const Grid g(16, 16, 16);
    State s = diffusion_mode_state(g, 0.1);
    RunConfig rc;
    const double dt = 0.01;
    RhsOptions opts;
    opts.freeze_velocity = true;
    opts.micro = false;
    step(s, dt, p, rc, Scheme::ImexEuler, opts);
    const double lam_h = (2.0 - 2.0 * std::cos(2 * kPi * g.hx)) / (g.hx * g.hx);
    const double expect = 1.0 / (1.0 + dt * 0.5 * lam_h);
    for (int i : {0, 3, 7}) {
        const double amp0 = 0.1 * std::cos(2 * kPi * g.x(i));
        CHECK(s.T(i, 2, 2) - 1.0 == doctest::Approx(amp0 * expect).epsilon(1e-8));
    }
    // and the continuum estimate 1/(1 + dt 4pi^2 / Q_th) is close
    CHECK(expect == doctest::Approx(1.0 / (1.0 + dt * 4 * kPi * kPi / 2.0))
                        .epsilon(0.05));
}

TEST_CASE("midpoint scheme reproduces the Crank-Nicolson factor") {
    PhysParams p;
    const Grid g(16, 16, 16);
    State s = diffusion_mode_state(g, 0.1);
    RunConfig rc;
    const double dt = 0.01;
    RhsOptions opts;
    opts.freeze_velocity = true;
    opts.micro = false;
    step(s, dt, p, rc, Scheme::ImexMidpoint, opts);
    const double lam_h = (2.0 - 2.0 * std::cos(2 * kPi * g.hx)) / (g.hx * g.hx);
    const double z = dt * 0.5 * lam_h;
    const double expect = (1.0 - 0.5 * z) / (1.0 + 0.5 * z);
    const double amp0 = 0.1 * std::cos(2 * kPi * g.x(0));
    CHECK(s.T(0, 2, 2) - 1.0 == doctest::Approx(amp0 * expect).epsilon(1e-8));
}

TEST_CASE("equilibrium is a fixed point of the stepper") {
    PhysParams p;
    const Grid g(8, 8, 8);
    State s = equilibrium_state(g, 1.0, 1.0);
    RunConfig rc;
    for (int it = 0; it < 20; ++it) step(s, 0.05, p, rc, Scheme::ImexEuler, {});
    double dev = linf_diff(s.rho_d, equilibrium_state(g, 1.0, 1.0).rho_d);
    CHECK(dev <= 1e-12);
    CHECK(linf(s.u[0]) <= 1e-12);
    CHECK(linf_diff(s.q_c, equilibrium_state(g, 1.0, 1.0).q_c) <= 1e-12);
}

TEST_CASE("run integrates to t_end and fires snapshots") {
    Config cfg;
    cfg.run.nx = cfg.run.ny = cfg.run.nz = 8;
    cfg.run.t_end = 0.2;
    cfg.run.snapshot_every = 2;
    State s = equilibrium_state(Grid(8, 8, 8), 1.0, 1.0);
    int snaps = 0;
    double last_t = -1.0;
    const auto series = run(s, cfg, {}, [&](const State& st, const StepReport&, int) {
        ++snaps;
        last_t = st.t;
    });
    CHECK(!series.empty());
    CHECK(s.t == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(snaps >= 1);
    CHECK(last_t == doctest::Approx(0.2).epsilon(1e-12));
    for (const auto& r : series) {
        CHECK(r.min_rho_d == doctest::Approx(1.0));
        CHECK(r.max_rel_residual <= 1e-10);
    }
}

TEST_CASE("state collapse is reported with the failing time") {
    Config cfg;
    cfg.run.nx = cfg.run.ny = cfg.run.nz = 8;
    cfg.run.t_end = 10.0;
    cfg.run.dt = 0.2;  // far beyond the advective limit
    State s = equilibrium_state(Grid(8, 8, 8), 1.0, 1.0);
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i)
                s.u[0](i, j, k) = 30.0 * std::sin(2 * kPi * s.grid.x(i)) *
                                  std::sin(kPi * s.grid.z(k));
    CHECK_THROWS_WITH_AS(run(s, cfg, {}, nullptr),
                         doctest::Contains("at t = "), StateInvalid);
}
