#include <benchmark/benchmark.h>

#include <cmath>

#include "moistns/lagrangian.hpp"
#include "moistns/solver.hpp"
#include "moistns/timestepper.hpp"

using namespace moistns;

namespace {

constexpr double kPi = 3.14159265358979323846;

State bumped_state(int n) {
    const Grid g(n, n, n);
    State s = equilibrium_state(g, 1.0, 1.0);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x(i), y = g.y(j), z = g.z(k);
                const double sz = std::sin(kPi * z);
                s.rho_d(i, j, k) += 0.05 * std::cos(2 * kPi * x) * sz;
                s.T(i, j, k) += 0.05 * std::cos(2 * kPi * y) * sz;
                s.u[0](i, j, k) = 0.1 * std::sin(2 * kPi * x) * sz;
                s.u[2](i, j, k) = 0.1 * std::sin(2 * kPi * y) * sz;
                s.q_v(i, j, k) = 0.01 * (1.0 + std::cos(2 * kPi * x)) * sz * sz;
            }
    return s;
}

void BM_Laplacian(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const State s = bumped_state(n);
    for (auto _ : state) benchmark::DoNotOptimize(laplacian(s.T));
    state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Laplacian)->Arg(32)->Arg(64);

void BM_Lame(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const State s = bumped_state(n);
    for (auto _ : state) benchmark::DoNotOptimize(lame(s.u, 1.0, 0.0));
    state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Lame)->Arg(32)->Arg(64);

void BM_ContinuityFlux(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const State s = bumped_state(n);
    for (auto _ : state)
        benchmark::DoNotOptimize(continuity_tendency(s.rho_d, s.u));
    state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_ContinuityFlux)->Arg(32)->Arg(64);

void BM_Rhs(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const State s = bumped_state(n);
    PhysParams p;
    for (auto _ : state) benchmark::DoNotOptimize(rhs(s, p));
    state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Rhs)->Arg(32)->Arg(64);

void BM_HelmholtzSolve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Grid g(n, n, n);
    Field b(g, BcKind::Neumann);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                b(i, j, k) = std::cos(2 * kPi * g.x(i)) * std::cos(kPi * g.z(k));
    for (auto _ : state) {
        Field x(g, BcKind::Neumann);
        x.fill(0.0);
        benchmark::DoNotOptimize(helmholtz_solve(x, b, 0.01));
    }
}
BENCHMARK(BM_HelmholtzSolve)->Arg(32);

void BM_ImexStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    PhysParams p;
    RunConfig rc;
    for (auto _ : state) {
        state.PauseTiming();
        State s = bumped_state(n);
        const double dt = auto_dt(s, p, 0.4);
        state.ResumeTiming();
        step(s, dt, p, rc, Scheme::ImexEuler);
        benchmark::DoNotOptimize(s.T(0, 0, 0));
    }
}
BENCHMARK(BM_ImexStep)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_LagrangianStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    PhysParams p;
    for (auto _ : state) {
        state.PauseTiming();
        LagrangianStepper ls(bumped_state(n), p);
        state.ResumeTiming();
        ls.step(1e-3);
        benchmark::DoNotOptimize(ls.state().T(0, 0, 0));
    }
}
BENCHMARK(BM_LagrangianStep)->Arg(16)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
