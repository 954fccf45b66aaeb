#include <doctest.h>

#include <cmath>

#include "moistns/solver.hpp"

using namespace moistns;

namespace {
constexpr double kPi = 3.14159265358979323846;
} // namespace

TEST_CASE("sigma = 0 returns the right-hand side unchanged") {
    const Grid g(8, 8, 8);
    Field b(g, BcKind::Neumann);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                b(i, j, k) = std::sin(2 * kPi * g.x(i)) + g.z(k);
    Field x(g, BcKind::Neumann);
    x.fill(0.0);
    const SolveStats st = helmholtz_solve(x, b, 0.0);
    CHECK(linf_diff(x, b) <= 1e-12);
    CHECK(st.rel_residual <= 1e-10);
}

TEST_CASE("exact initial guess converges in zero iterations") {
    const Grid g(8, 8, 8);
    Field b(g, BcKind::Neumann);
    b.fill(1.25);
    Field x(g, BcKind::Neumann);
    x.fill(1.25);  // lap of a constant is 0, so x = b is the exact solution
    const SolveStats st = helmholtz_solve(x, b, 0.37);
    CHECK(st.iters == 0);
    CHECK(linf_diff(x, b) == 0.0);
}

TEST_CASE("manufactured Helmholtz solve with Neumann walls") {
    const Grid g(16, 16, 16);
    const double sigma = 0.05;
    // exact solution compatible with the homogeneous Neumann condition
    Field xe(g, BcKind::Neumann);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                xe(i, j, k) = std::cos(2 * kPi * g.x(i)) *
                              std::cos(2 * kPi * g.y(j)) *
                              std::cos(kPi * g.z(k));
    // b = (I - sigma lap) xe evaluated with the discrete operator
    Field b = laplacian(xe);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                b(i, j, k) = xe(i, j, k) - sigma * b(i, j, k);
    Field x(g, BcKind::Neumann);
    x.fill(0.0);
    const SolveStats st = helmholtz_solve(x, b, sigma);
    CHECK(st.rel_residual <= 1e-10);
    CHECK(linf_diff(x, xe) <= 1e-8);
}

TEST_CASE("inhomogeneous Neumann data shifts the solution consistently") {
    const Grid g(12, 12, 12);
    const double sigma = 0.1;
    // exact solution z^2 + z carries dz = 1 at z=0 and 3 at z=1
    Field xe(g, BcKind::Neumann);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                xe(i, j, k) = g.z(k) * g.z(k) + g.z(k);
    std::vector<double> lo(g.nx * g.ny, 1.0), hi(g.nx * g.ny, 3.0);
    xe.set_neumann_data(lo, hi);
    Field b = laplacian(xe);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                b(i, j, k) = xe(i, j, k) - sigma * b(i, j, k);
    Field x(g, BcKind::Neumann);
    x.fill(0.0);
    x.set_neumann_data(lo, hi);
    const SolveStats st = helmholtz_solve(x, b, sigma);
    CHECK(st.rel_residual <= 1e-10);
    double m = 0.0;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                m = std::max(m, std::fabs(x(i, j, k) - xe(i, j, k)));
    CHECK(m <= 1e-8);
}

TEST_CASE("manufactured Lame solve for a no-slip field") {
    const Grid g(12, 12, 12);
    const double sigma = 0.02, mu = 1.0, lam = 0.5;
    VectorField ue = make_velocity(g);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double sz = std::sin(kPi * g.z(k));
                ue[0](i, j, k) = std::sin(2 * kPi * g.x(i)) * sz;
                ue[1](i, j, k) = std::cos(2 * kPi * g.y(j)) * sz;
                ue[2](i, j, k) = std::sin(2 * kPi * g.x(i)) *
                                 std::sin(2 * kPi * g.y(j)) * sz;
            }
    VectorField b = lame(ue, mu, lam);
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    b[c](i, j, k) = ue[c](i, j, k) - sigma * b[c](i, j, k);
    VectorField u = make_velocity(g);
    const SolveStats st = lame_solve(u, b, sigma, mu, lam);
    CHECK(st.rel_residual <= 1e-10);
    double m = 0.0;
    for (int c = 0; c < 3; ++c) m = std::max(m, linf_diff(u[c], ue[c]));
    CHECK(m <= 1e-8);
}

TEST_CASE("indefinite operator is rejected") {
    const Grid g(8, 8, 8);
    Field b(g, BcKind::Neumann);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                b(i, j, k) = std::cos(2 * kPi * g.x(i));
    Field x(g, BcKind::Neumann);
    x.fill(0.0);
    // large negative sigma makes I - sigma*lap indefinite
    CHECK_THROWS_AS(helmholtz_solve(x, b, -1.0e3), SolverDiverged);
}
