#include <doctest.h>

#include <cmath>

#include "moistns/grid.hpp"

using namespace moistns;

namespace {
constexpr double kPi = 3.14159265358979323846;

Field make_scalar(const Grid& g, BcKind bc, double (*fn)(double, double, double)) {
    Field f(g, bc);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                f(i, j, k) = fn(g.x(i), g.y(j), g.z(k));
    return f;
}
} // namespace

TEST_CASE("grid rejects tiny extents") {
    CHECK_THROWS_AS(Grid(2, 8, 8), ValidationError);
    CHECK_NOTHROW(Grid(4, 4, 4));
}

TEST_CASE("periodic ghosts wrap in x and y") {
    const Grid g(8, 8, 8);
    Field f = make_scalar(g, BcKind::None, [](double x, double y, double) {
        return std::sin(2 * kPi * x) + std::cos(2 * kPi * y);
    });
    f.fill_ghosts();
    CHECK(f(-1, 3, 3) == f(g.nx - 1, 3, 3));
    CHECK(f(-2, 3, 3) == f(g.nx - 2, 3, 3));
    CHECK(f(g.nx, 3, 3) == f(0, 3, 3));
    CHECK(f(2, -1, 3) == f(2, g.ny - 1, 3));
    CHECK(f(2, g.ny + 1, 3) == f(2, 1, 3));
}

TEST_CASE("Dirichlet ghosts reflect oddly") {
    const Grid g(8, 8, 8);
    Field f(g, BcKind::Dirichlet0);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) f(i, j, k) = g.z(k);  // odd about z=0
    f.fill_ghosts();
    CHECK(f(3, 3, -1) == -f(3, 3, 0));
    CHECK(f(3, 3, -2) == -f(3, 3, 1));
    CHECK(f(3, 3, g.nz) == -f(3, 3, g.nz - 1));
    // odd continuation makes the first-cell derivative exact for linear z
    Field d = d1(f, 2);
    CHECK(d(3, 3, 0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(d(3, 3, g.nz / 2) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("Neumann ghosts honor attached wall data") {
    const Grid g(8, 8, 8);
    // f = z^2: dz f = 0 at z=0 and 2 at z=1
    Field f = make_scalar(g, BcKind::Neumann,
                          [](double, double, double z) { return z * z; });
    std::vector<double> lo(g.nx * g.ny, 0.0), hi(g.nx * g.ny, 2.0);
    f.set_neumann_data(lo, hi);
    Field d2z = d2(f, 2);
    Field dz = d1(f, 2);
    for (int k : {0, g.nz / 2, g.nz - 1}) {
        CHECK(d2z(2, 2, k) == doctest::Approx(2.0).epsilon(1e-11));
        CHECK(dz(2, 2, k) == doctest::Approx(2.0 * g.z(k)).epsilon(1e-11));
    }
    // homogeneous condition: even functions are differentiated exactly
    f.clear_neumann_data();
    Field even = make_scalar(g, BcKind::Neumann, [](double, double, double z) {
        return std::cos(kPi * z);
    });
    Field dz2 = d1(even, 2);
    const double hz = g.hz;
    CHECK(dz2(1, 1, 0) ==
          doctest::Approx(-std::sin(kPi * g.z(0)) * std::sin(kPi * hz) / hz)
              .epsilon(1e-12));
}

TEST_CASE("deriv_raw is one-sided second order at the walls") {
    const Grid g(8, 8, 8);
    Field f = make_scalar(g, BcKind::None,
                          [](double, double, double z) { return z * z; });
    Field d = deriv_raw(f, 2);
    for (int k = 0; k < g.nz; ++k)
        CHECK(d(4, 4, k) == doctest::Approx(2.0 * g.z(k)).epsilon(1e-11));
}

TEST_CASE("second-order convergence of d1 on a trig profile") {
    double prev = 0.0;
    for (int n : {16, 32}) {
        const Grid g(n, n, n);
        Field f = make_scalar(g, BcKind::None, [](double x, double, double) {
            return std::sin(2 * kPi * x);
        });
        Field d = d1(f, 0);
        double err = 0.0;
        for (int i = 0; i < g.nx; ++i)
            err = std::max(err, std::fabs(d(i, 2, 2) -
                                          2 * kPi * std::cos(2 * kPi * g.x(i))));
        if (prev > 0.0) CHECK(prev / err > 3.5);
        prev = err;
    }
}

TEST_CASE("laplacian agrees with the sum of second derivatives") {
    const Grid g(12, 12, 12);
    Field f = make_scalar(g, BcKind::Neumann, [](double x, double y, double z) {
        return std::sin(2 * kPi * x) * std::cos(2 * kPi * y) * std::cos(kPi * z);
    });
    Field lap = laplacian(f);
    Field s = d2(f, 0);
    Field sy = d2(f, 1), sz = d2(f, 2);
    double m = 0.0;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                m = std::max(m, std::fabs(lap(i, j, k) - s(i, j, k) -
                                          sy(i, j, k) - sz(i, j, k)));
    CHECK(m < 1e-11);
}

TEST_CASE("divergence of a curl-type field is small") {
    const Grid g(24, 24, 24);
    VectorField u = make_velocity(g);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x(i), y = g.y(j), z = g.z(k);
                // div-free: u = (dyPsi, -dxPsi, 0), Psi = sin sin sin(pi z)
                u[0](i, j, k) = 2 * kPi * std::sin(2 * kPi * x) *
                                std::cos(2 * kPi * y) * std::sin(kPi * z);
                u[1](i, j, k) = -2 * kPi * std::cos(2 * kPi * x) *
                                std::sin(2 * kPi * y) * std::sin(kPi * z);
                u[2](i, j, k) = 0.0;
            }
    CHECK(linf(divergence(u)) < 0.3);  // truncation only, O(h^2) of an O(40) field
}

TEST_CASE("lame operator combines laplacian and grad-div") {
    const Grid g(12, 12, 12);
    VectorField u = make_velocity(g);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x(i), y = g.y(j), z = g.z(k);
                u[0](i, j, k) = std::sin(2 * kPi * x) * std::sin(kPi * z);
                u[1](i, j, k) = std::cos(2 * kPi * y) * std::sin(kPi * z);
                u[2](i, j, k) = std::sin(2 * kPi * (x + y)) * std::sin(kPi * z);
            }
    const double mu = 1.5, lam = 0.25;
    VectorField L = lame(u, mu, lam);
    VectorField gd = graddiv(u);
    for (int c = 0; c < 3; ++c) {
        Field lapc = laplacian(u[c]);
        double m = 0.0;
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    m = std::max(m, std::fabs(L[c](i, j, k) -
                                              mu * lapc(i, j, k) -
                                              (mu + lam) * gd[c](i, j, k)));
        CHECK(m < 1e-10);
    }
}

TEST_CASE("reductions: compensated sum, dot, l2, axpy") {
    const Grid g(8, 8, 8);
    Field a(g, BcKind::None), b(g, BcKind::None);
    a.fill(0.1);
    b.fill(3.0);
    CHECK(sum(a) == doctest::Approx(0.1 * g.ncells()).epsilon(1e-14));
    CHECK(dot(a, b) == doctest::Approx(0.3 * g.ncells()).epsilon(1e-14));
    CHECK(l2(b) == doctest::Approx(3.0).epsilon(1e-14));  // h^3-weighted
    axpy(2.0, b, a);
    CHECK(a(1, 2, 3) == doctest::Approx(6.1));
    CHECK(linf_diff(a, b) == doctest::Approx(3.1));
}
