#include <doctest.h>

#include <cmath>

#include "moistns/lagrangian.hpp"
#include "moistns/timestepper.hpp"

using namespace moistns;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Steady Lagrangian velocity u(y); with set_initial_velocity(u) followed by
// advance(u, 1.0) the trapezoid gives D = u exactly.
LagrangianMap map_from_velocity(const Grid& g, const VectorField& u) {
    LagrangianMap map(g);
    map.set_initial_velocity(u);
    map.advance(u, 1.0);
    return map;
}

// Horizontal shear D_1 = alpha sin(2 pi y_2), constant in y_1, y_3.
LagrangianMap shear_map(const Grid& g, double alpha) {
    VectorField u = make_velocity(g);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                u[0](i, j, k) = alpha * std::sin(2 * kPi * g.y(j));
    return map_from_velocity(g, u);
}

} // namespace

TEST_CASE("identity map carries exact tensors") {
    const Grid g(8, 8, 8);
    const LagrangianMap map = identity_map(g);
    CHECK(map.deviation() == 0.0);
    CHECK(map.valid());
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const double want = a == b ? 1.0 : 0.0;
            for (int k : {0, 3, 7})
                for (int i : {0, 5}) {
                    CHECK(map.gradX()[3 * a + b](i, 2, k) == want);
                    CHECK(map.Z()[3 * a + b](i, 2, k) == want);
                }
        }
    const auto dZ = z_derivatives(map.Z());
    double m = 0.0;
    for (const auto& f : dZ) m = std::max(m, linf(f));
    CHECK(m == 0.0);
    CHECK(map.X(0, 3, 0, 0) == doctest::Approx(g.x(3)));
}

TEST_CASE("Z is the pointwise inverse of the map gradient") {
    const Grid g(16, 16, 8);
    const LagrangianMap map = shear_map(g, 0.05);
    // discrete deviation of the shear: the centered difference of the sine,
    // maximized over cell centers (nearest center sits h/2 off the crest)
    CHECK(map.deviation() ==
          doctest::Approx(0.05 * std::cos(kPi * g.hy) *
                          std::sin(2 * kPi * g.hy) / g.hy));
    double worst = 0.0;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) {
                        double acc = 0.0;
                        for (int c = 0; c < 3; ++c)
                            acc += map.Z()[3 * a + c](i, j, k) *
                                   map.gradX()[3 * c + b](i, j, k);
                        worst = std::max(
                            worst, std::fabs(acc - (a == b ? 1.0 : 0.0)));
                    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("deviation past one half degenerates the map") {
    const Grid g(16, 16, 8);
    VectorField u = make_velocity(g);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                u[0](i, j, k) = 0.2 * std::sin(2 * kPi * g.y(j));
    LagrangianMap map(g);
    map.set_initial_velocity(u);
    CHECK_THROWS_AS(map.advance(u, 1.0), MapDegenerate);
}

TEST_CASE("direct and analytic Z derivatives agree to second order") {
    auto maxdiff = [](int n) {
        const Grid g(n, n, n);
        VectorField u = make_velocity(g);
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    u[0](i, j, k) = 0.04 * std::sin(2 * kPi * g.y(j));
                    u[1](i, j, k) = 0.03 * std::cos(2 * kPi * g.x(i));
                }
        const LagrangianMap map = map_from_velocity(g, u);
        const auto direct = z_derivatives(map.Z());
        const auto analytic = z_derivatives_analytic(map);
        double m = 0.0;
        for (int e = 0; e < 27; ++e)
            m = std::max(m, linf_diff(direct[e], analytic[e]));
        return m;
    };
    const double e16 = maxdiff(16);
    const double e32 = maxdiff(32);
    CHECK(e16 <= 0.5);
    CHECK(e32 <= std::max(e16 / 3.0, 1e-12));
}

TEST_CASE("transformed operators reduce bitwise at the identity") {
    const Grid g(12, 12, 12);
    const LagrangianMap map = identity_map(g);
    const auto dZ = z_derivatives(map.Z());

    Field f(g, BcKind::Neumann);
    VectorField u = make_velocity(g);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x(i), y = g.y(j), z = g.z(k);
                f(i, j, k) = std::cos(2 * kPi * x) * std::sin(2 * kPi * y) *
                             std::cos(kPi * z);
                const double sz = std::sin(kPi * z);
                u[0](i, j, k) = std::sin(2 * kPi * x) * sz;
                u[1](i, j, k) = std::cos(2 * kPi * y) * sz;
                u[2](i, j, k) = std::sin(2 * kPi * (x + y)) * sz;
            }

    CHECK(linf_diff(transformed_laplacian(f, map.Z(), dZ), laplacian(f)) ==
          0.0);
    const VectorField t2 = transformed_divgrad(u, map.Z(), dZ);
    const VectorField gd = graddiv(u);
    for (int c = 0; c < 3; ++c) CHECK(linf_diff(t2[c], gd[c]) == 0.0);
}

TEST_CASE("transformed Laplacian matches the chain-rule oracle") {
    const double alpha = 0.05;
    auto err = [&](int n) {
        const Grid g(n, n, 8);
        const LagrangianMap map = shear_map(g, alpha);
        const auto dZ = z_derivatives(map.Z());
        Field f(g, BcKind::Neumann);
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    f(i, j, k) = std::sin(2 * kPi * g.x(i));
        const Field lf = transformed_laplacian(f, map.Z(), dZ);
        double m = 0.0;
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double s1 = std::sin(2 * kPi * g.x(i));
                    const double c1 = std::cos(2 * kPi * g.x(i));
                    const double s2 = std::sin(2 * kPi * g.y(j));
                    const double c2 = std::cos(2 * kPi * g.y(j));
                    const double a = 2 * kPi * alpha * c2;  // dX_1/dy_2
                    const double exact =
                        -4 * kPi * kPi * s1 * (1.0 + a * a) +
                        8 * kPi * kPi * kPi * alpha * s2 * c1;
                    m = std::max(m, std::fabs(lf(i, j, k) - exact));
                }
        return m;
    };
    const double e16 = err(16);
    const double e32 = err(32);
    CHECK(e16 <= 3.0);
    CHECK(std::log2(e16 / e32) >= 1.8);
}

TEST_CASE("transformed grad-div matches the chain-rule oracle") {
    const double alpha = 0.05;
    auto err = [&](int n) {
        const Grid g(n, n, 8);
        const LagrangianMap map = shear_map(g, alpha);
        const auto dZ = z_derivatives(map.Z());
        VectorField u = {Field(g, BcKind::Neumann), Field(g, BcKind::Neumann),
                         Field(g, BcKind::Neumann)};
        for (auto& c : u) c.fill(0.0);
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    u[0](i, j, k) = std::sin(2 * kPi * g.x(i));
        const VectorField lu = transformed_divgrad(u, map.Z(), dZ);
        double m = 0.0;
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double s1 = std::sin(2 * kPi * g.x(i));
                    const double c2 = std::cos(2 * kPi * g.y(j));
                    const double e0 = -4 * kPi * kPi * s1;
                    const double e1 =
                        8 * kPi * kPi * kPi * alpha * c2 * s1;
                    m = std::max({m, std::fabs(lu[0](i, j, k) - e0),
                                  std::fabs(lu[1](i, j, k) - e1),
                                  std::fabs(lu[2](i, j, k))});
                }
        return m;
    };
    const double e16 = err(16);
    const double e32 = err(32);
    CHECK(e16 <= 3.0);
    CHECK(std::log2(e16 / e32) >= 1.8);
}

TEST_CASE("transformed sources vanish at the equilibrium under any map") {
    PhysParams p;
    const Grid g(8, 8, 8);
    const State eq = equilibrium_state(g, 1.0, 1.0);
    Field rho0(g, BcKind::None), Qm0(g, BcKind::None), dT(g, BcKind::None);
    rho0.fill(1.0);
    Qm0.fill(2.0);
    dT.fill(0.0);
    VectorField du = {Field(g, BcKind::None), Field(g, BcKind::None),
                      Field(g, BcKind::None)};
    for (auto& c : du) c.fill(0.0);

    for (const LagrangianMap& map : {identity_map(g), shear_map(g, 0.05)}) {
        const TransformedSources s =
            transformed_sources(eq, map, p, rho0, Qm0, du, dT);
        CHECK(linf(s.G_d) <= 1e-14);
        for (int c = 0; c < 3; ++c) CHECK(linf(s.G_u[c]) <= 1e-14);
        CHECK(linf(s.G_T) <= 1e-14);
        CHECK(linf(s.G_v) <= 1e-14);
        CHECK(linf(s.G_c) <= 1e-14);
        CHECK(linf(s.G_r) <= 1e-14);
    }
}

TEST_CASE("uniform-state sources reduce to the pointwise phase algebra") {
    PhysParams p;
    p.q_vs_mode = QvsMode::Constant;
    p.q_vs_value = 0.1;
    const Grid g(8, 8, 8);
    State s = make_state(g);
    s.rho_d.fill(1.3);
    s.T.fill(1.1);
    s.q_v.fill(0.2);
    s.q_c.fill(0.8);
    s.q_r.fill(0.1);
    Field rho0(g, BcKind::None), Qm0(g, BcKind::None), dT(g, BcKind::None);
    rho0.fill(1.3);
    Qm0.fill(2.1);
    dT.fill(0.0);
    VectorField du = {Field(g, BcKind::None), Field(g, BcKind::None),
                      Field(g, BcKind::None)};
    for (auto& c : du) c.fill(0.0);

    const TransformedSources out =
        transformed_sources(s, identity_map(g), p, rho0, Qm0, du, dT);
    // S_ev = 0 (supersaturated), S_cd = 0.1*0.8 + 0.1, S_ac = 0, S_cr = 0.08
    CHECK(out.G_v(2, 2, 2) == doctest::Approx(-0.18).epsilon(1e-12));
    CHECK(out.G_c(2, 2, 2) == doctest::Approx(0.18 - 0.08).epsilon(1e-12));
    CHECK(out.G_r(2, 2, 2) == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(out.G_T(2, 2, 2) ==
          doctest::Approx((1.0 + 1.1) * 0.18 / 2.1).epsilon(1e-12));
    CHECK(linf(out.G_d) == 0.0);
}

TEST_CASE("density source matches an independent transcription") {
    PhysParams p;
    const Grid g(12, 12, 12);
    State s = equilibrium_state(g, 1.0, 1.0);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x(i), y = g.y(j), z = g.z(k);
                const double sz = std::sin(kPi * z);
                s.rho_d(i, j, k) = 1.0 + 0.2 * std::cos(2 * kPi * x) *
                                             std::cos(kPi * z);
                s.u[0](i, j, k) = 0.3 * std::sin(2 * kPi * x) * sz;
                s.u[1](i, j, k) = 0.2 * std::cos(2 * kPi * y) * sz;
                s.u[2](i, j, k) = 0.1 * std::sin(2 * kPi * (x + y)) * sz;
            }
    const LagrangianMap map = shear_map(g, 0.04);
    Field rho0(g, BcKind::None), Qm0(g, BcKind::None), dT(g, BcKind::None);
    rho0.fill(1.0);
    Qm0.fill(2.0);
    dT.fill(0.0);
    VectorField dudt = {Field(g, BcKind::None), Field(g, BcKind::None),
                        Field(g, BcKind::None)};
    for (auto& c : dudt) c.fill(0.0);
    const TransformedSources out =
        transformed_sources(s, map, p, rho0, Qm0, dudt, dT);

    // G_d = -(rho - rho0) div u - rho grad u : [Z^T - Id], rebuilt here from
    // the raw first derivatives
    std::array<std::array<Field, 3>, 3> du;
    for (int a = 0; a < 3; ++a)
        for (int l = 0; l < 3; ++l) du[a][l] = deriv_raw(s.u[a], l);
    double worst = 0.0;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                double divu = 0.0, corr = 0.0;
                for (int a = 0; a < 3; ++a) {
                    divu += du[a][a](i, j, k);
                    for (int l = 0; l < 3; ++l)
                        corr += du[a][l](i, j, k) *
                                (map.Z()[3 * l + a](i, j, k) -
                                 (l == a ? 1.0 : 0.0));
                }
                const double want =
                    -(s.rho_d(i, j, k) - 1.0) * divu - s.rho_d(i, j, k) * corr;
                worst = std::max(worst, std::fabs(out.G_d(i, j, k) - want));
            }
    CHECK(worst <= 1e-12);
}

TEST_CASE("transformed wall data") {
    const Grid g(16, 16, 16);
    Field f(g, BcKind::Neumann);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                f(i, j, k) = std::sin(2 * kPi * g.x(i));

    // identity map: the correction vanishes identically
    const BoundaryData b0 = transformed_boundary(f, identity_map(g));
    for (double v : b0.lo) CHECK(v == 0.0);
    for (double v : b0.hi) CHECK(v == 0.0);

    // vertical shear D_1 = alpha y_3 (1 - y_3): Z_13 = -alpha (1 - 2 y_3)
    // exactly (quadratic displacement, second-order one-sided stencils)
    const double alpha = 0.1;
    VectorField u = make_velocity(g);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                u[0](i, j, k) = alpha * g.z(k) * (1.0 - g.z(k));
    const BoundaryData b = transformed_boundary(f, map_from_velocity(g, u));
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double d1 = std::cos(2 * kPi * g.x(i)) *
                              std::sin(2 * kPi * g.hx) / g.hx;
            CHECK(b.lo[static_cast<std::size_t>(j) * g.nx + i] ==
                  doctest::Approx(alpha * d1).epsilon(1e-10));
            CHECK(b.hi[static_cast<std::size_t>(j) * g.nx + i] ==
                  doctest::Approx(-alpha * d1).epsilon(1e-10));
        }
}

TEST_CASE("label-frame stepper holds the equilibrium") {
    PhysParams p;
    const Grid g(8, 8, 8);
    const State eq = equilibrium_state(g, 1.0, 1.0);
    LagrangianStepper ls(eq, p);
    for (int it = 0; it < 5; ++it) ls.step(0.05);
    CHECK(linf_diff(ls.state().rho_d, eq.rho_d) <= 1e-10);
    CHECK(linf(ls.state().u[0]) <= 1e-10);
    CHECK(linf_diff(ls.state().T, eq.T) <= 1e-10);
    CHECK(linf_diff(ls.state().q_c, eq.q_c) <= 1e-10);
    CHECK(ls.map().deviation() <= 1e-12);
}

TEST_CASE("stepper refuses the general-constants mode") {
    PhysParams p;
    p.simplified_mode = false;
    const State eq = equilibrium_state(Grid(8, 8, 8), 1.0, 1.0);
    CHECK_THROWS_AS(LagrangianStepper(eq, p), ValidationError);
}

TEST_CASE("small-data equivalence of the two formulations") {
    PhysParams p;
    const Grid g(8, 8, 8);
    State s = equilibrium_state(g, 1.0, 1.0);
    const double d = 1e-3;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x(i), y = g.y(j), z = g.z(k);
                const double sz = std::sin(kPi * z);
                s.T(i, j, k) += d * std::cos(2 * kPi * x) * std::cos(kPi * z);
                s.u[0](i, j, k) = d * std::sin(2 * kPi * x) * sz;
                s.u[2](i, j, k) = d * std::sin(2 * kPi * y) * sz;
                s.q_v(i, j, k) = d * (0.5 + 0.4 * std::cos(2 * kPi * y));
            }
    const double diff = equivalence_check(s, 0.02, 0.005, p);
    CHECK(diff <= 1e-3);
    CHECK(diff < d);  // the two branches track each other below the data size
}
