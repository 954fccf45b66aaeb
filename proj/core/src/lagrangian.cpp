#include "moistns/lagrangian.hpp"

#include <cmath>

#include "moistns/microphysics.hpp"
#include "moistns/parallel.hpp"
#include "moistns/solver.hpp"
#include "moistns/thermo.hpp"
#include "moistns/timestepper.hpp"

namespace moistns {

namespace {

TensorField make_tensor(const Grid& g) {
    TensorField t;
    for (auto& f : t) f = Field(g, BcKind::None);
    return t;
}

// wall-value extrapolation from the two nearest cell centers
inline double to_wall(double v0, double v1) { return 1.5 * v0 - 0.5 * v1; }

} // namespace

LagrangianMap::LagrangianMap(const Grid& g)
    : g_(g), D_(make_velocity(g)), u_prev_(make_velocity(g)),
      gradX_(make_tensor(g)), Z_(make_tensor(g)) {
    recompute();
}

LagrangianMap identity_map(const Grid& g) { return LagrangianMap(g); }

void LagrangianMap::set_initial_velocity(const VectorField& u0) {
    for (int c = 0; c < 3; ++c) u_prev_[c].copy_interior_from(u0[c]);
}

double LagrangianMap::X(int c, int i, int j, int k) const {
    const double y = c == 0 ? g_.x(i) : c == 1 ? g_.y(j) : g_.z(k);
    return y + D_[c](i, j, k);
}

void LagrangianMap::recompute() {
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            Field d = deriv_raw(D_[a], b);
            if (a == b)
                parallel_for(g_.nz, [&](int k) {
                    for (int j = 0; j < g_.ny; ++j)
                        for (int i = 0; i < g_.nx; ++i)
                            d(i, j, k) += 1.0;
                });
            gradX_[3 * a + b] = std::move(d);
        }

    double dev = 0.0;
    for (int k = 0; k < g_.nz; ++k)
        for (int j = 0; j < g_.ny; ++j)
            for (int i = 0; i < g_.nx; ++i) {
                double m[9], z[9];
                for (int e = 0; e < 9; ++e) m[e] = gradX_[e](i, j, k);
                dev = std::max(
                    dev, std::max({std::abs(m[0] - 1.0), std::abs(m[1]),
                                   std::abs(m[2]), std::abs(m[3]),
                                   std::abs(m[4] - 1.0), std::abs(m[5]),
                                   std::abs(m[6]), std::abs(m[7]),
                                   std::abs(m[8] - 1.0)}));
                const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) -
                                   m[1] * (m[3] * m[8] - m[5] * m[6]) +
                                   m[2] * (m[3] * m[7] - m[4] * m[6]);
                if (det == 0.0)
                    throw MapDegenerate("grad X singular at a cell");
                const double id = 1.0 / det;
                z[0] = (m[4] * m[8] - m[5] * m[7]) * id;
                z[1] = (m[2] * m[7] - m[1] * m[8]) * id;
                z[2] = (m[1] * m[5] - m[2] * m[4]) * id;
                z[3] = (m[5] * m[6] - m[3] * m[8]) * id;
                z[4] = (m[0] * m[8] - m[2] * m[6]) * id;
                z[5] = (m[2] * m[3] - m[0] * m[5]) * id;
                z[6] = (m[3] * m[7] - m[4] * m[6]) * id;
                z[7] = (m[1] * m[6] - m[0] * m[7]) * id;
                z[8] = (m[0] * m[4] - m[1] * m[3]) * id;
                for (int e = 0; e < 9; ++e) Z_[e](i, j, k) = z[e];
            }
    deviation_ = dev;
}

void LagrangianMap::advance(const VectorField& u_tilde, double dt) {
    parallel_for(g_.nz, [&](int k) {
        for (int j = 0; j < g_.ny; ++j)
            for (int i = 0; i < g_.nx; ++i)
                for (int c = 0; c < 3; ++c)
                    D_[c](i, j, k) += 0.5 * dt * (u_prev_[c](i, j, k) +
                                                  u_tilde[c](i, j, k));
    });
    for (int c = 0; c < 3; ++c) u_prev_[c].copy_interior_from(u_tilde[c]);
    recompute();
    if (!valid())
        throw MapDegenerate("map deviation exceeded 1/2");
}

std::array<Field, 27> z_derivatives(const TensorField& Z) {
    std::array<Field, 27> out;
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
            for (int j = 0; j < 3; ++j)
                out[9 * k + 3 * l + j] = deriv_raw(Z[3 * l + j], k);
    return out;
}

std::array<Field, 27> z_derivatives_analytic(const LagrangianMap& map) {
    const Grid& g = map.grid();
    const TensorField& Z = map.Z();
    // dGX[k][3a+b] = d gradX_{a,b} / d y_k
    std::array<TensorField, 3> dGX;
    for (int k = 0; k < 3; ++k)
        for (int e = 0; e < 9; ++e)
            dGX[k][e] = deriv_raw(map.gradX()[e], k);

    std::array<Field, 27> out;
    for (auto& f : out) f = Field(g, BcKind::None);
    parallel_for(g.nz, [&](int kk) {
        for (int jj = 0; jj < g.ny; ++jj)
            for (int ii = 0; ii < g.nx; ++ii) {
                double z[9];
                for (int e = 0; e < 9; ++e) z[e] = Z[e](ii, jj, kk);
                for (int k = 0; k < 3; ++k) {
                    double dg[9], t[9];
                    for (int e = 0; e < 9; ++e) dg[e] = dGX[k][e](ii, jj, kk);
                    // t = Z * dg
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b)
                            t[3 * a + b] = z[3 * a + 0] * dg[0 + b] +
                                           z[3 * a + 1] * dg[3 + b] +
                                           z[3 * a + 2] * dg[6 + b];
                    // dZ = -t * Z
                    for (int l = 0; l < 3; ++l)
                        for (int j = 0; j < 3; ++j)
                            out[9 * k + 3 * l + j](ii, jj, kk) =
                                -(t[3 * l + 0] * z[0 + j] +
                                  t[3 * l + 1] * z[3 + j] +
                                  t[3 * l + 2] * z[6 + j]);
                }
            }
    });
    return out;
}

namespace {

// Hessian of f: 6 distinct fields, symmetric access. The cross stencils are
// built with normalized (low, high) direction order so they coincide
// bitwise with the fields graddiv() assembles.
struct Hessian {
    Field d[3];   // d[a] = d2(f, a)
    Field x[3];   // x[0]=f_xy, x[1]=f_xz, x[2]=f_yz
    const Field& at(int a, int b) const {
        if (a == b) return d[a];
        const int lo = std::min(a, b), hi = std::max(a, b);
        return x[lo + hi - 1];  // (0,1)->0, (0,2)->1, (1,2)->2
    }
};

Hessian hessian(const Field& f) {
    Hessian h;
    for (int a = 0; a < 3; ++a) h.d[a] = d2(f, a);
    h.x[0] = dcross(f, 0, 1);
    h.x[1] = dcross(f, 0, 2);
    h.x[2] = dcross(f, 1, 2);
    return h;
}

std::array<Field, 3> first_derivs(const Field& f) {
    return {deriv_raw(f, 0), deriv_raw(f, 1), deriv_raw(f, 2)};
}

} // namespace

Field transformed_laplacian(const Field& f, const TensorField& Z,
                            const std::array<Field, 27>& dZ) {
    const Grid& g = f.grid();
    const Hessian H = hessian(f);
    const auto fd = first_derivs(f);
    Field out(g, BcKind::None);
    parallel_for(g.nz, [&](int kk) {
        for (int jj = 0; jj < g.ny; ++jj)
            for (int ii = 0; ii < g.nx; ++ii) {
                double acc = 0.0;
                for (int j = 0; j < 3; ++j)
                    for (int k = 0; k < 3; ++k)
                        for (int l = 0; l < 3; ++l)
                            acc += H.at(k, l)(ii, jj, kk) *
                                   Z[3 * k + j](ii, jj, kk) *
                                   Z[3 * l + j](ii, jj, kk);
                for (int j = 0; j < 3; ++j)
                    for (int k = 0; k < 3; ++k)
                        for (int l = 0; l < 3; ++l)
                            acc += fd[l](ii, jj, kk) *
                                   dZ[9 * k + 3 * l + j](ii, jj, kk) *
                                   Z[3 * k + j](ii, jj, kk);
                out(ii, jj, kk) = acc;
            }
    });
    return out;
}

VectorField transformed_divgrad(const VectorField& u, const TensorField& Z,
                                const std::array<Field, 27>& dZ) {
    const Grid& g = u[0].grid();
    std::array<Hessian, 3> H = {hessian(u[0]), hessian(u[1]), hessian(u[2])};
    std::array<std::array<Field, 3>, 3> du = {
        first_derivs(u[0]), first_derivs(u[1]), first_derivs(u[2])};
    VectorField out = {Field(g, BcKind::None), Field(g, BcKind::None),
                       Field(g, BcKind::None)};
    for (int i = 0; i < 3; ++i)
        parallel_for(g.nz, [&](int kk) {
            for (int jj = 0; jj < g.ny; ++jj)
                for (int ii = 0; ii < g.nx; ++ii) {
                    double acc = 0.0;
                    for (int j = 0; j < 3; ++j)
                        for (int k = 0; k < 3; ++k)
                            for (int l = 0; l < 3; ++l)
                                acc += H[j].at(k, l)(ii, jj, kk) *
                                       Z[3 * k + j](ii, jj, kk) *
                                       Z[3 * l + i](ii, jj, kk);
                    for (int j = 0; j < 3; ++j)
                        for (int k = 0; k < 3; ++k)
                            for (int l = 0; l < 3; ++l)
                                acc += du[j][k](ii, jj, kk) *
                                       dZ[9 * l + 3 * k + j](ii, jj, kk) *
                                       Z[3 * l + i](ii, jj, kk);
                    out[i](ii, jj, kk) = acc;
                }
        });
    return out;
}

namespace {

// V_r evaluated at the mapped height X_3(y)
Field vr_tilde(const LagrangianMap& map, const PhysParams& p) {
    const Grid& g = map.grid();
    Field out(g, BcKind::None);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                out(i, j, k) = p.V_r(map.X(2, i, j, k));
    return out;
}

} // namespace

TransformedSources transformed_sources(const State& tilde,
                                       const LagrangianMap& map,
                                       const PhysParams& p,
                                       const Field& rho_d0, const Field& Q_m0,
                                       const VectorField& du_dt,
                                       const Field& dT_dt) {
    if (!p.simplified_mode)
        throw ValidationError("transformed sources require simplified mode");
    const Grid& g = tilde.grid;
    const TensorField& Z = map.Z();
    const auto dZ = z_derivatives(Z);

    // first derivatives in labels
    std::array<std::array<Field, 3>, 3> du = {first_derivs(tilde.u[0]),
                                              first_derivs(tilde.u[1]),
                                              first_derivs(tilde.u[2])};
    const auto drho = first_derivs(tilde.rho_d);
    const auto dT = first_derivs(tilde.T);
    const auto dqv = first_derivs(tilde.q_v);
    const auto dqr = first_derivs(tilde.q_r);

    // transformed-minus-plain operator differences
    const Field l1mT = [&] {
        Field d = transformed_laplacian(tilde.T, Z, dZ);
        axpy(-1.0, laplacian(tilde.T), d);
        return d;
    }();
    auto l1m = [&](const Field& f) {
        Field d = transformed_laplacian(f, Z, dZ);
        axpy(-1.0, laplacian(f), d);
        return d;
    };
    const Field l1mqv = l1m(tilde.q_v);
    const Field l1mqc = l1m(tilde.q_c);
    const Field l1mqr = l1m(tilde.q_r);
    VectorField l1mu = {l1m(tilde.u[0]), l1m(tilde.u[1]), l1m(tilde.u[2])};
    VectorField l2mu = transformed_divgrad(tilde.u, Z, dZ);
    {
        const VectorField gd = graddiv(tilde.u);
        for (int c = 0; c < 3; ++c) axpy(-1.0, gd[c], l2mu[c]);
    }

    const Field vr = vr_tilde(map, p);
    const auto dvr = first_derivs(vr);

    TransformedSources out;
    out.G_d = Field(g, BcKind::None);
    out.G_u = {Field(g, BcKind::None), Field(g, BcKind::None),
               Field(g, BcKind::None)};
    out.G_T = Field(g, BcKind::None);
    out.G_v = Field(g, BcKind::None);
    out.G_c = Field(g, BcKind::None);
    out.G_r = Field(g, BcKind::None);

    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                double z[9];
                for (int e = 0; e < 9; ++e) z[e] = Z[e](i, j, k);
                const double rho = tilde.rho_d(i, j, k);
                const double T = tilde.T(i, j, k);
                const double qv = tilde.q_v(i, j, k);
                const double qc = tilde.q_c(i, j, k);
                const double qr = tilde.q_r(i, j, k);
                const double Qm = 1.0 + qv + qc + qr;
                if (!(Qm > 0.0)) throw DomainError("Q_m <= 0 in sources");
                const double rho0 = rho_d0(i, j, k);
                const double Qm0 = Q_m0(i, j, k);
                const double vrv = vr(i, j, k);

                double divu = 0.0;       // plain label divergence
                double divZ_m_div = 0.0; // grad u : [Z^T - Id]
                for (int a = 0; a < 3; ++a) {
                    divu += du[a][a](i, j, k);
                    for (int l = 0; l < 3; ++l)
                        divZ_m_div += du[a][l](i, j, k) *
                                      (z[3 * l + a] - (l == a ? 1.0 : 0.0));
                }

                out.G_d(i, j, k) =
                    -(rho - rho0) * divu - rho * divZ_m_div;

                const double pvs = saturation_ratio(
                    p, eos_pressure(p, rho, T < 0.0 ? 0.0 : T, qv), T);
                const double Sev = T * ((1.0 + qv) / Qm) *
                                   positive_part(pvs - qv) * qr;
                const double Scd = (qv - pvs) * qc + positive_part(qv - pvs);
                const double Sac = positive_part(qc - 1.0);
                const double Scr = qc * qr;

                // G_u
                for (int c = 0; c < 3; ++c) {
                    double ztg_rho = 0.0, ztg_qv = 0.0, ztg_T = 0.0,
                           du_z3 = 0.0;
                    for (int l = 0; l < 3; ++l) {
                        ztg_rho += z[3 * l + c] * drho[l](i, j, k);
                        ztg_qv += z[3 * l + c] * dqv[l](i, j, k);
                        ztg_T += z[3 * l + c] * dT[l](i, j, k);
                        du_z3 += du[c][l](i, j, k) * z[3 * l + 2];
                    }
                    double v =
                        (1.0 - rho * Qm / (rho0 * Qm0)) * du_dt[c](i, j, k) +
                        p.mu / (rho0 * Qm0) * l1mu[c](i, j, k) +
                        (p.mu + p.lambda) / (rho0 * Qm0) * l2mu[c](i, j, k) -
                        (T * (1.0 + qv) * ztg_rho + rho * T * ztg_qv +
                         rho * (1.0 + qv) * ztg_T - rho * qr * vrv * du_z3 +
                         (c == 2 ? rho * Qm * p.g : 0.0)) /
                            (rho0 * Qm0);
                    out.G_u[c](i, j, k) = v;
                }

                // G_T
                {
                    double dT_z3 = 0.0;
                    for (int l = 0; l < 3; ++l)
                        dT_z3 += dT[l](i, j, k) * z[3 * l + 2];
                    const double bracket =
                        (qv - pvs) * qc + positive_part(qv - pvs) -
                        T * qr * ((1.0 + qv) / Qm) * positive_part(pvs - qv);
                    out.G_T(i, j, k) =
                        (1.0 - Qm / Qm0) * dT_dt(i, j, k) +
                        (l1mT(i, j, k) + qr * vrv * dT_z3 -
                         (1.0 + qv) * T * (divu + divZ_m_div) +
                         (1.0 + T) * bracket) /
                            Qm0;
                }

                out.G_v(i, j, k) = l1mqv(i, j, k) + Sev - Scd;
                out.G_c(i, j, k) = l1mqc(i, j, k) + Scd - Sac - Scr;
                {
                    double dqr_z3 = 0.0, dvr_z3 = 0.0, drho_z3 = 0.0;
                    for (int l = 0; l < 3; ++l) {
                        dqr_z3 += dqr[l](i, j, k) * z[3 * l + 2];
                        dvr_z3 += dvr[l](i, j, k) * z[3 * l + 2];
                        drho_z3 += drho[l](i, j, k) * z[3 * l + 2];
                    }
                    out.G_r(i, j, k) = l1mqr(i, j, k) + Sac + Scr - Sev +
                                       vrv * dqr_z3 + qr * dvr_z3 +
                                       qr * vrv * drho_z3 / rho;
                }
            }
    });
    return out;
}

BoundaryData transformed_boundary(const Field& f, const LagrangianMap& map) {
    const Grid& g = f.grid();
    const TensorField& Z = map.Z();
    const Field f1 = deriv_raw(f, 0);
    const Field f2 = deriv_raw(f, 1);
    const Field f3 = deriv_raw(f, 2);
    BoundaryData out;
    out.lo.resize(static_cast<std::size_t>(g.nx) * g.ny);
    out.hi.resize(out.lo.size());
    auto eval = [&](int i, int j, int k0, int k1) {
        const double z13 = to_wall(Z[3 * 0 + 2](i, j, k0), Z[3 * 0 + 2](i, j, k1));
        const double z23 = to_wall(Z[3 * 1 + 2](i, j, k0), Z[3 * 1 + 2](i, j, k1));
        const double z33 = to_wall(Z[3 * 2 + 2](i, j, k0), Z[3 * 2 + 2](i, j, k1));
        const double d1v = to_wall(f1(i, j, k0), f1(i, j, k1));
        const double d2v = to_wall(f2(i, j, k0), f2(i, j, k1));
        const double d3v = to_wall(f3(i, j, k0), f3(i, j, k1));
        return (1.0 - z33) * d3v - z13 * d1v - z23 * d2v;
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            out.lo[static_cast<std::size_t>(j) * g.nx + i] = eval(i, j, 0, 1);
            out.hi[static_cast<std::size_t>(j) * g.nx + i] =
                eval(i, j, g.nz - 1, g.nz - 2);
        }
    return out;
}

namespace {

// Solved form of the transformed Neumann condition: with d_{y3} f = g at the
// wall, g = (1 - Z33) g - Z13 d1 f - Z23 d2 f rearranges to
// g = -(Z13 d1 f + Z23 d2 f)/Z33.
BoundaryData solved_wall_data(const Field& f, const LagrangianMap& map) {
    const Grid& g = f.grid();
    const TensorField& Z = map.Z();
    const Field f1 = deriv_raw(f, 0);
    const Field f2 = deriv_raw(f, 1);
    BoundaryData out;
    out.lo.resize(static_cast<std::size_t>(g.nx) * g.ny);
    out.hi.resize(out.lo.size());
    auto eval = [&](int i, int j, int k0, int k1) {
        const double z13 = to_wall(Z[3 * 0 + 2](i, j, k0), Z[3 * 0 + 2](i, j, k1));
        const double z23 = to_wall(Z[3 * 1 + 2](i, j, k0), Z[3 * 1 + 2](i, j, k1));
        const double z33 = to_wall(Z[3 * 2 + 2](i, j, k0), Z[3 * 2 + 2](i, j, k1));
        if (z33 == 0.0) throw MapDegenerate("Z_33 vanished at a wall");
        const double d1v = to_wall(f1(i, j, k0), f1(i, j, k1));
        const double d2v = to_wall(f2(i, j, k0), f2(i, j, k1));
        return -(z13 * d1v + z23 * d2v) / z33;
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            out.lo[static_cast<std::size_t>(j) * g.nx + i] = eval(i, j, 0, 1);
            out.hi[static_cast<std::size_t>(j) * g.nx + i] =
                eval(i, j, g.nz - 1, g.nz - 2);
        }
    return out;
}

} // namespace

LagrangianStepper::LagrangianStepper(const State& s0, const PhysParams& p)
    : p_(p), s_(s0), map_(s0.grid) {
    if (!p.simplified_mode)
        throw ValidationError("lagrangian stepper requires simplified mode");
    map_.set_initial_velocity(s0.u);
    const Grid& g = s0.grid;
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double Qm = 1.0 + s0.q_v(i, j, k) + s0.q_c(i, j, k) +
                                  s0.q_r(i, j, k);
                s1 += s0.rho_d(i, j, k) * Qm;
                s2 += Qm;
            }
    coef_u_ = 1.0 / (s1 / g.ncells());
    coef_T_ = 1.0 / (s2 / g.ncells());
}

void LagrangianStepper::step(double dt) {
    const Grid& g = s_.grid;

    // attach the transformed Neumann wall data for this step
    auto attach = [&](Field& f) {
        BoundaryData b = solved_wall_data(f, map_);
        f.set_neumann_data(std::move(b.lo), std::move(b.hi));
    };
    attach(s_.T);
    attach(s_.q_v);
    attach(s_.q_c);
    attach(s_.q_r);

    const TensorField& Z = map_.Z();
    const auto dZ = z_derivatives(Z);
    const Field vr = vr_tilde(map_, p_);
    const auto dvr = first_derivs(vr);

    std::array<std::array<Field, 3>, 3> du = {first_derivs(s_.u[0]),
                                              first_derivs(s_.u[1]),
                                              first_derivs(s_.u[2])};
    const auto drho = first_derivs(s_.rho_d);
    const auto dT = first_derivs(s_.T);
    const auto dqv = first_derivs(s_.q_v);
    const auto dqr = first_derivs(s_.q_r);

    const VectorField tl1u = {transformed_laplacian(s_.u[0], Z, dZ),
                              transformed_laplacian(s_.u[1], Z, dZ),
                              transformed_laplacian(s_.u[2], Z, dZ)};
    const VectorField tl2u = transformed_divgrad(s_.u, Z, dZ);
    const Field tlT = transformed_laplacian(s_.T, Z, dZ);
    const Field tlqv = transformed_laplacian(s_.q_v, Z, dZ);
    const Field tlqc = transformed_laplacian(s_.q_c, Z, dZ);
    const Field tlqr = transformed_laplacian(s_.q_r, Z, dZ);

    // frozen-coefficient implicit operators, evaluated on the current state
    // with the same ghosts, for the explicit drift terms
    const VectorField Lu = lame(s_.u, p_.mu, p_.lambda);
    const Field lapT = laplacian(s_.T);
    const Field lapqv = laplacian(s_.q_v);
    const Field lapqc = laplacian(s_.q_c);
    const Field lapqr = laplacian(s_.q_r);

    Field d_rho(g, BcKind::None);
    VectorField expl_u = {Field(g, BcKind::None), Field(g, BcKind::None),
                          Field(g, BcKind::None)};
    Field expl_T(g, BcKind::None), expl_qv(g, BcKind::None),
        expl_qc(g, BcKind::None), expl_qr(g, BcKind::None);

    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                double z[9];
                for (int e = 0; e < 9; ++e) z[e] = Z[e](i, j, k);
                const double rho = s_.rho_d(i, j, k);
                if (!(rho > 0.0))
                    throw StateInvalid("rho_d <= 0 in lagrangian step");
                const double T = s_.T(i, j, k);
                const double qv = s_.q_v(i, j, k);
                const double qc = s_.q_c(i, j, k);
                const double qr = s_.q_r(i, j, k);
                const double Qm = 1.0 + qv + qc + qr;
                const double vrv = vr(i, j, k);

                double divZ = 0.0;  // grad u : Z^T (transformed divergence)
                for (int a = 0; a < 3; ++a)
                    for (int l = 0; l < 3; ++l)
                        divZ += du[a][l](i, j, k) * z[3 * l + a];

                d_rho(i, j, k) = -rho * divZ;

                const double pres = eos_pressure(p_, rho, T < 0.0 ? 0.0 : T, qv);
                const double qvs = saturation_ratio(p_, pres, T);
                const MicroRates mr = micro_rates(p_, T, qv, qc, qr, qvs);
                const MoistureSources ms = moisture_source_vector(mr);

                for (int c = 0; c < 3; ++c) {
                    double ztg_rho = 0.0, ztg_qv = 0.0, ztg_T = 0.0,
                           du_z3 = 0.0;
                    for (int l = 0; l < 3; ++l) {
                        ztg_rho += z[3 * l + c] * drho[l](i, j, k);
                        ztg_qv += z[3 * l + c] * dqv[l](i, j, k);
                        ztg_T += z[3 * l + c] * dT[l](i, j, k);
                        du_z3 += du[c][l](i, j, k) * z[3 * l + 2];
                    }
                    const double grad_p =
                        T * (1.0 + qv) * ztg_rho + rho * T * ztg_qv +
                        rho * (1.0 + qv) * ztg_T;
                    expl_u[c](i, j, k) =
                        (p_.mu * tl1u[c](i, j, k) +
                         (p_.mu + p_.lambda) * tl2u[c](i, j, k) - grad_p +
                         rho * qr * vrv * du_z3) /
                            (rho * Qm) -
                        (c == 2 ? p_.g : 0.0) - coef_u_ * Lu[c](i, j, k);
                }

                {
                    double dT_z3 = 0.0;
                    for (int l = 0; l < 3; ++l)
                        dT_z3 += dT[l](i, j, k) * z[3 * l + 2];
                    expl_T(i, j, k) =
                        (tlT(i, j, k) + qr * vrv * dT_z3 -
                         (1.0 + qv) * T * divZ -
                         (1.0 + T) * (mr.S_ev - mr.S_cd)) /
                            Qm -
                        coef_T_ * lapT(i, j, k);
                }

                expl_qv(i, j, k) = tlqv(i, j, k) + ms.src_v - lapqv(i, j, k);
                expl_qc(i, j, k) = tlqc(i, j, k) + ms.src_c - lapqc(i, j, k);
                {
                    double dqr_z3 = 0.0, dvr_z3 = 0.0, drho_z3 = 0.0;
                    for (int l = 0; l < 3; ++l) {
                        dqr_z3 += dqr[l](i, j, k) * z[3 * l + 2];
                        dvr_z3 += dvr[l](i, j, k) * z[3 * l + 2];
                        drho_z3 += drho[l](i, j, k) * z[3 * l + 2];
                    }
                    expl_qr(i, j, k) = tlqr(i, j, k) + ms.src_r +
                                       vrv * dqr_z3 + qr * dvr_z3 +
                                       qr * vrv * drho_z3 / rho -
                                       lapqr(i, j, k);
                }
            }
    });

    // updates: rho explicit, the rest backward Euler on the frozen operators
    State next = s_;
    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                next.rho_d(i, j, k) = s_.rho_d(i, j, k) + dt * d_rho(i, j, k);
    });
    {
        VectorField b = {Field(g, BcKind::None), Field(g, BcKind::None),
                         Field(g, BcKind::None)};
        for (int c = 0; c < 3; ++c) {
            b[c].copy_interior_from(s_.u[c]);
            axpy(dt, expl_u[c], b[c]);
        }
        lame_solve(next.u, b, dt * coef_u_, p_.mu, p_.lambda);
    }
    auto scalar = [&](Field& x, const Field& xb, const Field& expl, double a) {
        Field b(g, BcKind::None);
        b.copy_interior_from(xb);
        axpy(dt, expl, b);
        helmholtz_solve(x, b, dt * a);
    };
    scalar(next.T, s_.T, expl_T, coef_T_);
    scalar(next.q_v, s_.q_v, expl_qv, 1.0);
    scalar(next.q_c, s_.q_c, expl_qc, 1.0);
    scalar(next.q_r, s_.q_r, expl_qr, 1.0);
    next.t = s_.t + dt;
    s_ = std::move(next);

    map_.advance(s_.u, dt);
}

namespace {

// trilinear sample of a field at a physical point; x,y wrap periodically,
// z uses one ghost layer beyond the first/last cell centers
double sample(const Field& f, double x, double y, double z) {
    const Grid& g = f.grid();
    x -= std::floor(x);
    y -= std::floor(y);
    double fx = x / g.hx - 0.5, fy = y / g.hy - 0.5, fz = z / g.hz - 0.5;
    int i0 = static_cast<int>(std::floor(fx));
    int j0 = static_cast<int>(std::floor(fy));
    int k0 = static_cast<int>(std::floor(fz));
    const double ax = fx - i0, ay = fy - j0, az = fz - k0;
    k0 = std::max(-1, std::min(g.nz - 1, k0));
    // x, y indices may be -1 or n-1+1: covered by the ghost wrap
    i0 = std::max(-1, std::min(g.nx - 1, i0));
    j0 = std::max(-1, std::min(g.ny - 1, j0));
    double v = 0.0;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
                const double w = (di ? ax : 1.0 - ax) * (dj ? ay : 1.0 - ay) *
                                 (dk ? az : 1.0 - az);
                v += w * f(i0 + di, j0 + dj, k0 + dk);
            }
    return v;
}

} // namespace

double equivalence_check(const State& s0, double t_end, double dt,
                         const PhysParams& p) {
    // Eulerian branch
    State se = s0;
    RunConfig rc;
    rc.negativity_floor = -1e-6;
    while (se.t < t_end - 1e-14) {
        const double d = std::min(dt, t_end - se.t);
        step(se, d, p, rc, Scheme::ImexEuler);
    }

    // Lagrangian branch
    LagrangianStepper ls(s0, p);
    {
        double t = 0.0;
        while (t < t_end - 1e-14) {
            const double d = std::min(dt, t_end - t);
            ls.step(d);
            t += d;
        }
    }
    const State& sl = ls.state();
    const LagrangianMap& map = ls.map();
    const Grid& g = s0.grid;

    for (int c = 0; c < 3; ++c) map.displacement()[c].fill_ghosts();
    for (int e = 0; e < 9; ++e) map.Z()[e].fill_ghosts();
    sl.rho_d.fill_ghosts();
    for (int c = 0; c < 3; ++c) sl.u[c].fill_ghosts();
    sl.T.fill_ghosts();
    sl.q_v.fill_ghosts();
    sl.q_c.fill_ghosts();
    sl.q_r.fill_ghosts();

    auto Xat = [&](double y1, double y2, double y3, int c) {
        const double base = c == 0 ? y1 : c == 1 ? y2 : y3;
        return base + sample(map.displacement()[c], y1, y2, y3);
    };

    double maxdiff = 0.0;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x1 = g.x(i), x2 = g.y(j), x3 = g.z(k);
                // Newton inversion of X(y) = x
                double y1 = x1, y2 = x2, y3 = x3;
                for (int it = 0; it < 8; ++it) {
                    double r1 = Xat(y1, y2, y3, 0) - x1;
                    double r2 = Xat(y1, y2, y3, 1) - x2;
                    double r3 = Xat(y1, y2, y3, 2) - x3;
                    r1 -= std::round(r1);  // minimal periodic image
                    r2 -= std::round(r2);
                    if (std::abs(r1) + std::abs(r2) + std::abs(r3) < 1e-13)
                        break;
                    double z[9];
                    for (int e = 0; e < 9; ++e)
                        z[e] = sample(map.Z()[e], y1, y2, y3);
                    y1 -= z[0] * r1 + z[1] * r2 + z[2] * r3;
                    y2 -= z[3] * r1 + z[4] * r2 + z[5] * r3;
                    y3 -= z[6] * r1 + z[7] * r2 + z[8] * r3;
                    y3 = std::min(1.0, std::max(0.0, y3));
                }
                auto cmp = [&](const Field& eul, const Field& lag) {
                    const double d =
                        std::abs(eul(i, j, k) - sample(lag, y1, y2, y3));
                    maxdiff = std::max(maxdiff, d);
                };
                cmp(se.rho_d, sl.rho_d);
                for (int c = 0; c < 3; ++c) cmp(se.u[c], sl.u[c]);
                cmp(se.T, sl.T);
                cmp(se.q_v, sl.q_v);
                cmp(se.q_c, sl.q_c);
                cmp(se.q_r, sl.q_r);
            }
    return maxdiff;
}

} // namespace moistns
