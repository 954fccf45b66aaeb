#include "moistns/dynamics.hpp"

#include <cmath>

#include "moistns/microphysics.hpp"
#include "moistns/parallel.hpp"
#include "moistns/thermo.hpp"

namespace moistns {

State make_state(const Grid& g) {
    State s;
    s.grid = g;
    s.rho_d = Field(g, BcKind::None);
    s.u = make_velocity(g);
    s.T = Field(g, BcKind::Neumann);
    s.q_v = Field(g, BcKind::Neumann);
    s.q_c = Field(g, BcKind::Neumann);
    s.q_r = Field(g, BcKind::Neumann);
    return s;
}

State equilibrium_state(const Grid& g, double rho_bar, double T_bar) {
    State s = make_state(g);
    s.rho_d.fill(rho_bar);
    s.T.fill(T_bar);
    s.q_c.fill(1.0);
    return s;
}

void check_state(const State& s, double negativity_floor) {
    const Grid& g = s.grid;
    auto scan = [&](const Field& f, const char* name, bool positive,
                    bool floored) {
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double v = f(i, j, k);
                    if (!std::isfinite(v))
                        throw StateInvalid(std::string(name) + " not finite");
                    if (positive && !(v > 0.0))
                        throw StateInvalid(std::string(name) + " <= 0");
                    if (floored && v < negativity_floor)
                        throw StateInvalid(std::string(name) +
                                           " below negativity floor");
                }
    };
    scan(s.rho_d, "rho_d", true, false);
    for (int c = 0; c < 3; ++c) scan(s.u[c], "u", false, false);
    scan(s.T, "T", false, false);
    scan(s.q_v, "q_v", false, true);
    scan(s.q_c, "q_c", false, true);
    scan(s.q_r, "q_r", false, true);
}

namespace {

inline double minmod(double a, double b) {
    if (a > 0.0 && b > 0.0) return a < b ? a : b;
    if (a < 0.0 && b < 0.0) return a > b ? a : b;
    return 0.0;
}

} // namespace

Field continuity_tendency(const Field& rho, const VectorField& u) {
    const Grid& g = rho.grid();
    rho.fill_ghosts();
    for (int c = 0; c < 3; ++c) u[c].fill_ghosts();
    Field out(g, BcKind::None);

    // Face flux in direction d between cell (base - e_d) and cell (base):
    // upwind MUSCL with minmod slopes, two ghost layers available.
    auto face_flux = [&](int d, int i, int j, int k) {
        const int di = (d == 0), dj = (d == 1), dk = (d == 2);
        const double uf = 0.5 * (u[d](i - di, j - dj, k - dk) + u[d](i, j, k));
        double r;
        if (uf >= 0.0) {
            const double r0 = rho(i - di, j - dj, k - dk);
            r = r0 + 0.5 * minmod(r0 - rho(i - 2 * di, j - 2 * dj, k - 2 * dk),
                                  rho(i, j, k) - r0);
        } else {
            const double r0 = rho(i, j, k);
            r = r0 - 0.5 * minmod(r0 - rho(i - di, j - dj, k - dk),
                                  rho(i + di, j + dj, k + dk) - r0);
        }
        return uf * r;
    };

    const double cx = 1.0 / g.hx, cy = 1.0 / g.hy, cz = 1.0 / g.hz;
    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double fx = face_flux(0, i + 1, j, k) - face_flux(0, i, j, k);
                const double fy = face_flux(1, i, j + 1, k) - face_flux(1, i, j, k);
                const double fz = face_flux(2, i, j, k + 1) - face_flux(2, i, j, k);
                out(i, j, k) = -(cx * fx + cy * fy + cz * fz);
            }
    });
    return out;
}

Tendencies rhs(const State& s, const PhysParams& p, const RhsOptions& opts) {
    const Grid& g = s.grid;
    Tendencies out;

    // frozen scalar diffusion coefficients (means over the box)
    double mean_rQ = 0.0, mean_Qth = 0.0;
    {
        double s1 = 0.0, s2 = 0.0;
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double rd = s.rho_d(i, j, k);
                    if (!(rd > 0.0)) throw DomainError("rhs requires rho_d > 0");
                    const ThermoCoeffs tc = thermo_coeffs(
                        p, s.q_v(i, j, k), s.q_c(i, j, k), s.q_r(i, j, k));
                    if (!(tc.Q_m > 0.0)) throw DomainError("rhs requires Q_m > 0");
                    s1 += rd * tc.Q_m;
                    s2 += tc.Q_th;
                }
        mean_rQ = s1 / g.ncells();
        mean_Qth = s2 / g.ncells();
    }
    out.coef_u = opts.freeze_velocity ? 0.0 : 1.0 / mean_rQ;
    out.coef_T = p.kappa / mean_Qth;
    out.coef_q = 1.0;

    // density: conservative upwind flux form
    out.d_rho = continuity_tendency(s.rho_d, s.u);

    // pressure and its unconstrained gradient
    Field pres(g, BcKind::None);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                pres(i, j, k) = eos_pressure(p, s.rho_d(i, j, k), s.T(i, j, k),
                                             s.q_v(i, j, k));
    const VectorField gradp = {deriv_raw(pres, 0), deriv_raw(pres, 1),
                               deriv_raw(pres, 2)};

    const Field divu = divergence(s.u);
    const Field drho_dz = deriv_raw(s.rho_d, 2);

    // velocity gradients for advection and the sedimentation drag
    std::array<VectorField, 3> du;  // du[c][d] = d u_c / d x_d
    for (int c = 0; c < 3; ++c)
        du[c] = {d1(s.u[c], 0), d1(s.u[c], 1), d1(s.u[c], 2)};
    const VectorField gT = {d1(s.T, 0), d1(s.T, 1), d1(s.T, 2)};
    const VectorField gqv = {d1(s.q_v, 0), d1(s.q_v, 1), d1(s.q_v, 2)};
    const VectorField gqc = {d1(s.q_c, 0), d1(s.q_c, 1), d1(s.q_c, 2)};
    const VectorField gqr = {d1(s.q_r, 0), d1(s.q_r, 1), d1(s.q_r, 2)};

    // sedimentation flux q_r V_r and its vertical derivative
    Field qrvr(g, BcKind::None);
    for (int k = 0; k < g.nz; ++k) {
        const double vr = p.V_r(g.z(k));
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                qrvr(i, j, k) = s.q_r(i, j, k) * vr;
    }
    const Field dz_qrvr = deriv_raw(qrvr, 2);

    // coefficient-drift corrections: the implicit solve uses the frozen
    // scalar coefficient, the pointwise remainder is explicit
    const VectorField Lu = lame(s.u, p.mu, p.lambda);
    const Field lapT = laplacian(s.T);

    out.expl_u = {Field(g, BcKind::None), Field(g, BcKind::None),
                  Field(g, BcKind::None)};
    out.expl_T = Field(g, BcKind::None);
    out.expl_qv = Field(g, BcKind::None);
    out.expl_qc = Field(g, BcKind::None);
    out.expl_qr = Field(g, BcKind::None);

    const double c1_sed = p.simplified_mode ? 1.0 : p.c_1;
    const double Q2 = thermo_Q2(p);

    parallel_for(g.nz, [&](int k) {
        const double vr = p.V_r(g.z(k));
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double rd = s.rho_d(i, j, k);
                const double T = s.T(i, j, k);
                const double qv = s.q_v(i, j, k);
                const double qc = s.q_c(i, j, k);
                const double qr = s.q_r(i, j, k);
                const ThermoCoeffs tc = thermo_coeffs(p, qv, qc, qr);

                const double u0 = s.u[0](i, j, k), u1 = s.u[1](i, j, k),
                             u2 = s.u[2](i, j, k);

                // momentum
                if (!opts.freeze_velocity) {
                    const double inv_rQ = 1.0 / (rd * tc.Q_m);
                    for (int c = 0; c < 3; ++c) {
                        const double adv = u0 * du[c][0](i, j, k) +
                                           u1 * du[c][1](i, j, k) +
                                           u2 * du[c][2](i, j, k);
                        double v = -adv - inv_rQ * gradp[c](i, j, k) +
                                   (qr * vr / tc.Q_m) * du[c][2](i, j, k) +
                                   (inv_rQ - out.coef_u) * Lu[c](i, j, k);
                        if (c == 2) v -= p.g;
                        out.expl_u[c](i, j, k) = v;
                    }
                }

                // microphysics
                double S_ev = 0.0, S_cd = 0.0;
                MoistureSources ms{0.0, 0.0, 0.0};
                if (opts.micro) {
                    const double qvs =
                        saturation_ratio(p, pres(i, j, k), T);
                    const MicroRates mr = micro_rates(p, T, qv, qc, qr, qvs);
                    S_ev = mr.S_ev;
                    S_cd = mr.S_cd;
                    ms = moisture_source_vector(mr);
                }

                // temperature
                {
                    const double adv = u0 * gT[0](i, j, k) +
                                       u1 * gT[1](i, j, k) +
                                       u2 * gT[2](i, j, k);
                    const double Q1 = thermo_Q1(p, qv);
                    const double latent = (Q1 * T + Q2) * (S_ev - S_cd);
                    out.expl_T(i, j, k) =
                        -adv +
                        (c1_sed * qr * vr * gT[2](i, j, k) +
                         tc.Q_cp * T * divu(i, j, k) - latent) /
                            tc.Q_th +
                        (p.kappa / tc.Q_th - out.coef_T) * lapT(i, j, k);
                }

                // moisture
                {
                    const double adv_v = u0 * gqv[0](i, j, k) +
                                         u1 * gqv[1](i, j, k) +
                                         u2 * gqv[2](i, j, k);
                    const double adv_c = u0 * gqc[0](i, j, k) +
                                         u1 * gqc[1](i, j, k) +
                                         u2 * gqc[2](i, j, k);
                    const double adv_r = u0 * gqr[0](i, j, k) +
                                         u1 * gqr[1](i, j, k) +
                                         u2 * gqr[2](i, j, k);
                    out.expl_qv(i, j, k) = -adv_v + ms.src_v;
                    out.expl_qc(i, j, k) = -adv_c + ms.src_c;
                    // sedimentation: (1/rho) dz(rho q_r V_r) expanded as
                    // dz(q_r V_r) + q_r V_r dz(rho)/rho
                    out.expl_qr(i, j, k) =
                        -adv_r + ms.src_r + dz_qrvr(i, j, k) +
                        qr * vr * drho_dz(i, j, k) / rd;
                }
            }
    });

    if (opts.forcing) {
        const Forcing& f = *opts.forcing;
        axpy(1.0, f.f_rho, out.d_rho);
        for (int c = 0; c < 3; ++c)
            if (!opts.freeze_velocity) axpy(1.0, f.f_u[c], out.expl_u[c]);
        axpy(1.0, f.f_T, out.expl_T);
        axpy(1.0, f.f_qv, out.expl_qv);
        axpy(1.0, f.f_qc, out.expl_qc);
        axpy(1.0, f.f_qr, out.expl_qr);
    }
    return out;
}

FullTendency total_tendency(const State& s, const PhysParams& p,
                            const RhsOptions& opts) {
    const Grid& g = s.grid;
    Tendencies t = rhs(s, p, opts);
    FullTendency out;
    out.d_rho = std::move(t.d_rho);
    out.d_u = std::move(t.expl_u);
    if (!opts.freeze_velocity) {
        const VectorField Lu = lame(s.u, p.mu, p.lambda);
        for (int c = 0; c < 3; ++c) axpy(t.coef_u, Lu[c], out.d_u[c]);
    }
    out.d_T = std::move(t.expl_T);
    axpy(t.coef_T, laplacian(s.T), out.d_T);
    out.d_qv = std::move(t.expl_qv);
    axpy(t.coef_q, laplacian(s.q_v), out.d_qv);
    out.d_qc = std::move(t.expl_qc);
    axpy(t.coef_q, laplacian(s.q_c), out.d_qc);
    out.d_qr = std::move(t.expl_qr);
    axpy(t.coef_q, laplacian(s.q_r), out.d_qr);
    return out;
}

double tendency_linf(const FullTendency& t) {
    double m = linf(t.d_rho);
    for (int c = 0; c < 3; ++c) m = std::max(m, linf(t.d_u[c]));
    m = std::max(m, linf(t.d_T));
    m = std::max(m, linf(t.d_qv));
    m = std::max(m, linf(t.d_qc));
    m = std::max(m, linf(t.d_qr));
    return m;
}

} // namespace moistns
