#include "moistns/solver.hpp"

#include <cmath>

#include "moistns/errors.hpp"
#include "moistns/parallel.hpp"

namespace moistns {

namespace {

// y = x - sigma*lap(x), interiors only; x must carry homogeneous BCs.
void apply_helmholtz(const Field& x, double sigma, Field& y) {
    const Field lx = laplacian(x);
    const Grid& g = x.grid();
    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                y(i, j, k) = x(i, j, k) - sigma * lx(i, j, k);
    });
}

void apply_lame_op(const VectorField& x, double sigma, double mu,
                   double lambda, VectorField& y) {
    const VectorField lx = lame(x, mu, lambda);
    const Grid& g = x[0].grid();
    for (int c = 0; c < 3; ++c)
        parallel_for(g.nz, [&](int k) {
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    y[c](i, j, k) = x[c](i, j, k) - sigma * lx[c](i, j, k);
        });
}

} // namespace

SolveStats helmholtz_solve(Field& x, const Field& b, double sigma, double tol,
                           int max_iter) {
    const Grid& g = x.grid();

    // inhomogeneous Neumann data: move its Laplacian contribution to the
    // right-hand side, run CG with homogeneous ghosts
    Field b_eff(g, BcKind::None);
    b_eff.copy_interior_from(b);
    const bool inhom = x.has_neumann_data();
    std::vector<double> g_lo, g_hi;
    if (inhom) {
        g_lo = x.neumann_lo();
        g_hi = x.neumann_hi();
        Field zf(g, BcKind::Neumann);
        zf.set_neumann_data(g_lo, g_hi);
        const Field lbc = laplacian(zf);
        axpy(sigma, lbc, b_eff);
        x.clear_neumann_data();
    }

    Field r(g, x.bc()), pdir(g, x.bc()), Ap(g, BcKind::None);
    apply_helmholtz(x, sigma, Ap);
    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                r(i, j, k) = b_eff(i, j, k) - Ap(i, j, k);
    });
    const double bnorm = std::sqrt(dot(b_eff, b_eff));
    const double target = tol * (bnorm > 0.0 ? bnorm : 1.0);

    double rr = dot(r, r);
    SolveStats st;
    st.rel_residual = std::sqrt(rr) / (bnorm > 0.0 ? bnorm : 1.0);
    pdir.copy_interior_from(r);
    int it = 0;
    while (std::sqrt(rr) > target && it < max_iter) {
        apply_helmholtz(pdir, sigma, Ap);
        const double pAp = dot(pdir, Ap);
        if (!(pAp > 0.0))
            throw SolverDiverged("helmholtz CG lost positive definiteness");
        const double alpha = rr / pAp;
        axpy(alpha, pdir, x);
        axpy(-alpha, Ap, r);
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        parallel_for(g.nz, [&](int k) {
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    pdir(i, j, k) = r(i, j, k) + beta * pdir(i, j, k);
        });
        rr = rr_new;
        ++it;
    }
    st.iters = it;
    st.rel_residual = std::sqrt(rr) / (bnorm > 0.0 ? bnorm : 1.0);
    if (std::sqrt(rr) > target)
        throw SolverDiverged("helmholtz CG did not reach tolerance");
    if (inhom) x.set_neumann_data(std::move(g_lo), std::move(g_hi));
    return st;
}

SolveStats lame_solve(VectorField& x, const VectorField& b, double sigma,
                      double mu, double lambda, double tol, int max_iter) {
    const Grid& g = x[0].grid();
    VectorField r = make_velocity(g), pdir = make_velocity(g);
    VectorField Ap = {Field(g, BcKind::None), Field(g, BcKind::None),
                      Field(g, BcKind::None)};

    auto vdot = [&](const VectorField& a, const VectorField& c) {
        return dot(a[0], c[0]) + dot(a[1], c[1]) + dot(a[2], c[2]);
    };

    apply_lame_op(x, sigma, mu, lambda, Ap);
    for (int c = 0; c < 3; ++c)
        parallel_for(g.nz, [&](int k) {
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    r[c](i, j, k) = b[c](i, j, k) - Ap[c](i, j, k);
        });
    const double bnorm = std::sqrt(vdot(b, b));
    const double target = tol * (bnorm > 0.0 ? bnorm : 1.0);

    double rr = vdot(r, r);
    for (int c = 0; c < 3; ++c) pdir[c].copy_interior_from(r[c]);
    SolveStats st;
    int it = 0;
    while (std::sqrt(rr) > target && it < max_iter) {
        apply_lame_op(pdir, sigma, mu, lambda, Ap);
        const double pAp = vdot(pdir, Ap);
        if (!(pAp > 0.0))
            throw SolverDiverged("lame CG lost positive definiteness");
        const double alpha = rr / pAp;
        for (int c = 0; c < 3; ++c) {
            axpy(alpha, pdir[c], x[c]);
            axpy(-alpha, Ap[c], r[c]);
        }
        const double rr_new = vdot(r, r);
        const double beta = rr_new / rr;
        for (int c = 0; c < 3; ++c)
            parallel_for(g.nz, [&](int k) {
                for (int j = 0; j < g.ny; ++j)
                    for (int i = 0; i < g.nx; ++i)
                        pdir[c](i, j, k) =
                            r[c](i, j, k) + beta * pdir[c](i, j, k);
            });
        rr = rr_new;
        ++it;
    }
    st.iters = it;
    st.rel_residual = std::sqrt(rr) / (bnorm > 0.0 ? bnorm : 1.0);
    if (std::sqrt(rr) > target)
        throw SolverDiverged("lame CG did not reach tolerance");
    return st;
}

} // namespace moistns
