#include "moistns/grid.hpp"

#include <cmath>

#include "moistns/parallel.hpp"

namespace moistns {

Field::Field(const Grid& g, BcKind bc_z) : g_(g), bc_(bc_z) {
    data_.assign(static_cast<std::size_t>(g.nx + 4) * (g.ny + 4) * (g.nz + 4),
                 0.0);
}

void Field::set_neumann_data(std::vector<double> g_lo, std::vector<double> g_hi) {
    const std::size_t n = static_cast<std::size_t>(g_.nx) * g_.ny;
    if (g_lo.size() != n || g_hi.size() != n)
        throw ValidationError("neumann data must have nx*ny entries per wall");
    if (bc_ != BcKind::Neumann)
        throw ValidationError("neumann data on a non-neumann field");
    g_lo_ = std::move(g_lo);
    g_hi_ = std::move(g_hi);
}

void Field::clear_neumann_data() {
    g_lo_.clear();
    g_hi_.clear();
}

void Field::fill_ghosts() const {
    const int nx = g_.nx, ny = g_.ny, nz = g_.nz;
    const double h = g_.hz;
    Field& f = const_cast<Field&>(*this);

    // z walls
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double lo1, lo2, hi1, hi2;
            const double f0 = f(i, j, 0), f1 = f(i, j, 1);
            const double fm = f(i, j, nz - 1), fm1 = f(i, j, nz - 2);
            switch (bc_) {
            case BcKind::Dirichlet0:
                lo1 = -f0; lo2 = -f1;
                hi1 = -fm; hi2 = -fm1;
                break;
            case BcKind::Neumann: {
                double glo = 0.0, ghi = 0.0;
                if (!g_lo_.empty()) {
                    glo = g_lo_[static_cast<std::size_t>(j) * nx + i];
                    ghi = g_hi_[static_cast<std::size_t>(j) * nx + i];
                }
                lo1 = f0 - h * glo; lo2 = f1 - 3.0 * h * glo;
                hi1 = fm + h * ghi; hi2 = fm1 + 3.0 * h * ghi;
                break;
            }
            case BcKind::None:
            default:
                lo1 = f0; lo2 = f1;
                hi1 = fm; hi2 = fm1;
                break;
            }
            f(i, j, -1) = lo1;
            f(i, j, -2) = lo2;
            f(i, j, nz) = hi1;
            f(i, j, nz + 1) = hi2;
        }
    }
    // periodic x wrap (covers z ghosts too)
    for (int k = -2; k < nz + 2; ++k) {
        for (int j = 0; j < ny; ++j) {
            f(-1, j, k) = f(nx - 1, j, k);
            f(-2, j, k) = f(nx - 2, j, k);
            f(nx, j, k) = f(0, j, k);
            f(nx + 1, j, k) = f(1, j, k);
        }
    }
    // periodic y wrap (covers x and z ghosts too)
    for (int k = -2; k < nz + 2; ++k) {
        for (int i = -2; i < nx + 2; ++i) {
            f(i, -1, k) = f(i, ny - 1, k);
            f(i, -2, k) = f(i, ny - 2, k);
            f(i, ny, k) = f(i, 0, k);
            f(i, ny + 1, k) = f(i, 1, k);
        }
    }
}

void Field::fill(double v) {
    for (auto& x : data_) x = v;
}

void Field::copy_interior_from(const Field& other) {
    const Grid& g = g_;
    if (other.g_.nx != g.nx || other.g_.ny != g.ny || other.g_.nz != g.nz)
        throw ValidationError("field dims mismatch in copy");
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                (*this)(i, j, k) = other(i, j, k);
}

VectorField make_velocity(const Grid& g) {
    return {Field(g, BcKind::Dirichlet0), Field(g, BcKind::Dirichlet0),
            Field(g, BcKind::Dirichlet0)};
}

namespace {

inline void dir_offsets(int dir, int& di, int& dj, int& dk) {
    di = (dir == 0); dj = (dir == 1); dk = (dir == 2);
}

inline double spacing(const Grid& g, int dir) {
    return dir == 0 ? g.hx : dir == 1 ? g.hy : g.hz;
}

} // namespace

Field d1(const Field& f, int dir) {
    const Grid& g = f.grid();
    f.fill_ghosts();
    Field out(g, BcKind::None);
    int di, dj, dk;
    dir_offsets(dir, di, dj, dk);
    const double c = 1.0 / (2.0 * spacing(g, dir));
    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                out(i, j, k) =
                    c * (f(i + di, j + dj, k + dk) - f(i - di, j - dj, k - dk));
    });
    return out;
}

Field d2(const Field& f, int dir) {
    const Grid& g = f.grid();
    f.fill_ghosts();
    Field out(g, BcKind::None);
    int di, dj, dk;
    dir_offsets(dir, di, dj, dk);
    const double h = spacing(g, dir);
    const double c = 1.0 / (h * h);
    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                out(i, j, k) = c * (f(i + di, j + dj, k + dk) -
                                    2.0 * f(i, j, k) +
                                    f(i - di, j - dj, k - dk));
    });
    return out;
}

Field dcross(const Field& f, int dir_a, int dir_b) {
    const Grid& g = f.grid();
    f.fill_ghosts();
    Field out(g, BcKind::None);
    int ai, aj, ak, bi, bj, bk;
    dir_offsets(dir_a, ai, aj, ak);
    dir_offsets(dir_b, bi, bj, bk);
    const double c = 1.0 / (4.0 * spacing(g, dir_a) * spacing(g, dir_b));
    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                out(i, j, k) =
                    c * (f(i + ai + bi, j + aj + bj, k + ak + bk) -
                         f(i + ai - bi, j + aj - bj, k + ak - bk) -
                         f(i - ai + bi, j - aj + bj, k - ak + bk) +
                         f(i - ai - bi, j - aj - bj, k - ak - bk));
    });
    return out;
}

Field deriv_raw(const Field& f, int dir) {
    const Grid& g = f.grid();
    if (dir != 2) return d1(f, dir);
    f.fill_ghosts();  // x/y ghosts unused here but keeps out-field callers safe
    Field out(g, BcKind::None);
    const double c = 1.0 / (2.0 * g.hz);
    const int nz = g.nz;
    parallel_for(nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (k == 0)
                    out(i, j, k) = c * (-3.0 * f(i, j, 0) + 4.0 * f(i, j, 1) -
                                        f(i, j, 2));
                else if (k == nz - 1)
                    out(i, j, k) = c * (3.0 * f(i, j, nz - 1) -
                                        4.0 * f(i, j, nz - 2) + f(i, j, nz - 3));
                else
                    out(i, j, k) = c * (f(i, j, k + 1) - f(i, j, k - 1));
            }
    });
    return out;
}

Field laplacian(const Field& f) {
    const Grid& g = f.grid();
    f.fill_ghosts();
    Field out(g, BcKind::None);
    const double cx = 1.0 / (g.hx * g.hx);
    const double cy = 1.0 / (g.hy * g.hy);
    const double cz = 1.0 / (g.hz * g.hz);
    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double fc = f(i, j, k);
                const double lx = cx * (f(i + 1, j, k) - 2.0 * fc + f(i - 1, j, k));
                const double ly = cy * (f(i, j + 1, k) - 2.0 * fc + f(i, j - 1, k));
                const double lz = cz * (f(i, j, k + 1) - 2.0 * fc + f(i, j, k - 1));
                out(i, j, k) = lx + ly + lz;
            }
    });
    return out;
}

VectorField grad(const Field& f) {
    return {d1(f, 0), d1(f, 1), d1(f, 2)};
}

Field divergence(const VectorField& u) {
    const Grid& g = u[0].grid();
    for (int c = 0; c < 3; ++c) u[c].fill_ghosts();
    Field out(g, BcKind::None);
    const double cx = 1.0 / (2.0 * g.hx);
    const double cy = 1.0 / (2.0 * g.hy);
    const double cz = 1.0 / (2.0 * g.hz);
    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double dx = cx * (u[0](i + 1, j, k) - u[0](i - 1, j, k));
                const double dy = cy * (u[1](i, j + 1, k) - u[1](i, j - 1, k));
                const double dz = cz * (u[2](i, j, k + 1) - u[2](i, j, k - 1));
                out(i, j, k) = dx + dy + dz;
            }
    });
    return out;
}

VectorField graddiv(const VectorField& u) {
    const Grid& g = u[0].grid();
    VectorField out = {Field(g, BcKind::None), Field(g, BcKind::None),
                       Field(g, BcKind::None)};
    for (int a = 0; a < 3; ++a) {
        // component a of grad(div u) = sum_b d_a d_b u_b
        Field acc(g, BcKind::None);
        for (int b = 0; b < 3; ++b) {
            // dcross dirs are normalized (low, high) so other assembly
            // paths can reuse bitwise-identical mixed-derivative fields
            const Field term = (a == b) ? d2(u[b], a)
                                        : dcross(u[b], std::min(a, b),
                                                 std::max(a, b));
            parallel_for(g.nz, [&](int k) {
                for (int j = 0; j < g.ny; ++j)
                    for (int i = 0; i < g.nx; ++i)
                        acc(i, j, k) += term(i, j, k);
            });
        }
        out[a] = std::move(acc);
    }
    return out;
}

VectorField lame(const VectorField& u, double mu, double lambda) {
    const Grid& g = u[0].grid();
    VectorField gd = graddiv(u);
    VectorField out = {Field(g, BcKind::None), Field(g, BcKind::None),
                       Field(g, BcKind::None)};
    const double a = mu, b = mu + lambda;
    for (int c = 0; c < 3; ++c) {
        const Field lap = laplacian(u[c]);
        parallel_for(g.nz, [&](int k) {
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    out[c](i, j, k) = a * lap(i, j, k) + b * gd[c](i, j, k);
        });
    }
    return out;
}

double linf(const Field& f) {
    const Grid& g = f.grid();
    double m = 0.0;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                m = std::max(m, std::abs(f(i, j, k)));
    return m;
}

double linf_diff(const Field& a, const Field& b) {
    const Grid& g = a.grid();
    double m = 0.0;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                m = std::max(m, std::abs(a(i, j, k) - b(i, j, k)));
    return m;
}

double sum(const Field& f) {
    const Grid& g = f.grid();
    // Kahan compensated sum: conservation checks need ~1e-14 relative error
    // on 32^3 grids.
    double s = 0.0, c = 0.0;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double y = f(i, j, k) - c;
                const double t = s + y;
                c = (t - s) - y;
                s = t;
            }
    return s;
}

double dot(const Field& a, const Field& b) {
    const Grid& g = a.grid();
    double s = 0.0, c = 0.0;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double y = a(i, j, k) * b(i, j, k) - c;
                const double t = s + y;
                c = (t - s) - y;
                s = t;
            }
    return s;
}

double l2(const Field& f) {
    const Grid& g = f.grid();
    return std::sqrt(g.hx * g.hy * g.hz * dot(f, f));
}

void axpy(double a, const Field& x, Field& y) {
    const Grid& g = y.grid();
    parallel_for(g.nz, [&](int k) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                y(i, j, k) += a * x(i, j, k);
    });
}

} // namespace moistns
