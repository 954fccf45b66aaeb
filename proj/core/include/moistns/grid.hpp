#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "moistns/errors.hpp"

namespace moistns {

// Cell-centered grid on the unit box [0,1]^3. x and y are periodic; z has
// walls at z=0 and z=1. Cell centers sit at (i+1/2)h.
struct Grid {
    int nx = 0, ny = 0, nz = 0;
    double hx = 0.0, hy = 0.0, hz = 0.0;

    Grid() = default;
    Grid(int nx_, int ny_, int nz_)
        : nx(nx_), ny(ny_), nz(nz_),
          hx(1.0 / nx_), hy(1.0 / ny_), hz(1.0 / nz_) {
        if (nx_ < 4 || ny_ < 4 || nz_ < 4)
            throw ValidationError("grid counts must be >= 4");
    }

    double x(int i) const { return (i + 0.5) * hx; }
    double y(int j) const { return (j + 0.5) * hy; }
    double z(int k) const { return (k + 0.5) * hz; }
    long long ncells() const { return 1ll * nx * ny * nz; }
};

// Wall condition in z. Dirichlet0 is homogeneous u=0 (odd reflection into
// the ghosts); Neumann prescribes the wall-normal derivative (zero unless
// per-column data is attached); None is a plain zero-gradient mirror for
// fields with no physical wall condition of their own.
enum class BcKind { None, Dirichlet0, Neumann };

// Scalar field with two ghost layers on every side. Interior indices run
// over [0,n); ghosts over [-2,0) and [n,n+2). Ghost values are derived
// state: fill_ghosts() recomputes them from the interior, so storage is
// mutable and operators may take const references.
class Field {
public:
    Field() = default;
    Field(const Grid& g, BcKind bc_z);

    const Grid& grid() const { return g_; }
    BcKind bc() const { return bc_; }

    double& operator()(int i, int j, int k) { return data_[idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[idx(i, j, k)]; }

    // Attaches inhomogeneous Neumann data: dz f = g_lo at z=0, dz f = g_hi
    // at z=1, one value per (i,j) column, row-major i-fastest. Empty vectors
    // revert to the homogeneous condition.
    void set_neumann_data(std::vector<double> g_lo, std::vector<double> g_hi);
    void clear_neumann_data();
    bool has_neumann_data() const { return !g_lo_.empty(); }
    const std::vector<double>& neumann_lo() const { return g_lo_; }
    const std::vector<double>& neumann_hi() const { return g_hi_; }

    // Recomputes all ghost layers from the interior: z walls first, then the
    // periodic x wrap, then the periodic y wrap (so edge/corner ghosts are
    // consistent).
    void fill_ghosts() const;

    void fill(double v);
    void copy_interior_from(const Field& other);

    std::size_t idx(int i, int j, int k) const {
        return (static_cast<std::size_t>(k + 2) * (g_.ny + 4) + (j + 2)) *
                   (g_.nx + 4) +
               (i + 2);
    }

private:
    Grid g_;
    BcKind bc_ = BcKind::None;
    mutable std::vector<double> data_;
    std::vector<double> g_lo_, g_hi_;
};

using VectorField = std::array<Field, 3>;
using TensorField = std::array<Field, 9>;  // row-major: t[3*a + b]

// Velocity components satisfy u=0 at both walls.
VectorField make_velocity(const Grid& g);

// --- second-order finite differences ------------------------------------
// All operators fill ghosts on their inputs and write interior cells only.
// dir: 0 = x, 1 = y, 2 = z.

// Centered first derivative through the ghost layers.
Field d1(const Field& f, int dir);

// Centered second derivative through the ghost layers.
Field d2(const Field& f, int dir);

// Mixed second derivative (4-point cross stencil) through the ghosts.
Field dcross(const Field& f, int dir_a, int dir_b);

// First derivative that never touches z ghosts: centered in the interior,
// second-order one-sided at the first/last cell row for dir = 2. Used for
// terms with no boundary condition of their own (pressure gradient,
// sedimentation flux).
Field deriv_raw(const Field& f, int dir);

Field laplacian(const Field& f);
VectorField grad(const Field& f);
Field divergence(const VectorField& u);
// grad(div u), assembled from direct mixed stencils per component.
VectorField graddiv(const VectorField& u);
// mu * lap(u) + (mu + lambda) * grad(div u)
VectorField lame(const VectorField& u, double mu, double lambda);

// --- reductions (serial, deterministic) ----------------------------------
double linf(const Field& f);
double linf_diff(const Field& a, const Field& b);
double sum(const Field& f);   // compensated summation
double dot(const Field& a, const Field& b);
double l2(const Field& f);    // sqrt(h^3 * sum f^2)

// axpy on interiors: y += a*x
void axpy(double a, const Field& x, Field& y);

} // namespace moistns
