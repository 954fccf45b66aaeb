#pragma once

#include "moistns/dynamics.hpp"
#include "moistns/grid.hpp"
#include "moistns/params.hpp"

namespace moistns {

// Flow map X(t,y) = y + D(t,y) on the label grid, advanced by trapezoidal
// quadrature of the Lagrangian velocity. Stores the map gradient and its
// pointwise inverse Z = [grad X]^-1; the map is usable only while
// max |grad X - Id| <= 1/2 (the invertibility threshold).
class LagrangianMap {
public:
    explicit LagrangianMap(const Grid& g);

    // Trapezoidal update D += dt/2 (u_prev + u_tilde); recomputes gradX, Z,
    // deviation. Throws MapDegenerate if the threshold is crossed.
    void advance(const VectorField& u_tilde, double dt);

    // Overwrites the velocity used as the left endpoint of the next
    // trapezoid (call once with u(0) before the first advance).
    void set_initial_velocity(const VectorField& u0);

    const Grid& grid() const { return g_; }
    const VectorField& displacement() const { return D_; }
    const TensorField& gradX() const { return gradX_; }
    const TensorField& Z() const { return Z_; }
    double deviation() const { return deviation_; }
    bool valid() const { return deviation_ <= 0.5; }

    // position X = y + D at a cell
    double X(int c, int i, int j, int k) const;

private:
    void recompute();
    Grid g_;
    VectorField D_;
    VectorField u_prev_;
    TensorField gradX_;  // gradX[3a+b] = d X_a / d y_b
    TensorField Z_;      // Z[3a+b] = Z_{a,b}
    double deviation_ = 0.0;
};

// An identity map on g (D = 0), exact 0/1 tensors.
LagrangianMap identity_map(const Grid& g);

// dZ/dy as 27 fields, dz[9k + 3l + j] = d Z_{l,j} / d y_k, by direct
// differencing of Z.
std::array<Field, 27> z_derivatives(const TensorField& Z);
// Same object via the identity dZ = -Z (d gradX) Z (consistency cross-check).
std::array<Field, 27> z_derivatives_analytic(const LagrangianMap& map);

// Transformed Laplacian:
//   L1 f = sum_{j,k,l} f_{y_k y_l} Z_{k,j} Z_{l,j}
//        + sum_{j,k,l} f_{y_l} (dZ_{l,j}/dy_k) Z_{k,j}.
// Reduces to laplacian(f) bit-exactly when Z = Id.
Field transformed_laplacian(const Field& f, const TensorField& Z,
                            const std::array<Field, 27>& dZ);

// Transformed grad-div:
//   (L2 u)_i = sum_{j,k,l} u_j,{y_k y_l} Z_{k,j} Z_{l,i}
//            + sum_{j,k,l} u_j,{y_k} (dZ_{k,j}/dy_l) Z_{l,i}.
// Reduces to graddiv(u) bit-exactly when Z = Id.
VectorField transformed_divgrad(const VectorField& u, const TensorField& Z,
                                const std::array<Field, 27>& dZ);

// The six split right-hand sides G of the label-frame system, transcribed
// term by term. du_dt/dT_dt supply the time derivatives appearing in G_u and
// G_T (the split form keeps the frozen-coefficient linear operators on the
// left). rho_d0/Q_m0 are the frozen initial coefficient fields.
struct TransformedSources {
    Field G_d;
    VectorField G_u;
    Field G_T, G_v, G_c, G_r;
};

TransformedSources transformed_sources(const State& tilde,
                                       const LagrangianMap& map,
                                       const PhysParams& p,
                                       const Field& rho_d0, const Field& Q_m0,
                                       const VectorField& du_dt,
                                       const Field& dT_dt);

// Wall data of the transformed Neumann condition
//   d_{y3} f = (1 - Z_{3,3}) d_{y3} f - Z_{1,3} d_{y1} f - Z_{2,3} d_{y2} f,
// same formula on both walls, returned per (i,j) column (lower, upper).
struct BoundaryData {
    std::vector<double> lo, hi;
};
BoundaryData transformed_boundary(const Field& f, const LagrangianMap& map);

// Integrates the label-frame system with the same IMEX splitting as the
// Eulerian stepper: frozen-coefficient Lame/Laplace implicit, everything
// else (including all map-dependent corrections and the inhomogeneous
// Neumann wall data) explicit. Simplified-constants mode only.
class LagrangianStepper {
public:
    LagrangianStepper(const State& s0, const PhysParams& p);

    void step(double dt);
    const State& state() const { return s_; }
    const LagrangianMap& map() const { return map_; }

private:
    PhysParams p_;
    State s_;
    LagrangianMap map_;
    double coef_u_, coef_T_;
};

// Runs the Eulerian and Lagrangian integrations from the same initial
// state to t_end (fixed dt), pulls the Lagrangian fields back through the
// map (local Newton inversion + trilinear interpolation) and returns the
// max discrepancy over all six fields.
double equivalence_check(const State& s0, double t_end, double dt,
                         const PhysParams& p);

} // namespace moistns
