#pragma once

#include "moistns/grid.hpp"

namespace moistns {

struct SolveStats {
    int iters = 0;
    double rel_residual = 0.0;
};

// Solves (I - sigma*lap) x = b by conjugate gradients to relative residual
// <= tol. x supplies the boundary kind and the initial guess. If x carries
// inhomogeneous Neumann data, the boundary contribution is moved to the
// right-hand side so the CG operator stays homogeneous (and symmetric).
SolveStats helmholtz_solve(Field& x, const Field& b, double sigma,
                           double tol = 1e-10, int max_iter = 2000);

// Solves (I - sigma*Lame) x = b componentwise-coupled for a no-slip
// velocity field.
SolveStats lame_solve(VectorField& x, const VectorField& b, double sigma,
                      double mu, double lambda, double tol = 1e-10,
                      int max_iter = 2000);

} // namespace moistns
