#pragma once

#include "frdiff/levi.hpp"

namespace frdiff::solver {

using levi::GridValues;
using levi::SpaceTimeFn;
using levi::SpatialFn;

// Cauchy problem D^(alpha) u = B u + f on (0, T] x R^n, u(0, x) = u0(x),
// with B the elliptic operator described by op. Null u0 or f means zero;
// sup bounds are declared by the caller and enter validation and the
// boundedness sanity check only.
struct CauchyProblem {
    double alpha = 0.5;
    double T = 1.0;
    levi::OperatorSpec op;
    SpatialFn u0;
    double u0_sup = 0.0;
    SpaceTimeFn f;
    double f_sup = 0.0;

    void validate() const;
};

// Discretization request. The solver computes on an internally enlarged
// lattice (the reporting window plus a halo covering the kernel envelope and
// the zero-extension error of the lattice convolutions) and reports only the
// inner window of half width half_width around base.
struct GridRequest {
    int time_levels = 16;
    double time_grading = 2.0;
    double h = 0.25;
    double half_width = 2.0;
    Eigen::VectorXd base;  // empty means the origin
    double halo = 0.0;     // <= 0 means automatic (3.5 T^{alpha/2})
};

struct SolutionGrid {
    levi::SpaceTimeGrid grid;  // the reporting window
    GridValues u;
    double error_estimate = 0.0;
};

// First solution term Int Z(t, x; xi) u0(xi) dxi (equals u0 at level 0).
SolutionGrid initial_potential(const CauchyProblem& problem,
                               const GridRequest& request,
                               const levi::SolveOptions& options = {});

// Source term W(t, x) = Int_0^t Int Y(t - lam, x; y) f(lam, y) dy dlam.
SolutionGrid heat_potential(const CauchyProblem& problem,
                            const GridRequest& request,
                            const levi::SolveOptions& options = {});

// Full solution u = initial_potential + heat_potential; the two terms are
// computed independently, so the split is exactly linear in the data.
SolutionGrid solve_cauchy(const CauchyProblem& problem,
                          const GridRequest& request,
                          const levi::SolveOptions& options = {});

// Pointwise D^(alpha) u - B u - f on the solution's own grid (product
// integration in time, centered differences in space; boundary ring and
// level 0 hold zeros). error_estimate carries the sup norm over the interior
// subgrid, skipping the startup layer of the time discretization.
SolutionGrid residual(const CauchyProblem& problem, const SolutionGrid& sol);

}  // namespace frdiff::solver
