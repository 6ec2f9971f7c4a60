// Cauchy-problem solver. Rather than assembling Green matrix columns per
// source point, both potentials are aggregated into a single density: with
// the defect kernels M, K of the parametrix construction,
//   initial term = Z0 * u0 + Y0 (*) Phi1,  Phi1 = M * u0 + K (*) Phi1,
//   source term  = Y0 (*) f  + Y0 (*) Phi2, Phi2 = K (*) f + K (*) Phi2,
// which is the source-point integral of the columnwise construction carried
// out once per problem. Constant-coefficient operators short-circuit the
// Volterra stage (the defect vanishes identically).
#include "frdiff/solver.hpp"

#include <algorithm>
#include <cmath>

#include "frdiff/errors.hpp"
#include "frdiff/fractional.hpp"
#include "frdiff/gamma.hpp"

namespace frdiff::solver {

namespace {

bool defect_free(const levi::OperatorSpec& op) {
    using Family = levi::CoefficientField::Family;
    for (auto& row : op.a)
        for (auto& f : row)
            if (f.family != Family::constant) return false;
    for (auto& f : op.b)
        if (f.family != Family::constant || f.params[0] != 0.0) return false;
    return op.c.family == Family::constant && op.c.params[0] == 0.0;
}

struct Grids {
    levi::SpaceTimeGrid outer;
    levi::SpaceTimeGrid inner;
    std::vector<int> map;  // inner flat index -> outer flat index
};

Grids build_grids(const CauchyProblem& p, const GridRequest& r) {
    const int n = p.op.n;
    if (!(r.h > 0.0) || !(r.half_width > 0.0))
        throw DomainError("solver: grid spacing and half width must be positive");
    if (r.time_levels < 2)
        throw DomainError("solver: need at least two time levels");
    Eigen::VectorXd base = r.base.size() ? r.base : Eigen::VectorXd::Zero(n);
    if ((int)base.size() != n)
        throw DomainError("solver: grid base dimension mismatch");

    auto tg = fractional::TimeGrid::graded(p.T, r.time_levels, r.time_grading);
    double tscale = std::pow(p.T, p.alpha / 2.0);
    double halo = r.halo > 0.0 ? r.halo : 3.5 * tscale;
    double need = std::max(r.half_width + halo, 6.0 * tscale);

    Grids g;
    g.outer = levi::SpaceTimeGrid::make(n, p.alpha, tg, base, r.h, need);
    int ri = std::max(1, (int)std::llround(r.half_width / r.h));
    ri = std::min(ri, g.outer.radius_cells);
    g.inner.time = tg;
    g.inner.base = base;
    g.inner.h = r.h;
    g.inner.radius_cells = ri;
    g.inner.n = n;

    const int per_in = g.inner.per_axis(), per_out = g.outer.per_axis();
    const int off = g.outer.radius_cells - ri;
    g.map.resize(g.inner.lattice_size());
    for (int j = 0; j < (int)g.map.size(); ++j) {
        // decompose j in base per_in (axis 0 outermost) and re-encode
        int rest = j, flat = 0;
        std::vector<int> idx(n);
        for (int d = n - 1; d >= 0; --d) {
            idx[d] = rest % per_in;
            rest /= per_in;
        }
        for (int d = 0; d < n; ++d) flat = flat * per_out + idx[d] + off;
        g.map[j] = flat;
    }
    return g;
}

GridValues crop(const Grids& g, const GridValues& u) {
    GridValues out(u.size(), std::vector<double>(g.map.size(), 0.0));
    for (size_t i = 0; i < u.size(); ++i)
        for (size_t j = 0; j < g.map.size(); ++j) out[i][j] = u[i][g.map[j]];
    return out;
}

void add_into(GridValues& a, const GridValues& b) {
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
}

// Initial term on the (outer) computation grid.
GridValues initial_part(const CauchyProblem& p, const levi::SpaceTimeGrid& grid,
                        const levi::SolveOptions& options) {
    GridValues u = levi::parametrix_potential(p.op, p.alpha, grid, p.u0);
    if (!defect_free(p.op)) {
        GridValues rhs = levi::apply_M(p.op, p.alpha, grid, p.u0);
        // Unlike the pointwise defect kernel, its potential against u0 has a
        // finite nonzero t -> 0+ limit; extrapolate it into level 0 (in
        // powers of t^{alpha/2}) so the first convolution panel interpolates
        // the density correctly.
        if (grid.time.size() >= 3) {
            double w1 = std::pow(grid.time.nodes[1], p.alpha / 2.0);
            double w2 = std::pow(grid.time.nodes[2], p.alpha / 2.0);
            for (size_t j = 0; j < rhs[0].size(); ++j)
                rhs[0][j] = (rhs[1][j] * w2 - rhs[2][j] * w1) / (w2 - w1);
        }
        auto phi = levi::solve_density(p.op, p.alpha, grid, rhs, options);
        add_into(u, levi::convolve_Y0(p.op, p.alpha, grid, phi.values));
    }
    return u;
}

GridValues heat_part(const CauchyProblem& p, const levi::SpaceTimeGrid& grid,
                     const levi::SolveOptions& options) {
    GridValues u = levi::convolve_Y0_source(p.op, p.alpha, grid, p.f);
    if (!defect_free(p.op)) {
        GridValues rhs = levi::convolve_K_source(p.op, p.alpha, grid, p.f);
        auto phi = levi::solve_density(p.op, p.alpha, grid, rhs, options);
        add_into(u, levi::convolve_Y0(p.op, p.alpha, grid, phi.values));
    }
    return u;
}

// Crop to the reporting window and attach an a-posteriori error estimate:
// the interior residual fed back through the source potential is bounded by
// sup|residual| T^alpha / Gamma(1 + alpha); a 5% margin absorbs the
// discretization of the residual operator itself.
SolutionGrid finish(const CauchyProblem& p, const Grids& g, const GridValues& u) {
    SolutionGrid sol;
    sol.grid = g.inner;
    sol.u = crop(g, u);
    for (auto& row : sol.u)
        for (double v : row)
            if (!std::isfinite(v))
                throw ConvergenceError("solver: solution is not finite");
    double tfac = std::pow(p.T, p.alpha) * rgamma(1.0 + p.alpha);
    SolutionGrid res = residual(p, sol);
    sol.error_estimate = 1.05 * std::max(1.0, tfac) * res.error_estimate;
    return sol;
}

CauchyProblem drop_f(const CauchyProblem& p) {
    CauchyProblem q = p;
    q.f = nullptr;
    q.f_sup = 0.0;
    return q;
}

CauchyProblem drop_u0(const CauchyProblem& p) {
    CauchyProblem q = p;
    q.u0 = nullptr;
    q.u0_sup = 0.0;
    return q;
}

}  // namespace

void CauchyProblem::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("CauchyProblem: alpha must lie in (0,1)");
    if (!(T > 0.0)) throw DomainError("CauchyProblem: horizon must be positive");
    op.validate();
    if (u0_sup < 0.0 || f_sup < 0.0)
        throw DomainError("CauchyProblem: sup bounds must be nonnegative");
}

SolutionGrid initial_potential(const CauchyProblem& problem,
                               const GridRequest& request,
                               const levi::SolveOptions& options) {
    problem.validate();
    CauchyProblem p = drop_f(problem);
    Grids g = build_grids(p, request);
    if (!p.u0) {
        SolutionGrid sol;
        sol.grid = g.inner;
        sol.u.assign(g.inner.time.size(),
                     std::vector<double>(g.inner.lattice_size(), 0.0));
        return sol;
    }
    return finish(p, g, initial_part(p, g.outer, options));
}

SolutionGrid heat_potential(const CauchyProblem& problem,
                            const GridRequest& request,
                            const levi::SolveOptions& options) {
    problem.validate();
    CauchyProblem p = drop_u0(problem);
    Grids g = build_grids(p, request);
    if (!p.f) {
        SolutionGrid sol;
        sol.grid = g.inner;
        sol.u.assign(g.inner.time.size(),
                     std::vector<double>(g.inner.lattice_size(), 0.0));
        return sol;
    }
    return finish(p, g, heat_part(p, g.outer, options));
}

SolutionGrid solve_cauchy(const CauchyProblem& problem,
                          const GridRequest& request,
                          const levi::SolveOptions& options) {
    problem.validate();
    Grids g = build_grids(problem, request);
    GridValues u(g.outer.time.size(),
                 std::vector<double>(g.outer.lattice_size(), 0.0));
    if (problem.u0) add_into(u, initial_part(problem, g.outer, options));
    if (problem.f) add_into(u, heat_part(problem, g.outer, options));
    return finish(problem, g, u);
}

SolutionGrid residual(const CauchyProblem& problem, const SolutionGrid& sol) {
    problem.validate();
    const auto& g = sol.grid;
    const int n = g.n, nt = g.time.size(), nl = g.lattice_size();
    const int per = g.per_axis();
    if (per < 5 || nt < 4)
        throw DomainError("solver: grid too coarse for residual differences");
    if ((int)sol.u.size() != nt)
        throw DomainError("solver: solution has wrong number of time levels");
    for (auto& row : sol.u)
        if ((int)row.size() != nl)
            throw DomainError("solver: solution has wrong lattice size");

    // Caputo derivative column by column on the solution's own time grid
    GridValues ca(nt, std::vector<double>(nl, 0.0));
    {
        fractional::SampledFunction sf;
        sf.grid = g.time;
        sf.values.resize(nt);
        for (int j = 0; j < nl; ++j) {
            for (int i = 0; i < nt; ++i) sf.values[i] = sol.u[i][j];
            auto d = fractional::caputo_derivative(sf, problem.alpha);
            for (int i = 0; i < nt; ++i) ca[i][j] = d.values[i];
        }
    }

    std::vector<int> stride(n, 1);
    for (int d = n - 2; d >= 0; --d) stride[d] = stride[d + 1] * per;

    SolutionGrid out;
    out.grid = g;
    out.u.assign(nt, std::vector<double>(nl, 0.0));
    // skip the first quarter of the (graded) levels: the product-integration
    // error of the time derivative is concentrated in the startup layer
    const int startup = std::max(1, nt / 4);
    const double h = g.h, h2 = h * h;
    double sup = 0.0;
    for (int j = 0; j < nl; ++j) {
        bool interior = true;
        int rest = j;
        for (int d = n - 1; d >= 0; --d) {
            int idx = rest % per;
            rest /= per;
            if (idx == 0 || idx == per - 1) interior = false;
        }
        if (!interior) continue;
        Eigen::VectorXd x = g.node(j);
        Eigen::MatrixXd A = problem.op.a_at(x);
        Eigen::VectorXd b = problem.op.b_at(x);
        double c = problem.op.c_at(x);
        for (int i = 1; i < nt; ++i) {
            const auto& ui = sol.u[i];
            double Bu = c * ui[j];
            for (int d = 0; d < n; ++d) {
                double up = ui[j + stride[d]], um = ui[j - stride[d]];
                Bu += A(d, d) * (up - 2.0 * ui[j] + um) / h2;
                Bu += b[d] * (up - um) / (2.0 * h);
            }
            for (int d = 0; d < n; ++d)
                for (int e = d + 1; e < n; ++e) {
                    double cross = ui[j + stride[d] + stride[e]] -
                                   ui[j + stride[d] - stride[e]] -
                                   ui[j - stride[d] + stride[e]] +
                                   ui[j - stride[d] - stride[e]];
                    Bu += 2.0 * A(d, e) * cross / (4.0 * h2);
                }
            double fv = problem.f ? problem.f(g.time.nodes[i], x) : 0.0;
            double r = ca[i][j] - Bu - fv;
            out.u[i][j] = r;
            if (i >= startup) sup = std::max(sup, std::abs(r));
        }
    }
    out.error_estimate = sup;
    return out;
}

}  // namespace frdiff::solver
