#include <cmath>

#include "doctest.h"
#include "frdiff/errors.hpp"
#include "frdiff/gamma.hpp"
#include "frdiff/hfun.hpp"
#include "frdiff/kernels.hpp"
#include "frdiff/levi.hpp"

using namespace frdiff;
using namespace frdiff::levi;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd x(v.size());
    int i = 0;
    for (double c : v) x[i++] = c;
    return x;
}

OperatorSpec trig_op_1d() {
    return OperatorSpec::isotropic(1, CoefficientField::trig(1.0, 0.3, 1.0));
}

double sup_norm(const GridValues& f) {
    double m = 0.0;
    for (auto& row : f)
        for (double v : row) m = std::max(m, std::abs(v));
    return m;
}

double one(const Eigen::VectorXd&) { return 1.0; }

}  // namespace

TEST_CASE("coefficient fields: families, bounds, holder ratios") {
    auto cf = CoefficientField::constant(2.5);
    CHECK(cf(vec({1.0, -3.0})) == 2.5);
    CHECK(cf.sup_bound == 2.5);

    auto tf = CoefficientField::trig(1.0, 0.3, 2.0, 1);
    CHECK(tf(vec({0.0, M_PI / 4.0})) == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(tf.sup_bound == doctest::Approx(1.3));

    auto bf = CoefficientField::bump(0.5, 0.4, 2.0);
    CHECK(bf(vec({0.0})) == doctest::Approx(0.9));
    CHECK(bf(vec({100.0})) == doctest::Approx(0.5));

    // sampled Holder-1 quotients stay below the analytic Lipschitz constants
    for (double x = -3.0; x < 3.0; x += 0.37)
        for (double dx : {0.01, 0.3, 1.1}) {
            double qt = std::abs(tf(vec({0.0, x + dx})) - tf(vec({0.0, x}))) / dx;
            CHECK(qt <= 0.3 * 2.0 + 1e-12);
            double qb = std::abs(bf(vec({x + dx})) - bf(vec({x}))) / dx;
            CHECK(qb <= 0.4 * std::sqrt(2.0 / M_E) / 2.0 + 1e-12);
        }

    CoefficientField bad = bf;
    bad.params[2] = -1.0;
    CHECK_THROWS_AS(bad(vec({0.0})), DomainError);
    bad = tf;
    bad.holder_gamma = 1.5;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("operator spec: validation catches asymmetry and ellipticity loss") {
    auto op = trig_op_1d();
    CHECK_NOTHROW(op.validate());
    CHECK(op.delta == doctest::Approx(0.7));
    CHECK(op.a_at(vec({M_PI / 2.0}))(0, 0) == doctest::Approx(1.3));

    OperatorSpec asym = OperatorSpec::laplacian(2);
    asym.a[0][1] = CoefficientField::constant(0.2);
    CHECK_THROWS_AS(asym.validate(), DomainError);

    OperatorSpec weak = OperatorSpec::isotropic(1, CoefficientField::constant(0.1));
    weak.delta = 0.5;
    CHECK_THROWS_AS(weak.validate(), DomainError);

    OperatorSpec drift = OperatorSpec::laplacian(2);
    drift.b = {CoefficientField::constant(0.5), CoefficientField::constant(-0.2)};
    drift.c = CoefficientField::constant(0.1);
    CHECK_NOTHROW(drift.validate());
    CHECK(drift.b_at(vec({0.0, 0.0}))[0] == 0.5);
}

TEST_CASE("space-time grid: cutoff enforcement and node round trip") {
    auto tg = fractional::TimeGrid::graded(1.0, 8, 2.0);
    auto grid = SpaceTimeGrid::make(1, 0.5, tg, vec({0.3}), 0.25);
    CHECK(grid.half_width() >= 6.0);  // T = 1: minimal cutoff is 6 T^{alpha/2}
    CHECK(grid.per_axis() == 2 * grid.radius_cells + 1);
    CHECK(grid.lattice_size() == grid.per_axis());
    CHECK(grid.node(grid.lattice_size() / 2)[0] == doctest::Approx(0.3));
    CHECK(grid.node(0)[0] == doctest::Approx(0.3 - grid.half_width()));

    CHECK_THROWS_AS(SpaceTimeGrid::make(1, 0.5, tg, vec({0.0}), 0.25, 2.0),
                    DomainError);

    auto g2 = SpaceTimeGrid::make(2, 0.5, fractional::TimeGrid::graded(0.2, 4, 2.0),
                                  vec({0.0, 1.0}), 0.6, 4.2);
    CHECK(g2.lattice_size() == g2.per_axis() * g2.per_axis());
    // row-major: last axis fastest
    CHECK(g2.node(1)[1] == doctest::Approx(1.0 - g2.half_width() + 0.6));
    CHECK(g2.node(1)[0] == doctest::Approx(0.0 - g2.half_width()));
}

TEST_CASE("profile tables: interpolation matches direct evaluation") {
    specfun::RegimeThresholds th;
    th.asymptotic_min = 40.0;
    for (int n : {1, 2}) {
        for (bool source : {false, true}) {
            const auto& tab = specfun::HProfileTable::cached(n, 0.6, source);
            auto spec = source ? specfun::HFunctionSpec::y_spec(n, 0.6)
                               : specfun::HFunctionSpec::z_spec(n, 0.6);
            std::vector<specfun::HFunctionSpec> chain{spec};
            for (int k = 0; k < 3; ++k)
                chain.push_back(specfun::hfun_shift_derivative(chain.back()));
            for (int k = 0; k <= 3; ++k) {
                double max_abs = 0.0;
                std::vector<std::pair<double, double>> pairs;
                for (double z = 3e-6; z < 70.0; z *= 1.9) {
                    double direct = specfun::hfun_eval(chain[k], z, th).value;
                    pairs.emplace_back(tab.eval(k, z), direct);
                    max_abs = std::max(max_abs, std::abs(direct));
                }
                for (auto& [approx, direct] : pairs)
                    CHECK(std::abs(approx - direct) <=
                          1e-5 * max_abs + 1e-5 * std::abs(direct));
            }
        }
    }
    const auto& tab = specfun::HProfileTable::cached(1, 0.6, false);
    CHECK_THROWS_AS(tab.eval(4, 1.0), DomainError);
    CHECK_THROWS_AS(tab.eval(0, -1.0), DomainError);
}

TEST_CASE("defect kernels: collapse for constant and reaction-only operators") {
    auto constant_op = OperatorSpec::laplacian(2);
    CHECK(levi_M(constant_op, 0.5, 0.7, vec({0.4, -0.2}), vec({0.0, 0.1})) == 0.0);
    CHECK(levi_K(constant_op, 0.5, 0.7, vec({0.4, -0.2}), vec({0.0, 0.1})) == 0.0);

    OperatorSpec reaction = OperatorSpec::laplacian(2);
    reaction.c = CoefficientField::constant(0.4);
    auto id2 = kernels::SPDOperator::identity(2);
    kernels::KernelQuery q;
    q.alpha = 0.5;
    q.t = 0.7;
    q.x = vec({0.4, -0.3});
    double m = levi_M(reaction, 0.5, 0.7, vec({0.4, -0.2}), vec({0.0, 0.1}));
    q.x = vec({0.4, -0.3});
    CHECK(m == doctest::Approx(0.4 * kernels::z0_eval(id2, q)).epsilon(1e-12));
    double k = levi_K(reaction, 0.5, 0.7, vec({0.4, -0.2}), vec({0.0, 0.1}));
    CHECK(k == doctest::Approx(0.4 * kernels::y0_eval(id2, q)).epsilon(1e-12));
}

TEST_CASE("defect kernel M: finite-difference cross-check for a trig coefficient") {
    auto op = trig_op_1d();
    double alpha = 0.4, t = 0.6;
    auto frozen = kernels::SPDOperator::make(op.a_at(vec({0.2})));
    for (double x : {0.9, -0.5, 2.0}) {
        double d = x - 0.2, h = 1e-4;
        auto z0 = [&](double dd) {
            kernels::KernelQuery q;
            q.alpha = alpha;
            q.t = t;
            q.x = vec({dd});
            return kernels::z0_eval(frozen, q);
        };
        double dz2 = (z0(d + h) - 2.0 * z0(d) + z0(d - h)) / (h * h);
        double want = (op.a_at(vec({x}))(0, 0) - frozen.a(0, 0)) * dz2;
        double got = levi_M(op, alpha, t, vec({x}), vec({0.2}));
        CHECK(got == doctest::Approx(want).epsilon(2e-5));
    }
}

TEST_CASE("source convolution: constant coefficients integrate the power law") {
    double alpha = 0.5;
    auto op = OperatorSpec::laplacian(1);
    auto tg = fractional::TimeGrid::graded(0.5, 12, 2.0);
    auto grid = SpaceTimeGrid::make(1, alpha, tg, vec({0.0}), 0.25, 8.0);
    GridValues f(grid.time.size(), std::vector<double>(grid.lattice_size(), 1.0));
    auto w = convolve_Y0(op, alpha, grid, f);
    int center = grid.lattice_size() / 2;
    for (int i : {3, 6, 9, 12}) {
        double t = grid.time.nodes[i];
        double exact = std::pow(t, alpha) * rgamma(1.0 + alpha);
        CHECK(w[i][center] == doctest::Approx(exact).epsilon(1e-4));
    }
    CHECK(w[0][center] == 0.0);
}

TEST_CASE("source convolution: two-dimensional constant-coefficient power law") {
    double alpha = 0.5;
    auto op = OperatorSpec::laplacian(2);
    auto tg = fractional::TimeGrid::graded(0.2, 6, 2.0);
    auto grid = SpaceTimeGrid::make(2, alpha, tg, vec({0.0, 0.0}), 0.6, 4.2);
    GridValues f(grid.time.size(), std::vector<double>(grid.lattice_size(), 1.0));
    auto w = convolve_Y0(op, alpha, grid, f);
    int center = grid.lattice_size() / 2;
    for (int i : {3, 6}) {
        double t = grid.time.nodes[i];
        double exact = std::pow(t, alpha) * rgamma(1.0 + alpha);
        CHECK(w[i][center] == doctest::Approx(exact).epsilon(5e-3));
    }
}

TEST_CASE("volterra solve: zero right-hand side, residual contract, Neumann sum") {
    double alpha = 0.5;
    auto tg = fractional::TimeGrid::graded(0.5, 8, 2.0);

    auto constant_op = OperatorSpec::laplacian(1);
    auto gridc = SpaceTimeGrid::make(1, alpha, tg, vec({0.0}), 0.3, 5.2);
    auto q0 = solve_Q(constant_op, alpha, gridc, vec({0.0}));
    CHECK(q0.iteration_count == 0);
    CHECK(sup_norm(q0.values) == 0.0);

    auto op = trig_op_1d();
    auto grid = SpaceTimeGrid::make(1, alpha, tg, vec({0.3}), 0.3, 5.2);
    auto q = solve_Q(op, alpha, grid, vec({0.3}));
    CHECK(q.iteration_count >= 2);
    CHECK(q.residual_norm <= 1e-6);
    double qn = sup_norm(q.values);
    CHECK(qn > 0.0);

    // direct residual of the reported table
    GridValues conv = convolve_K(op, alpha, grid, q.values);
    double m0 = 0.0;
    for (int i = 0; i < grid.time.size(); ++i)
        for (int j = 0; j < grid.lattice_size(); ++j) {
            double rhs = i == 0 ? 0.0
                                : levi_M(op, alpha, grid.time.nodes[i],
                                         grid.node(j), vec({0.3}));
            m0 = std::max(m0, std::abs(q.values[i][j] - rhs - conv[i][j]));
        }
    CHECK(m0 <= 2e-6 * qn);

    // four-term Neumann partial sum agrees within the coarse-grid contract
    GridValues m(grid.time.size(), std::vector<double>(grid.lattice_size(), 0.0));
    for (int i = 1; i < grid.time.size(); ++i)
        for (int j = 0; j < grid.lattice_size(); ++j)
            m[i][j] = levi_M(op, alpha, grid.time.nodes[i], grid.node(j), vec({0.3}));
    GridValues sum = m, term = m;
    for (int k = 0; k < 3; ++k) {
        term = convolve_K(op, alpha, grid, term);
        for (size_t i = 0; i < sum.size(); ++i)
            for (size_t j = 0; j < sum[i].size(); ++j) sum[i][j] += term[i][j];
    }
    double diff = 0.0;
    for (size_t i = 0; i < sum.size(); ++i)
        for (size_t j = 0; j < sum[i].size(); ++j)
            diff = std::max(diff, std::abs(sum[i][j] - q.values[i][j]));
    CHECK(diff <= 0.1 * qn);

    SolveOptions strangled;
    strangled.max_iterations = 1;
    CHECK_THROWS_AS(solve_Q(op, alpha, grid, vec({0.3}), strangled),
                    ConvergenceError);
}

TEST_CASE("volterra causality: late-time right-hand side cannot reach earlier levels") {
    double alpha = 0.5;
    auto op = trig_op_1d();
    auto tg = fractional::TimeGrid::graded(0.5, 6, 2.0);
    auto grid = SpaceTimeGrid::make(1, alpha, tg, vec({0.0}), 0.3, 5.2);
    GridValues f(grid.time.size(), std::vector<double>(grid.lattice_size(), 0.0));
    for (int i = 0; i < grid.time.size(); ++i)
        for (int j = 0; j < grid.lattice_size(); ++j)
            f[i][j] = std::sin(0.3 * i + 0.7 * j);
    auto a = convolve_K(op, alpha, grid, f);
    GridValues g = f;
    for (int j = 0; j < grid.lattice_size(); ++j) g[grid.time.size() - 1][j] *= 2.0;
    auto b = convolve_K(op, alpha, grid, g);
    for (int i = 0; i + 1 < grid.time.size(); ++i)
        for (int j = 0; j < grid.lattice_size(); ++j) CHECK(a[i][j] == b[i][j]);
}

TEST_CASE("assembly: constant coefficients give the bare parametrix") {
    double alpha = 0.45;
    auto op = OperatorSpec::isotropic(1, CoefficientField::constant(1.2));
    auto tg = fractional::TimeGrid::graded(0.5, 6, 2.0);
    auto grid = SpaceTimeGrid::make(1, alpha, tg, vec({0.0}), 0.3, 5.2);
    auto z = assemble_Z(op, alpha, grid, vec({0.0}));
    CHECK(z.iteration_count == 0);
    CHECK(sup_norm(z.values_v) == 0.0);
    auto frozen = kernels::SPDOperator::make(op.a_at(vec({0.0})));
    for (int i = 1; i < grid.time.size(); ++i)
        for (int j = 0; j < grid.lattice_size(); ++j) {
            kernels::KernelQuery q;
            q.alpha = alpha;
            q.t = grid.time.nodes[i];
            q.x = grid.node(j);
            CHECK(z.values[i][j] == kernels::z0_eval(frozen, q));
            CHECK(z.values[i][j] == z.values_parametrix[i][j] + z.values_v[i][j]);
        }

    auto y = assemble_Y(op, alpha, grid, vec({0.0}));
    CHECK(sup_norm(y.values_v) == 0.0);
    kernels::KernelQuery q;
    q.alpha = alpha;
    q.t = grid.time.nodes[3];
    q.x = grid.node(2);
    CHECK(y.values[3][2] == kernels::y0_eval(frozen, q));
}

TEST_CASE("assembly: variable coefficients, decomposition and nonnegativity") {
    double alpha = 0.5;
    auto op = trig_op_1d();
    auto tg = fractional::TimeGrid::graded(0.5, 8, 2.0);
    auto grid = SpaceTimeGrid::make(1, alpha, tg, vec({0.2}), 0.3, 5.2);
    auto z = assemble_Z(op, alpha, grid, vec({0.2}));
    CHECK(z.residual_norm <= 1e-6);
    CHECK(sup_norm(z.values_v) > 0.0);
    double zmax = 0.0, zmin = 0.0;
    for (int i = 0; i < grid.time.size(); ++i)
        for (int j = 0; j < grid.lattice_size(); ++j) {
            CHECK(z.values[i][j] == z.values_parametrix[i][j] + z.values_v[i][j]);
            if (i > 0) {
                zmax = std::max(zmax, z.values[i][j]);
                zmin = std::min(zmin, z.values[i][j]);
            }
        }
    CHECK(zmin >= -1e-5 * zmax);  // edge-of-lattice quadrature noise only

    auto psi = solve_Psi(op, alpha, grid, vec({0.2}));
    CHECK(psi.residual_norm <= 1e-6);
    CHECK(sup_norm(psi.values) > 0.0);
}

TEST_CASE("green matrix preserves constants for a variable coefficient") {
    // b = c = 0 and u0 = 1 make u = 1 the unique bounded solution; the
    // aggregated density route evaluates Int Z(t,x;xi) dxi on the grid.
    double alpha = 0.5;
    auto op = trig_op_1d();
    auto tg = fractional::TimeGrid::graded(1.0, 16, 2.0);
    auto grid = SpaceTimeGrid::make(1, alpha, tg, vec({0.3}), 0.25, 12.0);
    auto g = apply_M(op, alpha, grid, one);
    auto phi = solve_density(op, alpha, grid, g);
    CHECK(phi.residual_norm <= 1e-6);
    auto corr = convolve_Y0(op, alpha, grid, phi.values);
    auto zpart = parametrix_potential(op, alpha, grid, one);

    // evaluate away from the lattice edge, where the zero-extension of the
    // density is below the target accuracy
    double worst = 0.0;
    for (int i : {8, 12, 16})
        for (int j = 0; j < grid.lattice_size(); ++j) {
            if (grid.half_width() - std::abs(grid.node(j)[0] - 0.3) < 3.5) continue;
            worst = std::max(worst,
                             std::abs(zpart[i][j] + corr[i][j] - 1.0));
        }
    CHECK(worst <= 5e-3);

    // halving the number of time levels moves the center value only at the
    // discretization level
    auto tg2 = fractional::TimeGrid::graded(1.0, 8, 2.0);
    auto grid2 = SpaceTimeGrid::make(1, alpha, tg2, vec({0.3}), 0.25, 12.0);
    auto phi2 = solve_density(op, alpha, grid2, apply_M(op, alpha, grid2, one));
    auto u2 = convolve_Y0(op, alpha, grid2, phi2.values);
    auto z2 = parametrix_potential(op, alpha, grid2, one);
    int c1 = grid.lattice_size() / 2, c2 = grid2.lattice_size() / 2;
    double ua = zpart[16][c1] + corr[16][c1];
    double ub = z2[8][c2] + u2[8][c2];
    CHECK(std::abs(ua - ub) <= 2e-3);
}
