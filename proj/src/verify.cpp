// Property-check harness: mass identities, the path inequality of the
// anisotropy distance, two-grid envelope calibration, nonnegativity and the
// subdiffusive moment law, each wrapped into a CheckReport. Failures are
// reported, never thrown; out-of-scope requests come back with supported =
// false.
#include "frdiff/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "frdiff/errors.hpp"
#include "frdiff/gamma.hpp"
#include "frdiff/kernels.hpp"
#include "frdiff/levi.hpp"
#include "frdiff/quadrature.hpp"
#include "frdiff/solver.hpp"

namespace frdiff::verify {

namespace {

double now_seconds() {
    using C = std::chrono::steady_clock;
    return std::chrono::duration<double>(C::now().time_since_epoch()).count();
}

std::string family_of(const Eigen::MatrixXd& a) {
    if (a.isIdentity(0.0)) return "identity";
    if (a.isDiagonal(0.0)) return "diagonal";
    return "anisotropic";
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

double surface_area(int n) {
    return 2.0 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);
}

// Int f over R^n reduced to the radial direction of the metric a^{1/2}.
double metric_radial_integral(const kernels::SPDOperator& op, double extra_power,
                              double rmax,
                              const std::function<double(const Eigen::VectorXd&)>& eval) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.a);
    Eigen::MatrixXd sqrt_a = es.operatorSqrt();
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(op.n);
    e1[0] = 1.0;
    auto f = [&](double r) {
        return std::pow(r, op.n - 1 + extra_power) * eval(sqrt_a * (r * e1));
    };
    auto br = quad::geometric_breaks(0.0, rmax, 70, 1.15);
    return std::sqrt(op.det_a) * surface_area(op.n) * quad::gl_panels(f, br, 10);
}

CheckReport mass_check(const Eigen::MatrixXd& a, double alpha,
                       const std::vector<double>& t_list, bool source) {
    CheckReport r;
    r.check_name = std::string(source ? "zero_mass" : "normalization") + " n=" +
                   std::to_string((int)a.rows()) + " " + family_of(a) +
                   " alpha=" + fmt(alpha);
    r.alpha = alpha;
    r.n = (int)a.rows();
    r.operator_family = family_of(a);
    r.bound_or_target = 1e-6;
    double t0 = now_seconds();
    if (r.n > 3 || r.n < 1) {
        r.supported = false;
        r.note = "dimension outside the implemented range 1..3";
        r.runtime_seconds = now_seconds() - t0;
        return r;
    }
    auto op = kernels::SPDOperator::make(a);
    double worst = 0.0, worst_diag = 0.0;
    for (double t : t_list) {
        double rmax = 20.0 * std::pow(t, alpha / 2.0);
        kernels::KernelQuery q;
        q.alpha = alpha;
        q.t = t;
        double mass = metric_radial_integral(op, 0.0, rmax, [&](const Eigen::VectorXd& x) {
            q.x = x;
            return source ? kernels::y0_eval(op, q) : kernels::z0_eval(op, q);
        });
        double target = source ? 0.0 : 1.0;
        worst = std::max(worst, std::abs(mass - target));
        if (source) {
            double law = std::pow(t, alpha - 1.0) * rgamma(alpha);
            worst_diag = std::max(worst_diag, std::abs(mass - law) / law);
        }
    }
    r.measured = worst;
    r.pass = worst <= r.bound_or_target;
    if (source)
        r.note = "mass deviates from t^{alpha-1}/Gamma(alpha) by " +
                 fmt(worst_diag) + " relative";
    r.runtime_seconds = now_seconds() - t0;
    return r;
}

// conformance sweep in the similarity variable; see the calibration protocol
// notes in the kernel tests
double conformance_ratio(const std::function<double(double)>& ratio_at,
                         double phase) {
    std::vector<double> radii;
    for (double rr = 0.05 * phase; rr < 5.0; rr *= 1.06) radii.push_back(rr);
    for (double rr : {0.05, 0.9999, 1.0001, 4.9}) radii.push_back(rr);
    double worst = 0.0;
    for (double rr : radii) worst = std::max(worst, ratio_at(rr));
    return worst;
}

double rho_similarity(double alpha, double t, double r) {
    return std::pow(r / std::pow(t, alpha / 2.0), 1.0 / (1.0 - alpha / 2.0));
}

levi::OperatorSpec desk_op_1d() {
    return levi::OperatorSpec::isotropic(1, levi::CoefficientField::trig(1.0, 0.3, 1.0));
}

CheckReport envelope_zy(KernelId kernel, int n, double alpha, int m) {
    CheckReport r;
    r.alpha = alpha;
    r.n = n;
    r.operator_family = "identity";
    r.bound_or_target = 1.05;
    double t0 = now_seconds();
    if (n < 1 || n > 5 || m < 0 || m > 3) {
        r.supported = false;
        r.note = "branch not implemented";
        r.runtime_seconds = now_seconds() - t0;
        return r;
    }
    bool source = kernel == KernelId::Y0;
    r.check_name = std::string(source ? "envelope Y0" : "envelope Z0") + " n=" +
                   std::to_string(n) + " m=" + std::to_string(m) +
                   " alpha=" + fmt(alpha);
    auto op = kernels::SPDOperator::identity(n);
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n).normalized();
    kernels::KernelQuery q;
    q.alpha = alpha;
    q.t = 1.0;
    if (m > 0) {
        q.m.assign(n, 0);
        q.m[0] = m;  // one-axis derivative branch
    }
    auto ratio_at = [&](double rr) {
        double env = source ? kernels::envelope_y0(n, alpha, m, 1.0, rr)
                            : kernels::envelope_z0(n, alpha, m, 1.0, rr);
        if (env < 1e-280) return 0.0;
        q.x = rr * d;
        double v = m == 0 ? (source ? kernels::y0_eval(op, q) : kernels::z0_eval(op, q))
                          : (source ? kernels::y0_derivative(op, q)
                                    : kernels::z0_derivative(op, q));
        return std::abs(v) / env;
    };
    double c1 = conformance_ratio(ratio_at, 1.0);
    double c2 = conformance_ratio(ratio_at, 1.03);
    r.measured = std::max(c1 / c2, c2 / c1);
    r.pass = std::isfinite(c1) && c1 > 0.0 && r.measured <= r.bound_or_target;
    r.runtime_seconds = now_seconds() - t0;
    return r;
}

CheckReport envelope_m(double alpha) {
    CheckReport r;
    r.check_name = "envelope M n=1 alpha=" + fmt(alpha);
    r.alpha = alpha;
    r.n = 1;
    r.operator_family = "trig";
    r.bound_or_target = 1.05;
    double t0 = now_seconds();
    auto op = desk_op_1d();
    Eigen::VectorXd xi(1), x(1);
    xi[0] = 0.3;
    // shape t^{-alpha} |x - xi|^{gamma - 1} exp(-sigma rho), gamma = 1
    auto ratio_at = [&](double rr) {
        double env = std::exp(-0.5 * rho_similarity(alpha, 1.0, rr));
        if (env < 1e-280) return 0.0;
        x[0] = xi[0] + rr;
        return std::abs(levi::levi_M(op, alpha, 1.0, x, xi)) / env;
    };
    double c1 = conformance_ratio(ratio_at, 1.0);
    double c2 = conformance_ratio(ratio_at, 1.03);
    r.measured = std::max(c1 / c2, c2 / c1);
    r.pass = std::isfinite(c1) && c1 > 0.0 && r.measured <= r.bound_or_target;
    r.runtime_seconds = now_seconds() - t0;
    return r;
}

CheckReport envelope_q(double alpha) {
    CheckReport r;
    r.check_name = "envelope Q n=1 alpha=" + fmt(alpha);
    r.alpha = alpha;
    r.n = 1;
    r.operator_family = "trig";
    r.bound_or_target = 1.05;
    double t0 = now_seconds();
    auto op = desk_op_1d();
    // density envelope t^{alpha gamma / 2 - 1} times the n = 1 spatial
    // profile scale t^{-alpha/2}; gamma = 1 for the trig coefficients
    double power = alpha / 2.0 - 1.0 - alpha / 2.0;
    auto sup_conf = [&](double h, double xi0) {
        Eigen::VectorXd xi(1);
        xi[0] = xi0;
        auto tg = fractional::TimeGrid::graded(0.5, 8, 2.0);
        auto grid = levi::SpaceTimeGrid::make(1, alpha, tg, xi, h);
        auto q = levi::solve_Q(op, alpha, grid, xi);
        double worst = 0.0;
        for (int i = 1; i < grid.time.size(); ++i)
            for (int j = 0; j < grid.lattice_size(); ++j) {
                double t = grid.time.nodes[i];
                double rr = std::abs(grid.node(j)[0] - xi[0]);
                double env = std::pow(t, power) *
                             std::exp(-0.5 * rho_similarity(alpha, t, rr));
                if (env < 1e-280) continue;
                worst = std::max(worst, std::abs(q.values[i][j]) / env);
            }
        return worst;
    };
    // identical time levels so the first-level startup factor cancels; the
    // fresh grid halves the spacing and shifts the freezing point off the
    // coarse lattice
    double c1 = sup_conf(0.25, 0.3);
    double c2 = sup_conf(0.125, 0.3625);
    r.measured = c2 / c1;
    r.pass = std::isfinite(r.measured) && c1 > 0.0 && r.measured <= r.bound_or_target;
    r.runtime_seconds = now_seconds() - t0;
    return r;
}

}  // namespace

CheckReport check_normalization(const Eigen::MatrixXd& a, double alpha,
                                const std::vector<double>& t_list) {
    return mass_check(a, alpha, t_list, false);
}

CheckReport check_zero_mass(const Eigen::MatrixXd& a, double alpha,
                            const std::vector<double>& t_list) {
    return mass_check(a, alpha, t_list, true);
}

CheckReport check_lemma1(int sample_count, double beta, unsigned seed) {
    CheckReport r;
    r.check_name = "lemma1 beta=" + fmt(beta);
    r.n = 2;
    r.bound_or_target = 0.0;
    r.seed = seed;
    double t0 = now_seconds();
    if (!(beta > 0.0 && beta < 1.0) || sample_count < 1) {
        r.supported = false;
        r.note = "beta outside (0,1) or empty sample";
        r.runtime_seconds = now_seconds() - t0;
        return r;
    }
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_real_distribution<double> X(-2.0, 2.0);
    int violations = 0;
    auto leg = [&](double t, const Eigen::VectorXd& x, double tau,
                   const Eigen::VectorXd& y) { return kernels::rho(t, x, tau, y, beta); };
    for (int s = 0; s < sample_count; ++s) {
        double tau = U(rng), lam = tau + 0.01 + U(rng), t = lam + 0.01 + U(rng);
        Eigen::VectorXd x(2), y(2), xi(2);
        x << X(rng), X(rng);
        y << X(rng), X(rng);
        xi << X(rng), X(rng);
        if (s == 0) y = xi = x;  // degenerate collinear tuple
        if (leg(t, x, tau, xi) > leg(t, x, lam, y) + leg(lam, y, tau, xi) + 1e-12)
            ++violations;
    }
    r.measured = violations;
    r.pass = violations == 0;
    r.note = std::to_string(sample_count) + " samples";
    r.runtime_seconds = now_seconds() - t0;
    return r;
}

CheckReport check_envelopes(KernelId kernel, int n, double alpha, int m) {
    switch (kernel) {
        case KernelId::Z0:
        case KernelId::Y0:
            return envelope_zy(kernel, n, alpha, m);
        case KernelId::M:
        case KernelId::Q: {
            if (n != 1) {
                CheckReport r;
                r.check_name = "envelope defect kernel";
                r.n = n;
                r.alpha = alpha;
                r.supported = false;
                r.note = "defect-kernel envelopes are implemented for n = 1";
                return r;
            }
            return kernel == KernelId::M ? envelope_m(alpha) : envelope_q(alpha);
        }
    }
    throw DomainError("check_envelopes: unknown kernel id");
}

CheckReport check_nonnegativity(const std::string& which) {
    CheckReport r;
    r.check_name = "nonnegativity " + which;
    r.alpha = 0.5;
    r.bound_or_target = 1e-6;
    double t0 = now_seconds();
    double min_v = 0.0, max_v = 0.0;
    if (which == "constant") {
        r.operator_family = "identity";
        for (int n = 1; n <= 3; ++n) {
            auto op = kernels::SPDOperator::identity(n);
            Eigen::VectorXd d = Eigen::VectorXd::Ones(n).normalized();
            kernels::KernelQuery q;
            q.alpha = 0.5;
            for (double t : {0.25, 1.0})
                for (double rr = 0.05; rr < 6.0; rr *= 1.17) {
                    q.t = t;
                    q.x = rr * d;
                    double v = kernels::z0_eval(op, q);
                    min_v = std::min(min_v, v);
                    max_v = std::max(max_v, v);
                }
        }
        r.n = 3;
    } else if (which == "variable") {
        r.operator_family = "trig";
        r.n = 1;
        auto op = desk_op_1d();
        Eigen::VectorXd xi(1);
        xi[0] = 0.3;
        // uniform levels: the first-level peak width t1^{alpha/2} must stay
        // resolvable at spacing h, otherwise lattice interpolation of the
        // density leaks O(1e-6) undershoot into the far tail
        auto tg = fractional::TimeGrid::graded(0.5, 8, 1.0);
        auto grid = levi::SpaceTimeGrid::make(1, 0.5, tg, xi, 0.25);
        auto z = levi::assemble_Z(op, 0.5, grid, xi);
        for (int i = 1; i < grid.time.size(); ++i)
            for (int j = 0; j < grid.lattice_size(); ++j) {
                min_v = std::min(min_v, z.values[i][j]);
                max_v = std::max(max_v, z.values[i][j]);
            }
    } else if (which == "degenerate") {
        r.operator_family = "trig";
        r.n = 1;
        solver::CauchyProblem p;
        p.alpha = 0.5;
        p.T = 0.5;
        p.op = desk_op_1d();
        solver::GridRequest req;
        req.time_levels = 4;
        req.h = 0.5;
        req.half_width = 1.0;
        auto sol = solver::solve_cauchy(p, req);
        for (auto& row : sol.u)
            for (double v : row) {
                min_v = std::min(min_v, v);
                max_v = std::max(max_v, v);
            }
        r.measured = std::max(-min_v, max_v);  // zero data: solution must be 0
        r.pass = r.measured <= r.bound_or_target;
        r.runtime_seconds = now_seconds() - t0;
        return r;
    } else {
        r.supported = false;
        r.note = "unknown suite element";
        r.runtime_seconds = now_seconds() - t0;
        return r;
    }
    r.measured = max_v > 0.0 ? std::max(0.0, -min_v / max_v) : 0.0;
    r.pass = r.measured <= r.bound_or_target;
    r.runtime_seconds = now_seconds() - t0;
    return r;
}

CheckReport check_msd(const std::vector<double>& alpha_list,
                      const std::vector<double>& t_list, int n) {
    CheckReport r;
    r.check_name = "msd n=" + std::to_string(n) + " alpha=" + fmt(alpha_list.front());
    r.n = n;
    r.operator_family = "identity";
    r.bound_or_target = 1e-3;
    double t0 = now_seconds();
    if (n < 1 || n > 3 || alpha_list.empty() || t_list.size() < 2) {
        r.supported = false;
        r.note = "need n in 1..3 and at least two times";
        r.runtime_seconds = now_seconds() - t0;
        return r;
    }
    auto op = kernels::SPDOperator::identity(n);
    double worst = 0.0;
    std::string note;
    for (double alpha : alpha_list) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (double t : t_list) {
            kernels::KernelQuery q;
            q.alpha = alpha;
            q.t = t;
            double rmax = 20.0 * std::pow(t, alpha / 2.0);
            double m2 = metric_radial_integral(op, 2.0, rmax, [&](const Eigen::VectorXd& x) {
                q.x = x;
                return kernels::z0_eval(op, q);
            });
            double lx = std::log(t), ly = std::log(m2);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        double k = (double)t_list.size();
        double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        double inter = std::exp((sy - slope * sx) / k);
        double want = 2.0 * n * rgamma(1.0 + alpha);
        double err = std::max(std::abs(slope - alpha), std::abs(inter - want) / want);
        worst = std::max(worst, err);
        note += "alpha=" + fmt(alpha) + " slope=" + fmt(slope) + " ";
        r.alpha = alpha;
    }
    r.measured = worst;
    r.pass = worst <= r.bound_or_target;
    r.note = note;
    r.runtime_seconds = now_seconds() - t0;
    return r;
}

std::vector<CheckReport> run_suite(const std::string& name, unsigned seed) {
    std::vector<CheckReport> out;
    auto want = [&](const std::string& s) { return name == s || name == "all"; };
    Eigen::MatrixXd i1 = Eigen::MatrixXd::Identity(1, 1);
    Eigen::MatrixXd d2 = (Eigen::MatrixXd(2, 2) << 1, 0, 0, 4).finished();
    Eigen::MatrixXd f3 = Eigen::MatrixXd::Identity(3, 3);
    f3(0, 1) = f3(1, 0) = 0.3;
    Eigen::MatrixXd i4 = Eigen::MatrixXd::Identity(4, 4);
    bool known = false;
    if (want("normalization")) {
        known = true;
        out.push_back(check_normalization(d2, 0.5, {1.0}));
        out.push_back(check_normalization(i1, 0.8, {0.1}));
        out.push_back(check_normalization(f3, 0.3, {0.5}));
        out.push_back(check_normalization(i4, 0.5, {1.0}));
    }
    if (want("zero_mass")) {
        known = true;
        out.push_back(check_zero_mass(d2, 0.5, {1.0}));
        out.push_back(check_zero_mass(i1, 0.8, {0.1}));
        out.push_back(check_zero_mass(i4, 0.5, {1.0}));
    }
    if (want("lemma1")) {
        known = true;
        out.push_back(check_lemma1(100000, 0.25, seed));
        out.push_back(check_lemma1(100000, 0.9, seed));
    }
    if (want("envelopes")) {
        known = true;
        for (int m = 0; m <= 2; ++m)
            out.push_back(check_envelopes(KernelId::Z0, 3, 0.5, m));
        out.push_back(check_envelopes(KernelId::Y0, 1, 0.5, 2));
        out.push_back(check_envelopes(KernelId::M, 1, 0.5, 0));
        out.push_back(check_envelopes(KernelId::Q, 1, 0.5, 0));
    }
    if (want("nonnegativity")) {
        known = true;
        out.push_back(check_nonnegativity("constant"));
        out.push_back(check_nonnegativity("variable"));
        out.push_back(check_nonnegativity("degenerate"));
    }
    if (want("msd")) {
        known = true;
        out.push_back(check_msd({0.5}, {0.25, 0.5, 1.0, 2.0}, 1));
        out.push_back(check_msd({0.8}, {0.25, 0.5, 1.0, 2.0}, 2));
        out.push_back(check_msd({0.99}, {0.25, 0.5, 1.0, 2.0}, 1));
    }
    if (!known) throw DomainError("run_suite: unknown suite name");
    std::sort(out.begin(), out.end(), [](const CheckReport& a, const CheckReport& b) {
        return a.check_name < b.check_name;
    });
    return out;
}

}  // namespace frdiff::verify
