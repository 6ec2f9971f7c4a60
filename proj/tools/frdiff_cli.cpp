// Command-line front end: kernel and H-function point queries, Green-matrix
// assembly, Cauchy-problem runs and the property-check suites. Exit codes:
// 0 success, 1 failed check or runtime failure, 2 invalid input.
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "frdiff/errors.hpp"
#include "frdiff/hfun.hpp"
#include "frdiff/io.hpp"
#include "frdiff/kernels.hpp"
#include "frdiff/levi.hpp"
#include "frdiff/solver.hpp"
#include "frdiff/verify.hpp"

namespace {

using namespace frdiff;

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(const std::vector<io::OutputRecord>& records, const io::Metadata& meta,
          const std::string& out, const std::string& format) {
    if (!out.empty()) {
        io::write_output(records, meta, out, format);
        return;
    }
    // stdout: one JSON record per line
    for (const auto& r : records) {
        std::string xs;
        for (size_t d = 0; d < r.x.size(); ++d)
            xs += (d ? ", " : "") + num17(r.x[d]);
        std::printf("{\"t\": %s, \"x\": [%s], \"value\": %s, \"error_estimate\": %s}\n",
                    num17(r.t).c_str(), xs.c_str(), num17(r.value).c_str(),
                    num17(r.error_estimate).c_str());
    }
}

struct KernelArgs {
    double alpha = 0.5, t = 1.0, cross = 0.0;
    int dim = 1;
    std::vector<double> x, a_diag;
    std::vector<int> deriv;
    bool source = false;
    std::string out, format = "json";
};

int run_kernel(const KernelArgs& a) {
    Eigen::MatrixXd mat = Eigen::MatrixXd::Identity(a.dim, a.dim);
    if (!a.a_diag.empty()) {
        if ((int)a.a_diag.size() != a.dim)
            throw DomainError("--a-diag needs one entry per dimension");
        for (int d = 0; d < a.dim; ++d) mat(d, d) = a.a_diag[d];
    }
    if (a.cross != 0.0) {
        if (a.dim < 2) throw DomainError("--a-cross needs dim >= 2");
        mat(0, 1) = mat(1, 0) = a.cross;
    }
    auto op = kernels::SPDOperator::make(mat);
    kernels::KernelQuery q;
    q.alpha = a.alpha;
    q.t = a.t;
    if ((int)a.x.size() != a.dim) throw DomainError("--x needs one entry per dimension");
    q.x = Eigen::Map<const Eigen::VectorXd>(a.x.data(), a.dim);
    q.m = a.deriv;
    q.validate(a.dim);
    double v;
    if (q.order() == 0)
        v = a.source ? kernels::y0_eval(op, q) : kernels::z0_eval(op, q);
    else
        v = a.source ? kernels::y0_derivative(op, q) : kernels::z0_derivative(op, q);
    io::OutputRecord rec{a.t, a.x, v, 0.0};
    io::Metadata meta{a.alpha, a.dim,
                      mat.isIdentity(0.0) ? "identity"
                      : mat.isDiagonal(0.0) ? "diagonal"
                                            : "anisotropic",
                      io::version()};
    emit({rec}, meta, a.out, a.format);
    return 0;
}

struct HfunArgs {
    std::string family = "z";
    int dim = 1;
    double alpha = 0.5, z = 1.0;
};

int run_hfun(const HfunArgs& a) {
    auto spec = a.family == "y" ? specfun::HFunctionSpec::y_spec(a.dim, a.alpha)
                                : specfun::HFunctionSpec::z_spec(a.dim, a.alpha);
    auto r = specfun::hfun_eval(spec, a.z);
    const char* regime = r.regime == specfun::Regime::series      ? "series"
                         : r.regime == specfun::Regime::asymptotic ? "asymptotic"
                                                                   : "contour";
    std::printf("{\"z\": %s, \"value\": %s, \"abs_error_estimate\": %s, \"regime\": \"%s\"}\n",
                num17(a.z).c_str(), num17(r.value).c_str(),
                num17(r.abs_error_estimate).c_str(), regime);
    return 0;
}

struct GreenArgs {
    double alpha = 0.5, T = 0.5, grading = 2.0, h = 0.25, half_width = 0.0;
    double a_base = 1.0, a_amp = 0.0, a_freq = 1.0;
    int dim = 1, levels = 8;
    std::vector<double> xi;
    std::string out, format = "csv";
};

int run_green(const GreenArgs& a) {
    auto field = a.a_amp == 0.0
                     ? levi::CoefficientField::constant(a.a_base)
                     : levi::CoefficientField::trig(a.a_base, a.a_amp, a.a_freq);
    auto op = levi::OperatorSpec::isotropic(a.dim, field);
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(a.dim);
    if (!a.xi.empty()) {
        if ((int)a.xi.size() != a.dim)
            throw DomainError("--xi needs one entry per dimension");
        xi = Eigen::Map<const Eigen::VectorXd>(a.xi.data(), a.dim);
    }
    auto tg = fractional::TimeGrid::graded(a.T, a.levels, a.grading);
    auto grid = levi::SpaceTimeGrid::make(a.dim, a.alpha, tg, xi, a.h, a.half_width);
    auto z = levi::assemble_Z(op, a.alpha, grid, xi);
    std::vector<io::OutputRecord> recs;
    for (int i = 1; i < grid.time.size(); ++i)
        for (int j = 0; j < grid.lattice_size(); ++j) {
            Eigen::VectorXd xn = grid.node(j);
            recs.push_back({grid.time.nodes[i],
                            std::vector<double>(xn.data(), xn.data() + a.dim),
                            z.values[i][j], z.residual_norm});
        }
    io::Metadata meta{a.alpha, a.dim, a.a_amp == 0.0 ? "constant" : "trig",
                      io::version()};
    emit(recs, meta, a.out, a.format);
    return 0;
}

int run_solve(const std::string& config_path, std::string out, std::string format) {
    auto cfg = io::load_config(config_path);
    if (out.empty()) out = cfg.output_path;
    if (format.empty()) format = cfg.output_format;
    levi::SolveOptions opt;
    opt.tolerance = cfg.tolerance;
    opt.max_iterations = cfg.max_iterations;
    auto sol = solver::solve_cauchy(cfg.problem(), cfg.request(), opt);
    std::vector<io::OutputRecord> recs;
    for (int i = 0; i < sol.grid.time.size(); ++i)
        for (int j = 0; j < sol.grid.lattice_size(); ++j) {
            Eigen::VectorXd xn = sol.grid.node(j);
            recs.push_back({sol.grid.time.nodes[i],
                            std::vector<double>(xn.data(), xn.data() + cfg.n),
                            sol.u[i][j], sol.error_estimate});
        }
    io::Metadata meta{cfg.alpha, cfg.n, cfg.op.type, io::version()};
    emit(recs, meta, out, format);
    return 0;
}

int run_verify(const std::string& suite, unsigned seed, const std::string& out) {
    auto reports = verify::run_suite(suite, seed);
    bool failed = false;
    for (const auto& r : reports) {
        std::printf("%-44s %s%s measured=%.3e bound=%.3e%s%s\n",
                    r.check_name.c_str(), r.pass ? "PASS" : "FAIL",
                    r.supported ? "" : " (unsupported)", r.measured,
                    r.bound_or_target, r.note.empty() ? "" : "  ",
                    r.note.c_str());
        failed = failed || (r.supported && !r.pass);
    }
    if (!out.empty()) {
        std::string body = "[";
        for (size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            body += std::string(i ? ",\n " : "\n ") + "{\"check_name\": \"" +
                    r.check_name + "\", \"alpha\": " + num17(r.alpha) +
                    ", \"n\": " + std::to_string(r.n) + ", \"operator_family\": \"" +
                    r.operator_family + "\", \"measured\": " + num17(r.measured) +
                    ", \"bound_or_target\": " + num17(r.bound_or_target) +
                    ", \"pass\": " + (r.pass ? "true" : "false") +
                    ", \"supported\": " + (r.supported ? "true" : "false") +
                    ", \"seed\": " + std::to_string(r.seed) + ", \"note\": \"" +
                    r.note + "\", \"runtime_seconds\": " + num17(r.runtime_seconds) +
                    "}";
        }
        body += "\n]\n";
        io::Metadata meta{0.0, 0, "suite", io::version()};
        std::string tmp = out + ".tmp";
        FILE* fp = std::fopen(tmp.c_str(), "wb");
        if (!fp) throw Error("cannot open " + tmp);
        std::fputs(body.c_str(), fp);
        std::fclose(fp);
        if (std::rename(tmp.c_str(), out.c_str()) != 0)
            throw Error("rename failed: " + out);
        (void)meta;
    }
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fundamental solutions of time-fractional diffusion equations"};
    app.require_subcommand(1);

    KernelArgs ka;
    auto* kernel = app.add_subcommand("kernel", "evaluate Z0 / Y0 at a point");
    kernel->add_option("--alpha", ka.alpha, "fractional order in (0,1)");
    kernel->add_option("--dim", ka.dim, "space dimension 1..3");
    kernel->add_option("--t", ka.t, "time > 0");
    kernel->add_option("--x", ka.x, "spatial point, dim entries")->expected(-1);
    kernel->add_option("--a-diag", ka.a_diag, "diagonal of a")->expected(-1);
    kernel->add_option("--a-cross", ka.cross, "a(0,1) = a(1,0) entry");
    kernel->add_option("--deriv", ka.deriv, "derivative multi-index")->expected(-1);
    kernel->add_flag("--source", ka.source, "evaluate Y0 instead of Z0");
    kernel->add_option("--out", ka.out, "output file (default stdout)");
    kernel->add_option("--format", ka.format, "json or csv");

    HfunArgs ha;
    auto* hfun = app.add_subcommand("hfun", "evaluate a radial H-function profile");
    hfun->add_option("--family", ha.family, "z or y");
    hfun->add_option("--dim", ha.dim, "profile dimension 1..5");
    hfun->add_option("--alpha", ha.alpha, "fractional order in (0,1)");
    hfun->add_option("--z", ha.z, "argument > 0")->required();

    GreenArgs ga;
    auto* green = app.add_subcommand("green", "assemble a Green-matrix column");
    green->add_option("--alpha", ga.alpha, "fractional order in (0,1)");
    green->add_option("--dim", ga.dim, "space dimension");
    green->add_option("--T", ga.T, "time horizon");
    green->add_option("--levels", ga.levels, "time levels");
    green->add_option("--grading", ga.grading, "time grading exponent");
    green->add_option("--step", ga.h, "lattice spacing");
    green->add_option("--half-width", ga.half_width, "lattice half width (0 = minimal)");
    green->add_option("--xi", ga.xi, "source point")->expected(-1);
    green->add_option("--a-base", ga.a_base, "isotropic coefficient base");
    green->add_option("--a-amp", ga.a_amp, "trig perturbation amplitude");
    green->add_option("--a-freq", ga.a_freq, "trig perturbation frequency");
    green->add_option("--out", ga.out, "output file (default stdout)");
    green->add_option("--format", ga.format, "json or csv");

    std::string config_path, solve_out, solve_format;
    auto* solve = app.add_subcommand("solve", "solve a Cauchy problem from a config");
    solve->add_option("--config", config_path, "JSON problem description")->required();
    solve->add_option("--out", solve_out, "override the configured output path");
    solve->add_option("--format", solve_format, "override the configured format");

    std::string suite = "all", verify_out;
    unsigned seed = frdiff::verify::kDefaultSeed;
    auto* verify = app.add_subcommand("verify", "run a property-check suite");
    verify->add_option("--suite", suite,
                       "normalization, zero_mass, lemma1, envelopes, "
                       "nonnegativity, msd or all");
    verify->add_option("--seed", seed, "seed for randomized checks");
    verify->add_option("--out", verify_out, "write the JSON report here");

    try {
        app.parse(argc, argv);
        if (*kernel) return run_kernel(ka);
        if (*hfun) return run_hfun(ha);
        if (*green) return run_green(ga);
        if (*solve) return run_solve(config_path, solve_out, solve_format);
        if (*verify) return run_verify(suite, seed, verify_out);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\nrun with --help for usage\n", e.what());
        return 2;
    } catch (const frdiff::DomainError& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return 2;
    } catch (const frdiff::UnsupportedError& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return 2;
    } catch (const frdiff::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
