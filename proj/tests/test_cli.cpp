// Drives the installed binary through popen and checks that its results
// coincide with direct library calls, and that the exit-code contract holds.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "frdiff/hfun.hpp"
#include "frdiff/io.hpp"
#include "frdiff/kernels.hpp"
#include "frdiff/solver.hpp"
#include "json.hpp"

using namespace frdiff;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    RunResult r;
    std::string cmd = std::string(FRDIFF_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("kernel subcommand reproduces z0_eval exactly") {
    auto r = run("kernel --alpha 0.5 --dim 1 --t 1.0 --x 0.3");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);

    auto op = kernels::SPDOperator::identity(1);
    kernels::KernelQuery q;
    q.alpha = 0.5;
    q.t = 1.0;
    q.x = Eigen::VectorXd::Constant(1, 0.3);
    CHECK(j["value"].get<double>() == kernels::z0_eval(op, q));

    auto ry = run("kernel --alpha 0.5 --dim 1 --t 1.0 --x 0.3 --source --deriv 1");
    REQUIRE(ry.code == 0);
    q.m = {1};
    CHECK(nlohmann::json::parse(ry.out)["value"].get<double>() ==
          kernels::y0_derivative(op, q));
}

TEST_CASE("hfun subcommand reproduces hfun_eval exactly") {
    auto r = run("hfun --family y --dim 2 --alpha 0.5 --z 0.1");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    auto res = specfun::hfun_eval(specfun::HFunctionSpec::y_spec(2, 0.5), 0.1);
    CHECK(j["value"].get<double>() == res.value);
    CHECK(j["regime"].get<std::string>() == "series");
}

TEST_CASE("exit-code contract: 2 on invalid input and unknown flags") {
    auto bad_alpha = run("kernel --alpha 1.2 --dim 1 --t 1.0 --x 0.3");
    CHECK(bad_alpha.code == 2);
    CHECK(bad_alpha.out.find("alpha") != std::string::npos);

    auto unknown = run("kernel --bogus 1");
    CHECK(unknown.code == 2);
    CHECK(unknown.out.find("--bogus") != std::string::npos);

    CHECK(run("").code == 2);  // subcommand required
    CHECK(run("--help").code == 0);
}

TEST_CASE("verify subcommand: passing suite exits 0 and honors --seed") {
    auto r = run("verify --suite lemma1 --seed 99");
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS") != std::string::npos);

    auto rep = tmp_path("frdiff_cli_report.json");
    auto r2 = run("verify --suite lemma1 --seed 99 --out " + rep);
    CHECK(r2.code == 0);
    auto j = nlohmann::json::parse(std::ifstream(rep));
    REQUIRE(j.size() == 2);
    CHECK(j[0]["seed"].get<unsigned>() == 99);
    CHECK(j[0]["pass"].get<bool>());
}

TEST_CASE("solve subcommand equals the library call bit for bit") {
    auto cfg_path = tmp_path("frdiff_cli_cfg.json");
    auto out_path = tmp_path("frdiff_cli_sol.json");
    {
        std::ofstream f(cfg_path);
        f << R"({"alpha": 0.5, "T": 0.25, "n": 1,
                 "u0": {"family": "constant", "value": 1.0},
                 "grid": {"time_levels": 8, "h": 0.25, "half_width": 0.75},
                 "output_path": ")"
          << out_path << R"("})";
    }
    auto r = run("solve --config " + cfg_path);
    REQUIRE(r.code == 0);

    auto cfg = io::load_config(cfg_path);
    auto sol = solver::solve_cauchy(cfg.problem(), cfg.request());
    auto recs = io::read_output_json(out_path);
    REQUIRE((int)recs.size() == sol.grid.time.size() * sol.grid.lattice_size());
    size_t k = 0;
    for (int i = 0; i < sol.grid.time.size(); ++i)
        for (int j = 0; j < sol.grid.lattice_size(); ++j, ++k) {
            CHECK(recs[k].t == sol.grid.time.nodes[i]);
            CHECK(recs[k].value == sol.u[i][j]);
            CHECK(recs[k].error_estimate == sol.error_estimate);
        }
}
