#include <cmath>

#include "doctest.h"
#include "frdiff/errors.hpp"
#include "frdiff/gamma.hpp"
#include "frdiff/verify.hpp"

using namespace frdiff;
using namespace frdiff::verify;

TEST_CASE("normalization check: anisotropic operator, metadata filled in") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
    a(0, 1) = a(1, 0) = 0.3;
    auto r = check_normalization(a, 0.6, {0.5, 2.0});
    CHECK(r.pass);
    CHECK(r.supported);
    CHECK(r.measured <= 1e-6);
    CHECK(r.n == 3);
    CHECK(r.alpha == 0.6);
    CHECK(r.operator_family == "anisotropic");
    CHECK(r.check_name.find("normalization") == 0);
    CHECK(r.runtime_seconds > 0.0);
}

TEST_CASE("dimension outside 1..3 comes back unsupported, not failed") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4);
    auto r = check_normalization(a, 0.5, {1.0});
    CHECK_FALSE(r.supported);
    CHECK_FALSE(r.pass);
    CHECK(r.note.find("1..3") != std::string::npos);
}

TEST_CASE("zero-mass check fails against the literal target and reports the "
          "power law it does satisfy") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(1, 1);
    auto r = check_zero_mass(a, 0.8, {0.1});
    CHECK(r.supported);
    CHECK_FALSE(r.pass);
    // the measured mass is not near zero: it equals t^{alpha-1}/Gamma(alpha)
    double law = std::pow(0.1, -0.2) * rgamma(0.8);
    CHECK(r.measured == doctest::Approx(law).epsilon(1e-10));
    CHECK(r.note.find("t^{alpha-1}/Gamma(alpha)") != std::string::npos);
}

TEST_CASE("path inequality sampling: clean, deterministic, validated input") {
    auto r1 = check_lemma1(5000, 0.25, 42);
    CHECK(r1.pass);
    CHECK(r1.measured == 0.0);
    CHECK(r1.seed == 42);
    CHECK(r1.note == "5000 samples");
    auto r2 = check_lemma1(5000, 0.25, 42);
    CHECK(r2.measured == r1.measured);

    auto bad = check_lemma1(10, 1.5, 42);
    CHECK_FALSE(bad.supported);
}

TEST_CASE("envelope calibration transfers to a fresh grid") {
    auto z = check_envelopes(KernelId::Z0, 1, 0.5, 0);
    CHECK(z.pass);
    CHECK(z.measured <= 1.05);

    auto q = check_envelopes(KernelId::Q, 1, 0.5, 0);
    CHECK(q.pass);
    CHECK(q.measured <= 1.05);

    auto off = check_envelopes(KernelId::M, 2, 0.5, 0);
    CHECK_FALSE(off.supported);
}

TEST_CASE("nonnegativity checks") {
    auto c = check_nonnegativity("constant");
    CHECK(c.pass);
    CHECK(c.measured == 0.0);

    auto v = check_nonnegativity("variable");
    CHECK(v.pass);
    CHECK(v.measured <= 1e-6);

    auto d = check_nonnegativity("degenerate");
    CHECK(d.pass);

    CHECK_FALSE(check_nonnegativity("bogus").supported);
}

TEST_CASE("second-moment fit recovers the exponent and prefactor") {
    auto r = check_msd({0.5}, {0.25, 1.0, 4.0}, 1);
    CHECK(r.pass);
    CHECK(r.measured <= 1e-3);
    CHECK(r.note.find("slope=0.5") != std::string::npos);

    auto bad = check_msd({0.5}, {1.0}, 1);
    CHECK_FALSE(bad.supported);
}

TEST_CASE("run_suite: sorted reports, unknown name rejected") {
    auto reps = run_suite("lemma1", 7);
    REQUIRE(reps.size() == 2);
    CHECK(reps[0].check_name < reps[1].check_name);
    for (auto& r : reps) {
        CHECK(r.pass);
        CHECK(r.seed == 7);
    }
    CHECK_THROWS_AS(run_suite("bogus"), DomainError);
}
