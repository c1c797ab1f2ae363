#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "l1fix/l1fix.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace l1fix;

namespace {

const AssumptionReport* find_report(const Certificate& cert, const std::string& id,
                                    const std::string& subject) {
    for (const auto& r : cert.assumptions)
        if (r.id == id && r.subject == subject) return &r;
    return nullptr;
}

} // namespace

TEST_CASE("bundled certificate constants match their closed forms") {
    const BuiltProblem& bp = fixtures::bundled_small();
    CHECK(contraction_constant(bp.spec) == Catch::Approx(oracle::gamma_bundled).margin(1e-12));

    const BallRadius ball = invariant_ball_radius(bp.spec);
    REQUIRE(ball.ok);
    CHECK(ball.C == Catch::Approx(oracle::C_bundled).epsilon(1e-9));
    CHECK(ball.r == Catch::Approx(oracle::r_bundled).epsilon(1e-9));
    CHECK(ball.C + ball.gamma * ball.r == Catch::Approx(ball.r).epsilon(1e-14));
}

TEST_CASE("contraction constant rejects ill-posed inputs") {
    ProblemSpec s = fixtures::bundled_small().spec;
    s.T_op.deviation.slope_min = 0.0;
    CHECK_THROWS_AS(contraction_constant(s), input_error);
    s.T_op.deviation.slope_min = 2.0;
    s.g.envelope_slope = -0.1;
    CHECK_THROWS_AS(contraction_constant(s), input_error);
}

TEST_CASE("raising the integrand slope to one pushes gamma past the line") {
    ProblemDefinition def = taoudi_example_definition();
    def.u.envelope.slope = 1.0;
    def.numerics.cells = 256;
    const BuiltProblem bp = build_problem(def);
    // 1/8 + 1 * (2 / sqrt(e)), no longer a contraction
    const double expect = 0.125 + 2.0 / std::sqrt(std::exp(1.0));
    CHECK(contraction_constant(bp.spec) == Catch::Approx(expect).margin(1e-12));
    CHECK(contraction_constant(bp.spec) > 1.0);
    CHECK_FALSE(invariant_ball_radius(bp.spec).ok);

    CertifyOptions opt;
    opt.seed = 11;
    opt.field_samples = 100;
    opt.pair_samples = 5;
    const Certificate cert = certify(bp.spec, bp.grid, bp.witness, opt);
    CHECK_FALSE(cert.certified);
}

TEST_CASE("ball radius is withheld when the constants do not contract") {
    ProblemSpec s = fixtures::bundled_small().spec;
    s.g.envelope_slope = 8.0;  // gamma = 8/2 + ... > 1
    const BallRadius ball = invariant_ball_radius(s);
    CHECK(ball.gamma > 1.0);
    CHECK_FALSE(ball.ok);
}

TEST_CASE("bundled example certifies end to end") {
    const BuiltProblem& bp = fixtures::bundled_small();
    CertifyOptions opt;
    opt.seed = 42;
    Certificate cert = certify(bp.spec, bp.grid, bp.witness, opt);

    CHECK(cert.certified);
    CHECK(cert.gamma_ok);
    CHECK(cert.gamma == Catch::Approx(oracle::gamma_bundled).margin(1e-12));
    for (const auto& rep : cert.assumptions) {
        INFO(rep.id << " / " << rep.subject << ": " << to_string(rep.status) << " " << rep.notes);
        CHECK(rep.status != CheckStatus::falsified);
    }

    const AssumptionReport* a4 = find_report(cert, "A4", "u regularity in (s, x)");
    REQUIRE(a4 != nullptr);
    CHECK(a4->status == CheckStatus::unverifiable);

    const AssumptionReport* a6 = find_report(cert, "A6", "kernel operator norm");
    REQUIRE(a6 != nullptr);
    CHECK(a6->status == CheckStatus::declared_by_user);

    const AssumptionReport* a3 = find_report(cert, "A3", "B separate contraction");
    REQUIRE(a3 != nullptr);
    CHECK(a3->status == CheckStatus::verified_by_sampling);
    CHECK(a3->samples > 0);
}

TEST_CASE("overdeclared constants are publicly falsified") {
    BuiltProblem bp = build_problem(overdeclared_example_definition());
    CertifyOptions opt;
    opt.seed = 7;
    opt.pair_samples = 20;
    Certificate cert = certify(bp.spec, bp.grid, bp.witness, opt);

    CHECK_FALSE(cert.certified);
    CHECK(cert.gamma > 1.0);
    CHECK_FALSE(cert.gamma_ok);

    const AssumptionReport* f_env = find_report(cert, "A1", "f growth envelope");
    REQUIRE(f_env != nullptr);
    CHECK(f_env->status == CheckStatus::falsified);
    REQUIRE(f_env->witness.has_value());
    CHECK(f_env->witness->lhs > f_env->witness->rhs + f_env->witness->slack);

    const AssumptionReport* a7 = find_report(cert, "A7", "contraction constant below one");
    REQUIRE(a7 != nullptr);
    CHECK(a7->status == CheckStatus::falsified);
}

TEST_CASE("missing contraction witness downgrades A3 to unverifiable") {
    const BuiltProblem& bp = fixtures::bundled_small();
    CertifyOptions opt;
    opt.seed = 3;
    opt.field_samples = 50;
    opt.function_samples = 4;
    opt.pair_samples = 4;
    Certificate cert = certify(bp.spec, bp.grid, std::nullopt, opt);
    const AssumptionReport* a3 = find_report(cert, "A3", "B separate contraction");
    REQUIRE(a3 != nullptr);
    CHECK(a3->status == CheckStatus::unverifiable);
    CHECK(cert.certified);  // unverifiable is disclosed, not failed
}

TEST_CASE("randomized certificate invariants hold across seeded trials") {
    for (const auto& r : props::certify_properties(1000, 3)) {
        INFO(r.module << " / " << r.name << " [" << r.trials << " trials]: " << r.detail);
        CHECK(r.pass);
    }
}
