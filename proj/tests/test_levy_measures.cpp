#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "mapmart/errors.hpp"
#include "mapmart/levy_measure.hpp"
#include "mapmart/rng.hpp"
#include "oracles.hpp"

using namespace mapmart;

namespace {

std::vector<LevyMeasureSpec> sample_specs() {
    return {
        {2.0, JumpLaw::gaussian(0.0, 1.0)},
        {0.7, JumpLaw::gaussian(-0.4, 2.3)},
        {1.0, JumpLaw::uniform(1.0, 2.0)},
        {3.0, JumpLaw::uniform(-0.5, 0.5)},
        {1.5, JumpLaw::uniform(-2.0, 3.0)},
        {1.0, JumpLaw::two_point(1.0, 0.5, -1.0, 0.5)},
        {2.0, JumpLaw::two_point(2.0, 0.5, 0.1, 0.5)},
        {0.8, JumpLaw::exponential(1.3, 1.0)},
        {0.8, JumpLaw::exponential(2.0, -1.0)},
    };
}

} // namespace

TEST_CASE("scalar_moment matches the worked examples") {
    // lambda * E[J^2] with E[J^2] = 1 for the standard Gaussian.
    CHECK(scalar_moment({2.0, JumpLaw::gaussian(0.0, 1.0)}, 2) ==
          doctest::Approx(2.0).epsilon(1e-12));
    // Zero measure.
    CHECK(scalar_moment({0.0, JumpLaw::gaussian(5.0, 1.0)}, 3) == 0.0);
    // Symmetric two-point law, odd moment.
    CHECK(scalar_moment({1.0, JumpLaw::two_point(1.0, 0.5, -1.0, 0.5)}, 3) ==
          doctest::Approx(0.0));
}

TEST_CASE("scalar_moment agrees with the quadrature oracle") {
    for (const auto& spec : sample_specs()) {
        for (int k = 1; k <= 8; ++k) {
            const double got = scalar_moment(spec, k);
            const double want = oracles::scalar_moment(spec, k);
            CHECK(std::abs(got - want) <= 1e-9 * (1.0 + std::abs(want)));
        }
    }
}

TEST_CASE("big_jump_mean matches examples and oracle") {
    CHECK(big_jump_mean({1.0, JumpLaw::uniform(1.0, 2.0)}) ==
          doctest::Approx(1.5).epsilon(1e-12));
    CHECK(big_jump_mean({1.0, JumpLaw::uniform(-0.5, 0.5)}) == 0.0);
    CHECK(big_jump_mean({2.0, JumpLaw::two_point(2.0, 0.5, 0.1, 0.5)}) ==
          doctest::Approx(2.0).epsilon(1e-12));
    for (const auto& spec : sample_specs()) {
        const double got = big_jump_mean(spec);
        const double want = oracles::big_jump_mean(spec);
        CHECK(std::abs(got - want) <= 1e-9 * (1.0 + std::abs(want)));
        CHECK(small_jump_mean(spec) ==
              doctest::Approx(spec.intensity * spec.law.raw_moment(1) - got));
    }
}

TEST_CASE("joint_moment matches the worked examples") {
    // lambda E[J^2]/2 for U(x) = x/2 under the standard Gaussian.
    CHECK(joint_moment({1.0, JumpLaw::gaussian(0.0, 1.0)},
                       TriggeredJumpLaw::deterministic(0.5), 1, 1) ==
          doctest::Approx(0.5).epsilon(1e-12));
    // Independent triggered law with mean zero factorizes to zero.
    CHECK(joint_moment({3.0, JumpLaw::uniform(1.0, 2.0)},
                       TriggeredJumpLaw::independent(
                           JumpLaw::two_point(1.0, 0.5, -1.0, 0.5)),
                       1, 0) == doctest::Approx(0.0));
    // E[J^2] = (2^3 - 1)/3 = 7/3 for Uniform(1,2), U(x) = x.
    CHECK(joint_moment({1.0, JumpLaw::uniform(1.0, 2.0)},
                       TriggeredJumpLaw::deterministic(1.0), 2, 0) ==
          doctest::Approx(7.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("joint_moment agrees with nested quadrature for every kind") {
    const std::vector<TriggeredJumpLaw> laws = {
        TriggeredJumpLaw::deterministic(0.5),
        TriggeredJumpLaw::deterministic(-1.3),
        TriggeredJumpLaw::affine(0.4, -0.2, 0.7),
        TriggeredJumpLaw::affine(1.0, 0.0, 0.0),
        TriggeredJumpLaw::independent(JumpLaw::gaussian(0.3, 0.8)),
    };
    const std::vector<LevyMeasureSpec> mods = {
        {1.0, JumpLaw::uniform(1.0, 2.0)},
        {2.0, JumpLaw::gaussian(0.1, 0.9)},
        {0.5, JumpLaw::two_point(2.0, 0.7, -0.5, 0.3)},
    };
    for (const auto& mod : mods)
        for (const auto& u : laws)
            for (int k = 0; k <= 4; ++k)
                for (int l = 0; l <= 4 - k; ++l) {
                    if (k + l == 0) continue;
                    const double got = joint_moment(mod, u, k, l);
                    const double want = oracles::joint_moment(mod, u, k, l);
                    CHECK(std::abs(got - want) <=
                          1e-9 * (1.0 + std::abs(want)));
                }
}

TEST_CASE("joint_moment at k = 0 collapses to scalar_moment") {
    const LevyMeasureSpec mod{1.7, JumpLaw::gaussian(0.2, 1.1)};
    const auto u = TriggeredJumpLaw::affine(0.5, 0.1, 0.3);
    for (int l = 1; l <= 6; ++l)
        CHECK(joint_moment(mod, u, 0, l) == doctest::Approx(scalar_moment(mod, l)));
}

TEST_CASE("moment table invariants") {
    const LevyMeasureSpec nu{2.0, JumpLaw::gaussian(0.3, 1.2)};
    const auto table = MomentTable::for_measure(nu, 4);

    SUBCASE("even moments are nonnegative") {
        for (int k = 2; k <= 8; k += 2) CHECK(table.m(k) >= 0.0);
    }
    SUBCASE("zero intensity zeroes the table") {
        const auto z = MomentTable::for_measure({0.0, nu.law}, 4);
        for (int k = 1; k <= 8; ++k) CHECK(z.m(k) == 0.0);
        CHECK(z.big_jump_mean == 0.0);
    }
    SUBCASE("Hankel matrix of moments is positive semidefinite") {
        // [m_{i+j}] is the Gram matrix of monomials under x^2 nu(dx).
        for (const auto& spec : sample_specs()) {
            const auto t = MomentTable::for_measure(spec, 4);
            Eigen::MatrixXd h(4, 4);
            for (int i = 1; i <= 4; ++i)
                for (int j = 1; j <= 4; ++j) h(i - 1, j - 1) = t.m(i + j);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10 * h.trace());
        }
    }
    SUBCASE("Cauchy-Schwarz across the joint table") {
        const auto u = TriggeredJumpLaw::affine(0.5, 0.0, 0.4);
        const auto jt = MomentTable::for_modulator(nu, u, 4);
        CHECK(jt.c(1, 1) * jt.c(1, 1) <= jt.c(2, 0) * jt.m(2) * (1.0 + 1e-12));
    }
}

TEST_CASE("order guards") {
    const LevyMeasureSpec nu{1.0, JumpLaw::gaussian(0.0, 1.0)};
    CHECK_THROWS_AS(scalar_moment(nu, 0), SchemaError);
    CHECK_THROWS_AS(scalar_moment(nu, kMaxMomentOrder + 1), SchemaError);
    CHECK_THROWS_AS(joint_moment(nu, TriggeredJumpLaw::deterministic(1.0), 0, 0),
                    SchemaError);
    CHECK_THROWS_AS(MomentTable::for_measure(nu, 7), SchemaError);
    const auto table = MomentTable::for_measure(nu, 2);
    CHECK_THROWS_AS(table.m(5), SchemaError);
    CHECK_THROWS_AS(table.c(1, 1), SchemaError); // joint not built
}

TEST_CASE("parameter validation is named") {
    CHECK(!JumpLaw::uniform(2.0, 1.0).check().empty());
    CHECK(!JumpLaw::two_point(1.0, 0.7, -1.0, 0.7).check().empty());
    CHECK(!JumpLaw::exponential(-1.0, 1.0).check().empty());
    CHECK(!JumpLaw::exponential(1.0, 0.5).check().empty());
    CHECK(JumpLaw::gaussian(0.0, 1.0).check().empty());
    LevyMeasureSpec bad{-1.0, JumpLaw::gaussian(0.0, 1.0)};
    const auto errs = bad.check();
    REQUIRE(!errs.empty());
    CHECK(errs[0] == "negative-intensity");
}

TEST_CASE("sampling matches the law moments") {
    CounterRng rng = CounterRng::derive(99, 0, 0);
    const std::size_t n = 40000;

    SUBCASE("gaussian") {
        const auto law = JumpLaw::gaussian(0.3, 1.2);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += law.sample(rng);
        CHECK(std::abs(acc / n - 0.3) < 3.0 * 1.2 / std::sqrt(double(n)));
    }
    SUBCASE("negative exponential stays negative") {
        const auto law = JumpLaw::exponential(2.0, -1.0);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = law.sample(rng);
            CHECK(x <= 0.0);
            acc += x;
        }
        CHECK(std::abs(acc / n + 0.5) < 3.0 * 0.5 / std::sqrt(double(n)));
    }
    SUBCASE("two-point hits only its atoms") {
        const auto law = JumpLaw::two_point(2.0, 0.25, -0.5, 0.75);
        std::size_t hi = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = law.sample(rng);
            CHECK((x == 2.0 || x == -0.5));
            if (x == 2.0) ++hi;
        }
        CHECK(std::abs(double(hi) / n - 0.25) <
              3.0 * std::sqrt(0.25 * 0.75 / double(n)));
    }
    SUBCASE("triggered affine conditional moments") {
        const auto u = TriggeredJumpLaw::affine(0.4, -0.2, 0.7);
        const double x = 1.7;
        double acc = 0.0, acc2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = u.sample(x, rng);
            acc += v;
            acc2 += v * v;
        }
        CHECK(std::abs(acc / n - u.cond_moment(1, x)) <
              3.0 * 0.7 / std::sqrt(double(n)));
        CHECK(std::abs(acc2 / n - u.cond_moment(2, x)) < 0.05);
    }
}
