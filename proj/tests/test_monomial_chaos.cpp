#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "mapmart/errors.hpp"
#include "mapmart/monomial_chaos.hpp"
#include "mapmart/path_sim.hpp"
#include "mapmart/rng.hpp"
#include "mapmart/teugels.hpp"

using namespace mapmart;

namespace {

int tree_depth(const RepresentationTerm& t) {
    int d = 0;
    for (const auto& c : t.children) d = std::max(d, tree_depth(c));
    return 1 + d;
}

void walk(const MonomialExpansion& ex,
          const std::function<void(const RepresentationTerm&, int, int, int)>& fn) {
    std::function<void(const RepresentationTerm&, int, int, int)> rec =
        [&](const RepresentationTerm& t, int g, int p, int b) {
            fn(t, g, p, b);
            for (const auto& c : t.children) rec(c, t.g, t.p, t.b);
        };
    for (const auto& t : ex.terms) rec(t, ex.g, ex.p, ex.b);
}

double rms_error(const MonomialExpansion& ex, const MapSpec& spec,
                 const CompensatorSpec& comp, double dt, std::size_t n,
                 std::uint64_t seed) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto path = simulate(spec, dt, path_seed(seed, i));
        const auto chk = evaluate(ex, path, spec, comp);
        acc += chk.abs_error * chk.abs_error;
    }
    return std::sqrt(acc / double(n));
}

} // namespace

TEST_CASE("degree-1 expansions are single bar integrals") {
    const auto ex = expand(1, 0, 0);
    REQUIRE(ex.terms.size() == 1);
    CHECK(ex.terms[0].integrator.kind == IntegratorKind::ThetaBar);
    CHECK(ex.terms[0].integrator.mx == 1);
    CHECK(ex.terms[0].children.empty());
    CHECK(ex.terms[0].coeff == 1.0);
}

TEST_CASE("integration by parts of the mixed degree-2 monomial") {
    // xiL-bar and xiF-bar never jump together and their continuous parts are
    // independent, so the product is just the two first-order integrals.
    const auto ex = expand(0, 1, 1);
    REQUIRE(ex.terms.size() == 2);
    CHECK(ex.terms[0].integrator.kind == IntegratorKind::XiLBar);
    CHECK(ex.terms[0].p == 0);
    CHECK(ex.terms[0].b == 1);
    CHECK(ex.terms[1].integrator.kind == IntegratorKind::XiFBar);
    CHECK(ex.terms[1].p == 1);
    CHECK(ex.terms[1].b == 0);
}

TEST_CASE("the ordinate square expands into the Ito four terms") {
    const auto ex = expand(0, 2, 0);
    REQUIRE(ex.terms.size() == 4);
    // 2 int xiL-bar d xiL-bar^(1)
    CHECK(ex.terms[0].coeff == 2.0);
    CHECK(ex.terms[0].integrator.kind == IntegratorKind::XiLBar);
    CHECK(ex.terms[0].integrator.mx == 1);
    REQUIRE(ex.terms[0].children.size() == 1);
    // continuous bracket int sigma2^2(Theta_s-) ds
    CHECK(ex.terms[1].integrator.kind == IntegratorKind::Lebesgue);
    CHECK(ex.terms[1].sigma2_kappa);
    CHECK(ex.terms[1].children.empty());
    // jump square: d xiL-bar^(2) plus the m_2(nu2) rate
    CHECK(ex.terms[2].integrator.kind == IntegratorKind::XiLBar);
    CHECK(ex.terms[2].integrator.mx == 2);
    CHECK(ex.terms[3].integrator.kind == IntegratorKind::Lebesgue);
    CHECK(ex.terms[3].rate == RateSymbol::XiLMoment);
    CHECK(ex.terms[3].rate_k == 2);
}

TEST_CASE("the triggered square picks up the order-2 triggered bar") {
    const auto ex = expand(0, 0, 2);
    REQUIRE(ex.terms.size() == 3);
    CHECK(ex.terms[0].coeff == 2.0);
    CHECK(ex.terms[0].integrator.kind == IntegratorKind::XiFBar);
    CHECK(ex.terms[1].integrator.kind == IntegratorKind::XiFBar);
    CHECK(ex.terms[1].integrator.my == 2);
    CHECK(ex.terms[2].rate == RateSymbol::JointMoment);
    CHECK(ex.terms[2].rate_k == 2);
    CHECK(ex.terms[2].rate_l == 0);
}

TEST_CASE("theta and triggered moves share jump times, so the mixed monomial "
          "needs the joint integrator") {
    const auto ex = expand(1, 0, 1);
    REQUIRE(ex.terms.size() == 4);
    CHECK(ex.terms[0].integrator.kind == IntegratorKind::ThetaBar);
    CHECK(ex.terms[1].integrator.kind == IntegratorKind::XiFBar);
    CHECK(ex.terms[2].integrator.kind == IntegratorKind::ThetaXiFJoint);
    CHECK(ex.terms[2].integrator.mx == 1);
    CHECK(ex.terms[2].integrator.my == 1);
    CHECK(ex.terms[3].rate == RateSymbol::JointMoment);
    CHECK(ex.terms[3].rate_k == 1);
    CHECK(ex.terms[3].rate_l == 1);
}

TEST_CASE("tree invariants hold through degree 4") {
    for (int g = 0; g <= 4; ++g)
        for (int p = 0; p + g <= 4; ++p)
            for (int b = 0; b + p + g <= 4; ++b) {
                if (g + p + b == 0) continue;
                const auto ex = expand(g, p, b);
                int depth = 0;
                for (const auto& t : ex.terms) depth = std::max(depth, tree_depth(t));
                CHECK(depth <= g + p + b);
                walk(ex, [&](const RepresentationTerm& t, int pg, int pp, int pb) {
                    // Every integrand monomial strictly reduces the degree.
                    CHECK(t.g + t.p + t.b < pg + pp + pb);
                    if (t.g + t.p + t.b == 0)
                        CHECK(t.children.empty());
                    else
                        CHECK(!t.children.empty());
                });
            }
}

TEST_CASE("degree cap") {
    CHECK_THROWS_AS(expand(3, 2, 1), SchemaError);
    CHECK_THROWS_AS(expand(0, 0, 0), SchemaError);
    CHECK_NOTHROW(expand(2, 2, 1));
}

TEST_CASE("degree-1 evaluation is exact") {
    const MapSpec spec = MapSpec::default_spec();
    const auto comp = compensators(spec);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto path = simulate(spec, 0.02, seed);
        for (const auto& gpb : {std::array<int, 3>{1, 0, 0},
                                std::array<int, 3>{0, 1, 0},
                                std::array<int, 3>{0, 0, 1}}) {
            const auto chk =
                evaluate(expand(gpb[0], gpb[1], gpb[2]), path, spec, comp);
            CHECK(chk.abs_error <= 1e-12);
        }
    }
}

TEST_CASE("no modulator jumps silences the triggered factor") {
    MapSpec spec = MapSpec::default_spec();
    spec.nu1.intensity = 0.0;
    const auto comp = compensators(spec);
    const auto path = simulate(spec, 0.02, 5);
    const auto chk = evaluate(expand(0, 1, 1), path, spec, comp);
    CHECK(chk.lhs == 0.0);
    CHECK(chk.rhs == 0.0);
    CHECK(chk.abs_error == 0.0);
}

TEST_CASE("refinement shrinks the ordinate-square error at Euler rate") {
    const MapSpec spec = MapSpec::default_spec();
    const auto comp = compensators(spec);
    const auto ex = expand(0, 2, 0);
    const std::vector<double> dts = {1e-2, 5e-3, 2.5e-3};
    std::vector<double> rms;
    for (double dt : dts) rms.push_back(rms_error(ex, spec, comp, dt, 100, 313));
    CHECK(rms[1] < rms[0]);
    CHECK(rms[2] < rms[1]);
    // Strong order about 1/2: the log-log slope should be clearly positive.
    const double slope = std::log(rms[0] / rms[2]) / std::log(dts[0] / dts[2]);
    CHECK(slope > 0.3);
}

TEST_CASE("the joint integrator makes the theta-triggered product converge") {
    const MapSpec spec = MapSpec::default_spec();
    const auto comp = compensators(spec);
    const auto ex = expand(1, 0, 1);
    const double coarse = rms_error(ex, spec, comp, 1e-2, 100, 717);
    const double fine = rms_error(ex, spec, comp, 2.5e-3, 100, 717);
    CHECK(fine < coarse);
    CHECK(fine < 0.1);
}

TEST_CASE("jump-only cases converge on fixed jump skeletons") {
    MapSpec spec = MapSpec::default_spec();
    spec.nu2.intensity = 0.0;
    const auto comp = compensators(spec);
    for (const auto& gpb :
         {std::array<int, 3>{2, 0, 0}, std::array<int, 3>{1, 0, 1}}) {
        const auto ex = expand(gpb[0], gpb[1], gpb[2]);
        // Same seeds at every mesh: the jump records are identical and only
        // the discretization of the Lebesgue and Brownian-integrand terms
        // moves.
        const double coarse = rms_error(ex, spec, comp, 2e-2, 50, 11);
        const double fine = rms_error(ex, spec, comp, 2.5e-3, 50, 11);
        CHECK(fine < coarse);
    }
}

TEST_CASE("compensation rates reproduce the monomial means") {
    const MapSpec spec = MapSpec::default_spec();
    const auto comp = compensators(spec);
    const std::size_t n = 20000;
    for (const auto& gpb :
         {std::array<int, 3>{0, 2, 0}, std::array<int, 3>{2, 0, 0},
          std::array<int, 3>{0, 0, 2}}) {
        const auto ex = expand(gpb[0], gpb[1], gpb[2]);
        // The bar-integrator terms have zero mean, so E[monomial] must match
        // the expectation of the Lebesgue part alone.
        double acc = 0.0, acc2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto path = simulate(spec, 0.02, path_seed(515, i));
            const auto chk = evaluate(ex, path, spec, comp);
            const double diff = chk.lhs - lebesgue_part(ex, path, spec, comp);
            acc += diff;
            acc2 += diff * diff;
        }
        const double mean = acc / n;
        const double se = std::sqrt((acc2 / n - mean * mean) / double(n));
        CHECK(std::abs(mean) < 3.0 * se);
    }
}

TEST_CASE("rendering lists one line per term") {
    const auto ex = expand(0, 2, 0);
    const auto text = render(ex);
    CHECK(text.find("dXiLBar^(2)") != std::string::npos);
    CHECK(text.find("sigma2^2") != std::string::npos);
    CHECK(text.find("m_2(nu2)") != std::string::npos);
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    // header + 4 top-level terms + 1 nested child
    CHECK(lines == 6);
}
