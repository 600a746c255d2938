#pragma once

#include <string>
#include <vector>

#include "mapmart/map_model.hpp"
#include "mapmart/path_sim.hpp"

namespace mapmart {

// Integrators appearing in the monomial representation. Modulator jumps and
// the jumps they trigger happen at the same instants, so mixed powers of the
// two need the joint process sum x^mx * y^my over modulator events; the pure
// families are the compensated power-jump martingales.
enum class IntegratorKind { ThetaBar, XiLBar, XiFBar, ThetaXiFJoint, Lebesgue };

struct ChaosIntegrator {
    IntegratorKind kind = IntegratorKind::Lebesgue;
    int mx = 0; // theta-jump power (ThetaBar order, joint x power)
    int my = 0; // triggered-jump power (XiFBar order, joint y power)
};

// Model-level rate constant multiplying a term; resolved against the spec at
// evaluation time so the expansion itself is pure in (g, p, b).
enum class RateSymbol { One, Sigma1Sq, XiLMoment, JointMoment };

// One term of the representation:
//   coeff * rate * int_0^t [ integrand(s-) ] * kappa(s-) d Integrator_s
// where the integrand is the monomial thetabar^g xibarL^p xibarF^b, itself
// recursively expanded into `children` (empty when g = p = b = 0), and kappa
// is sigma2^2(Theta_{s-}) when sigma2_kappa is set.
struct RepresentationTerm {
    double coeff = 1.0;
    RateSymbol rate = RateSymbol::One;
    int rate_k = 0, rate_l = 0; // orders for XiLMoment / JointMoment
    ChaosIntegrator integrator;
    bool sigma2_kappa = false;
    int g = 0, p = 0, b = 0;
    std::vector<RepresentationTerm> children;
};

struct MonomialExpansion {
    int g = 0, p = 0, b = 0;
    std::vector<RepresentationTerm> terms;
};

inline constexpr int kChaosDegreeCap = 5;

// The Ito rewrite of thetabar^g (xibarL)^p (xibarF)^b: first-order terms
// against the order-1 bars, the two continuous second-order Lebesgue terms,
// the exact jump sums split by event type, each raw jump integrator replaced
// by its bar plus the compensating Lebesgue rate, and every surviving
// integrand monomial expanded recursively. Pure in (g, p, b).
MonomialExpansion expand(int g, int p, int b);

struct PathwiseCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double dt = 0.0;
    double abs_error = 0.0;
    double rel_error = 0.0; // abs_error / (1 + |lhs|)
    bool mesh_warning = false;
};

// Evaluates both sides on one path: iterated integrals innermost-first with
// cached prefix paths, left-point integrand sampling, jump integrators picked
// up exactly at jump times, Lebesgue terms by left Riemann sums.
PathwiseCheck evaluate(const MonomialExpansion& expansion, const MapPath& path,
                       const MapSpec& spec, const CompensatorSpec& comp);

// Terminal value of only the Lebesgue-integrator terms (the compensation
// constants and continuous-bracket integrals). The bar-integrator terms have
// zero mean, so E[monomial] equals the expectation of this part.
double lebesgue_part(const MonomialExpansion& expansion, const MapPath& path,
                     const MapSpec& spec, const CompensatorSpec& comp);

// One line per term, nested terms indented; for docs and debugging.
std::string render(const MonomialExpansion& expansion);

} // namespace mapmart
