#pragma once

#include <span>
#include <string>
#include <vector>

#include "mapmart/levy_measure.hpp"

namespace mapmart {

// Bounded coefficient function of the modulator state, used for mu2 and
// sigma2. Every family is bounded by construction so the section-2
// integrability conditions hold on any simulated theta range.
struct CoefficientFn {
    enum class Kind { Constant, AffineClipped, Table };
    Kind kind = Kind::Constant;
    double value = 0.0;           // Constant
    double a = 0.0, b = 0.0;      // AffineClipped: clip(a*theta + b, lo, hi)
    double lo = 0.0, hi = 0.0;
    std::vector<double> xs, ys;   // Table: piecewise linear, clamped ends

    static CoefficientFn constant(double v);
    static CoefficientFn affine_clipped(double a, double b, double lo, double hi);
    static CoefficientFn table(std::vector<double> xs, std::vector<double> ys);

    double operator()(double theta) const;
    bool is_constant() const { return kind == Kind::Constant; }

    std::vector<std::string> check(const std::string& name) const;
};

// Full model of section 2: modulator (mu1, sigma1, nu1), ordinate coefficients
// (mu2, sigma2, nu2), triggered-jump law U, start value and horizon.
struct MapSpec {
    double mu1 = 0.0;
    double sigma1 = 1.0;
    LevyMeasureSpec nu1;
    CoefficientFn mu2;
    CoefficientFn sigma2;
    LevyMeasureSpec nu2;
    TriggeredJumpLaw u_law;
    double xi0 = 0.0;
    double horizon = 1.0;
    int k_max = 4;

    // The spec exercised by every acceptance suite: mu1=0.2, sigma1=1,
    // nu1 = 1 x Uniform(1,2), mu2=0.1, sigma2=0.5, nu2 = 2 x Gaussian(0,1),
    // U(x) = x/2, horizon 1.
    static MapSpec default_spec();
};

// Named invariant violations; empty means the spec is admissible.
std::vector<std::string> validate(const MapSpec& spec);

// Returns the spec unchanged or throws SchemaError listing every violation.
MapSpec require_valid(MapSpec spec);

// Deterministic compensator rates plus the path-dependent conditional drift
// functional for the order-1 ordinate martingale. All rates are linear in t.
struct CompensatorSpec {
    double theta_mean_rate = 0.0;     // d/dt E[Theta_t] = mu1 + big_jump_mean(nu1)
    double xi_l_big_jump_rate = 0.0;  // big_jump_mean(nu2)
    double xi0 = 0.0;
    int k_max = 4;
    // rate[k] for k = 2..2K; order 1 is handled by the mean-rate formulas.
    std::vector<double> theta_power_rate; // m_k(nu1)
    std::vector<double> xi_l_power_rate;  // m_k(nu2)
    std::vector<double> xi_f_power_rate;  // c_{k,0}, valid from k = 1
    MomentTable nu1_table;                // joint table for (nu1, U)
    MomentTable nu2_table;

    // E[xi^L_t | K_t] at grid index idx: xi0 + left-point Riemann sum of
    // mu2(theta) plus t * big_jump_mean(nu2). Uses the same quadrature as the
    // simulator so the compensated process is drift-free on the grid.
    double xi_l_cond_drift(std::span<const double> times,
                           std::span<const double> theta_left,
                           std::size_t idx, const CoefficientFn& mu2) const;
};

CompensatorSpec compensators(const MapSpec& spec);

} // namespace mapmart
