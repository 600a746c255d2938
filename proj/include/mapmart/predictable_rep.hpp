#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mapmart/map_model.hpp"

namespace mapmart {

// Square-integrable terminal payoffs expressed in the compensated processes;
// xi-bar denotes the compensated full ordinate xibarL + xibarF.
struct Payoff {
    enum class Kind { TerminalOrdinate, TerminalSquare, Monomial, PolynomialCombo };
    struct Term {
        double weight = 1.0;
        int g = 0, p = 0, b = 0;
    };
    Kind kind = Kind::TerminalOrdinate;
    int g = 0, p = 0, b = 0;  // Monomial
    std::vector<Term> combo;  // PolynomialCombo

    static Payoff terminal_ordinate();
    static Payoff terminal_square();
    static Payoff monomial(int g, int p, int b);
    static Payoff polynomial(std::vector<Term> combo);

    std::string name() const;
};

// Estimated predictable integrands: per time bucket, per integrator, one
// coefficient for each of the state features (1, thetabar, xibar) measured at
// the bucket start.
struct ReplicationReport {
    int basis_order = 1;
    std::size_t n_paths = 0; // total; split 50/50 train vs held-out
    std::size_t n_buckets = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> integrator_names; // "xi", "L2..", "f1..", "T1.."
    std::vector<double> bucket_starts;
    // coeffs[bucket][integrator][feature]
    std::vector<std::vector<std::array<double, 3>>> coeffs;
    double residual_variance = 0.0;
    double residual_stderr = 0.0;  // stderr of the variance estimate
    double floor_variance = -1.0;  // known-integrand floor; < 0 if unknown
    double payoff_variance = 0.0;  // held-out Var[F], for scale
    double ridge = 0.0;            // > 0 when the ridge fallback fired
    bool exact_target = false;     // conditional-expectation increments used

    // Integrand value h_q(s) on bucket i given bucket-start state; uses only
    // the bucket-start features, which is the predictability contract.
    double integrand(std::size_t bucket, std::size_t integrator,
                     double theta_bar, double xi_bar) const;
};

// Regresses payoff-martingale increments per bucket onto the compensated
// integrator increments {d xibar, d xibarL^(2..K), d xibarF^[1..K],
// d thetabar^(1..K)}. For polynomial payoffs under constant ordinate
// coefficients the martingale increments are computed in closed form from
// the joint moment structure; otherwise the terminal value is projected.
// Residuals come from a held-out path set with a disjoint seed stream.
ReplicationReport replicate(const MapSpec& spec, const Payoff& payoff, int K,
                            std::size_t n_paths, double dt, std::uint64_t seed,
                            std::size_t n_buckets = 10);

} // namespace mapmart
