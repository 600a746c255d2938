#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mapmart/rng.hpp"

namespace mapmart {

// Largest supported power-jump order K; moment machinery goes up to 2K.
inline constexpr int kMaxBasisOrder = 6;
inline constexpr int kMaxMomentOrder = 2 * kMaxBasisOrder;

enum class JumpLawType { Gaussian, Uniform, TwoPoint, Exponential };

// Parametric jump-size law with closed-form raw moments of all orders.
struct JumpLaw {
    JumpLawType type = JumpLawType::Gaussian;
    // Gaussian: a=mean, b=stddev. Uniform: a=lo, b=hi.
    // TwoPoint: a=x1, b=p1, c=x2, d=p2. Exponential: a=rate, b=sign.
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    static JumpLaw gaussian(double mean, double stddev);
    static JumpLaw uniform(double lo, double hi);
    static JumpLaw two_point(double x1, double p1, double x2, double p2);
    static JumpLaw exponential(double rate, double sign);

    // E[J^k], k >= 0; exact per family.
    double raw_moment(int k) const;
    // E[J 1{|J| >= 1}], the big-jump restriction used by compensators.
    double tail_mean() const;
    double sample(CounterRng& rng) const;

    // Empty when the parameters are admissible, otherwise named violations.
    std::vector<std::string> check() const;
    std::string describe() const;
};

// Finite-activity Levy measure nu(dx) = intensity * jump_law(dx).
struct LevyMeasureSpec {
    double intensity = 0.0;
    JumpLaw law;

    std::vector<std::string> check() const;
};

// intensity * E[J^k]; throws SchemaError for k < 1 or k > kMaxMomentOrder.
double scalar_moment(const LevyMeasureSpec& spec, int k);

// intensity * E[J 1{|J| >= 1}].
double big_jump_mean(const LevyMeasureSpec& spec);

// intensity * E[J 1{|J| < 1}] = m_1 - big_jump_mean; the drift the truncated
// compensation convention removes from the simulated jump part.
double small_jump_mean(const LevyMeasureSpec& spec);

// Conditional law of a triggered jump U(x) given the modulator jump size x.
struct TriggeredJumpLaw {
    enum class Kind { Deterministic, Affine, Independent };
    Kind kind = Kind::Deterministic;
    double scale = 1.0;                 // Deterministic: U = scale * x
    double a = 0.0, b = 0.0, sigma_u = 0.0; // Affine: U = a*x + b + sigma_u*N(0,1)
    std::optional<JumpLaw> law;         // Independent: U ~ law, free of x

    static TriggeredJumpLaw deterministic(double scale);
    static TriggeredJumpLaw affine(double a, double b, double sigma_u);
    static TriggeredJumpLaw independent(JumpLaw law);

    // E[U(x)^k | x], closed form for every kind.
    double cond_moment(int k, double x) const;
    double sample(double x, CounterRng& rng) const;

    std::vector<std::string> check() const;
};

// c_{k,l} = intensity * E[ E[U(J)^k | J] * J^l ] with J ~ modulator law.
// k = 0 collapses to scalar_moment(modulator, l).
double joint_moment(const LevyMeasureSpec& modulator, const TriggeredJumpLaw& u,
                    int k, int l);

// Precomputed moment functionals for one measure (optionally with a triggered
// law): every integral the section-3 inner products are assembled from.
struct MomentTable {
    int k_max = 0;                      // basis order K; moments run to 2K
    std::vector<double> scalar;         // scalar[k] = m_k, k = 0..2K (m_0 unused)
    std::vector<std::vector<double>> joint; // joint[k][l] = c_{k,l}, k+l <= 2K
    double big_jump_mean = 0.0;
    bool has_joint = false;

    static MomentTable for_measure(const LevyMeasureSpec& spec, int k_max);
    static MomentTable for_modulator(const LevyMeasureSpec& nu1,
                                     const TriggeredJumpLaw& u, int k_max);

    double m(int k) const;              // m_k with bounds check
    double c(int k, int l) const;       // c_{k,l} with bounds check
};

} // namespace mapmart
