#pragma once

// Test-only oracles: fixed-node Gauss-Legendre quadrature against the law
// densities, plus direct enumeration for atomic laws. Deliberately
// independent of the closed-form moment formulas they check.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mapmart/levy_measure.hpp"

namespace oracles {

// 64-node Gauss-Legendre rule on [-1, 1]; nodes by Newton iteration on the
// Legendre recursion.
class GaussLegendre {
public:
    explicit GaussLegendre(int n = 64) : x_(n), w_(n) {
        for (int i = 0; i < n; ++i) {
            double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double p0 = 0.0, p1 = 0.0;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0;
                p1 = 0.0;
                for (int k = 0; k < n; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k + 1.0) * xi * p1 - k * p2) / (k + 1.0);
                }
                const double dp = n * (xi * p0 - p1) / (xi * xi - 1.0);
                const double step = p0 / dp;
                xi -= step;
                if (std::abs(step) < 1e-15) break;
            }
            p0 = 1.0;
            p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * xi * p1 - k * p2) / (k + 1.0);
            }
            const double dp = n * (xi * p0 - p1) / (xi * xi - 1.0);
            x_[i] = xi;
            w_[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
        }
    }

    double integrate(const std::function<double(double)>& f, double a,
                     double b) const {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double acc = 0.0;
        for (std::size_t i = 0; i < x_.size(); ++i)
            acc += w_[i] * f(mid + half * x_[i]);
        return acc * half;
    }

    // Composite rule: panels sub-intervals of [a, b].
    double composite(const std::function<double(double)>& f, double a, double b,
                     int panels = 16) const {
        double acc = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double lo = a + (b - a) * p / panels;
            const double hi = a + (b - a) * (p + 1) / panels;
            acc += integrate(f, lo, hi);
        }
        return acc;
    }

private:
    std::vector<double> x_, w_;
};

inline const GaussLegendre& rule() {
    static const GaussLegendre gl(64);
    return gl;
}

// Integration support of a law's density; atomic laws are enumerated instead.
inline bool law_is_atomic(const mapmart::JumpLaw& law) {
    return law.type == mapmart::JumpLawType::TwoPoint;
}

inline double density(const mapmart::JumpLaw& law, double x) {
    using mapmart::JumpLawType;
    switch (law.type) {
    case JumpLawType::Gaussian: {
        const double z = (x - law.a) / law.b;
        return std::exp(-0.5 * z * z) / (law.b * std::sqrt(2.0 * M_PI));
    }
    case JumpLawType::Uniform:
        return (x >= law.a && x <= law.b) ? 1.0 / (law.b - law.a) : 0.0;
    case JumpLawType::Exponential: {
        const double y = law.b * x; // sign-flipped coordinate
        return y >= 0.0 ? law.a * std::exp(-law.a * y) : 0.0;
    }
    case JumpLawType::TwoPoint:
        throw std::logic_error("atomic law has no density");
    }
    return 0.0;
}

inline std::pair<double, double> support(const mapmart::JumpLaw& law) {
    using mapmart::JumpLawType;
    switch (law.type) {
    case JumpLawType::Gaussian:
        return {law.a - 14.0 * law.b, law.a + 14.0 * law.b};
    case JumpLawType::Uniform:
        return {law.a, law.b};
    case JumpLawType::Exponential:
        return law.b > 0 ? std::pair<double, double>{0.0, 200.0 / law.a}
                         : std::pair<double, double>{-200.0 / law.a, 0.0};
    case JumpLawType::TwoPoint:
        throw std::logic_error("atomic law has no support interval");
    }
    return {0.0, 0.0};
}

// E[g(J)] by quadrature or enumeration.
inline double law_expect(const mapmart::JumpLaw& law,
                         const std::function<double(double)>& g) {
    if (law_is_atomic(law)) return law.b * g(law.a) + law.d * g(law.c);
    const auto [lo, hi] = support(law);
    return rule().composite([&](double x) { return g(x) * density(law, x); },
                            lo, hi, 32);
}

inline double law_moment(const mapmart::JumpLaw& law, int k) {
    return law_expect(law, [k](double x) { return std::pow(x, k); });
}

// E[J 1{|J| >= 1}]: integrate the two smooth tail pieces separately so the
// indicator never crosses a quadrature panel.
inline double law_tail_mean(const mapmart::JumpLaw& law) {
    if (law_is_atomic(law)) {
        double out = 0.0;
        if (std::abs(law.a) >= 1.0) out += law.b * law.a;
        if (std::abs(law.c) >= 1.0) out += law.d * law.c;
        return out;
    }
    const auto [lo, hi] = support(law);
    auto f = [&](double x) { return x * density(law, x); };
    double out = 0.0;
    if (hi > 1.0) out += rule().composite(f, std::max(lo, 1.0), hi, 32);
    if (lo < -1.0) out += rule().composite(f, lo, std::min(hi, -1.0), 32);
    return out;
}

// E[U(x)^k | x] by quadrature over the conditional law.
inline double cond_u_moment(const mapmart::TriggeredJumpLaw& u, int k, double x) {
    using Kind = mapmart::TriggeredJumpLaw::Kind;
    switch (u.kind) {
    case Kind::Deterministic:
        return std::pow(u.scale * x, k);
    case Kind::Affine: {
        const double mean = u.a * x + u.b;
        if (u.sigma_u == 0.0) return std::pow(mean, k);
        const double s = u.sigma_u;
        return rule().composite(
            [&](double y) {
                const double z = (y - mean) / s;
                return std::pow(y, k) * std::exp(-0.5 * z * z) /
                       (s * std::sqrt(2.0 * M_PI));
            },
            mean - 14.0 * s, mean + 14.0 * s, 32);
    }
    case Kind::Independent:
        return law_moment(*u.law, k);
    }
    return 0.0;
}

// c_{k,l} = intensity * E[E[U(J)^k | J] J^l] by nested quadrature.
inline double joint_moment(const mapmart::LevyMeasureSpec& nu1,
                           const mapmart::TriggeredJumpLaw& u, int k, int l) {
    if (nu1.intensity == 0.0) return 0.0;
    return nu1.intensity *
           law_expect(nu1.law, [&](double x) {
               return cond_u_moment(u, k, x) * std::pow(x, l);
           });
}

inline double scalar_moment(const mapmart::LevyMeasureSpec& spec, int k) {
    if (spec.intensity == 0.0) return 0.0;
    return spec.intensity * law_moment(spec.law, k);
}

inline double big_jump_mean(const mapmart::LevyMeasureSpec& spec) {
    if (spec.intensity == 0.0) return 0.0;
    return spec.intensity * law_tail_mean(spec.law);
}

} // namespace oracles
