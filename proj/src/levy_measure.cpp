#include "mapmart/levy_measure.hpp"

#include <cmath>
#include <sstream>

#include "mapmart/errors.hpp"

namespace mapmart {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }
double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Raw moments of N(mean, stddev^2) by the two-term recursion
// m_k = mean*m_{k-1} + (k-1)*stddev^2*m_{k-2}.
double gaussian_raw_moment(double mean, double stddev, int k) {
    double prev2 = 1.0, prev1 = mean;
    if (k == 0) return prev2;
    if (k == 1) return prev1;
    const double var = stddev * stddev;
    double cur = 0.0;
    for (int i = 2; i <= k; ++i) {
        cur = mean * prev1 + (i - 1) * var * prev2;
        prev2 = prev1;
        prev1 = cur;
    }
    return cur;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// E[X 1{X >= a}] and E[X 1{X <= a}] for X ~ N(mean, stddev^2).
double gaussian_upper_partial_mean(double mean, double stddev, double a) {
    const double z = (a - mean) / stddev;
    return mean * (1.0 - normal_cdf(z)) + stddev * normal_pdf(z);
}
double gaussian_lower_partial_mean(double mean, double stddev, double a) {
    const double z = (a - mean) / stddev;
    return mean * normal_cdf(z) - stddev * normal_pdf(z);
}

void require_order(int k) {
    if (k < 1) throw SchemaError("order-too-low: moment order must be >= 1");
    if (k > kMaxMomentOrder) {
        std::ostringstream os;
        os << "order-too-high: moment order " << k << " exceeds 2*K_max = "
           << kMaxMomentOrder;
        throw SchemaError(os.str());
    }
}

} // namespace

JumpLaw JumpLaw::gaussian(double mean, double stddev) {
    return JumpLaw{JumpLawType::Gaussian, mean, stddev, 0.0, 0.0};
}
JumpLaw JumpLaw::uniform(double lo, double hi) {
    return JumpLaw{JumpLawType::Uniform, lo, hi, 0.0, 0.0};
}
JumpLaw JumpLaw::two_point(double x1, double p1, double x2, double p2) {
    return JumpLaw{JumpLawType::TwoPoint, x1, p1, x2, p2};
}
JumpLaw JumpLaw::exponential(double rate, double sign) {
    return JumpLaw{JumpLawType::Exponential, rate, sign, 0.0, 0.0};
}

double JumpLaw::raw_moment(int k) const {
    if (k == 0) return 1.0;
    switch (type) {
    case JumpLawType::Gaussian:
        return gaussian_raw_moment(a, b, k);
    case JumpLawType::Uniform: {
        // (hi^{k+1} - lo^{k+1}) / ((k+1)(hi - lo))
        const double num = std::pow(b, k + 1) - std::pow(a, k + 1);
        return num / ((k + 1) * (b - a));
    }
    case JumpLawType::TwoPoint:
        return b * std::pow(a, k) + d * std::pow(c, k);
    case JumpLawType::Exponential: {
        double m = 1.0;
        for (int i = 1; i <= k; ++i) m *= i / a;
        return std::pow(b, k) * m;
    }
    }
    return 0.0;
}

double JumpLaw::tail_mean() const {
    switch (type) {
    case JumpLawType::Gaussian:
        return gaussian_upper_partial_mean(a, b, 1.0) +
               gaussian_lower_partial_mean(a, b, -1.0);
    case JumpLawType::Uniform: {
        double out = 0.0;
        const double lo = a, hi = b, width = b - a;
        if (hi > 1.0) {
            const double c0 = std::max(lo, 1.0);
            out += (hi * hi - c0 * c0) / (2.0 * width);
        }
        if (lo < -1.0) {
            const double c1 = std::min(hi, -1.0);
            out += (c1 * c1 - lo * lo) / (2.0 * width);
        }
        return out;
    }
    case JumpLawType::TwoPoint: {
        double out = 0.0;
        if (std::abs(a) >= 1.0) out += b * a;
        if (std::abs(c) >= 1.0) out += d * c;
        return out;
    }
    case JumpLawType::Exponential:
        // sign * E[X 1{X >= 1}] with X ~ Exp(rate).
        return b * std::exp(-a) * (1.0 + 1.0 / a);
    }
    return 0.0;
}

double JumpLaw::sample(CounterRng& rng) const {
    switch (type) {
    case JumpLawType::Gaussian:
        return a + b * rng.next_gaussian();
    case JumpLawType::Uniform:
        return a + (b - a) * rng.next_uniform();
    case JumpLawType::TwoPoint:
        return rng.next_uniform() < b ? a : c;
    case JumpLawType::Exponential:
        return b * rng.next_exponential(a);
    }
    return 0.0;
}

std::vector<std::string> JumpLaw::check() const {
    std::vector<std::string> errs;
    switch (type) {
    case JumpLawType::Gaussian:
        if (!(b >= 0.0)) errs.push_back("nonfinite-moment: gaussian stddev < 0");
        break;
    case JumpLawType::Uniform:
        if (!(b > a)) errs.push_back("nonfinite-moment: uniform needs hi > lo");
        break;
    case JumpLawType::TwoPoint:
        if (!(b >= 0.0) || !(d >= 0.0))
            errs.push_back("nonfinite-moment: two-point weights must be >= 0");
        if (std::abs(b + d - 1.0) > 1e-12)
            errs.push_back("nonfinite-moment: two-point weights must sum to 1");
        break;
    case JumpLawType::Exponential:
        if (!(a > 0.0)) errs.push_back("nonfinite-moment: exponential rate <= 0");
        if (b != 1.0 && b != -1.0)
            errs.push_back("nonfinite-moment: exponential sign must be +1 or -1");
        break;
    }
    return errs;
}

std::string JumpLaw::describe() const {
    std::ostringstream os;
    switch (type) {
    case JumpLawType::Gaussian: os << "gaussian(" << a << ", " << b << ")"; break;
    case JumpLawType::Uniform: os << "uniform(" << a << ", " << b << ")"; break;
    case JumpLawType::TwoPoint:
        os << "two_point(" << a << "@" << b << ", " << c << "@" << d << ")";
        break;
    case JumpLawType::Exponential:
        os << "exponential(" << a << ", sign " << b << ")";
        break;
    }
    return os.str();
}

std::vector<std::string> LevyMeasureSpec::check() const {
    std::vector<std::string> errs;
    if (!(intensity >= 0.0)) errs.push_back("negative-intensity");
    if (intensity > 0.0) {
        auto law_errs = law.check();
        errs.insert(errs.end(), law_errs.begin(), law_errs.end());
    }
    return errs;
}

double scalar_moment(const LevyMeasureSpec& spec, int k) {
    require_order(k);
    if (spec.intensity == 0.0) return 0.0;
    return spec.intensity * spec.law.raw_moment(k);
}

double big_jump_mean(const LevyMeasureSpec& spec) {
    if (spec.intensity == 0.0) return 0.0;
    return spec.intensity * spec.law.tail_mean();
}

double small_jump_mean(const LevyMeasureSpec& spec) {
    if (spec.intensity == 0.0) return 0.0;
    return spec.intensity * spec.law.raw_moment(1) - big_jump_mean(spec);
}

TriggeredJumpLaw TriggeredJumpLaw::deterministic(double scale) {
    TriggeredJumpLaw u;
    u.kind = Kind::Deterministic;
    u.scale = scale;
    return u;
}
TriggeredJumpLaw TriggeredJumpLaw::affine(double a, double b, double sigma_u) {
    TriggeredJumpLaw u;
    u.kind = Kind::Affine;
    u.a = a;
    u.b = b;
    u.sigma_u = sigma_u;
    return u;
}
TriggeredJumpLaw TriggeredJumpLaw::independent(JumpLaw law) {
    TriggeredJumpLaw u;
    u.kind = Kind::Independent;
    u.law = law;
    return u;
}

double TriggeredJumpLaw::cond_moment(int k, double x) const {
    if (k == 0) return 1.0;
    switch (kind) {
    case Kind::Deterministic:
        return std::pow(scale * x, k);
    case Kind::Affine:
        return gaussian_raw_moment(a * x + b, sigma_u, k);
    case Kind::Independent:
        return law->raw_moment(k);
    }
    return 0.0;
}

double TriggeredJumpLaw::sample(double x, CounterRng& rng) const {
    switch (kind) {
    case Kind::Deterministic:
        return scale * x;
    case Kind::Affine:
        return a * x + b + sigma_u * rng.next_gaussian();
    case Kind::Independent:
        return law->sample(rng);
    }
    return 0.0;
}

std::vector<std::string> TriggeredJumpLaw::check() const {
    std::vector<std::string> errs;
    if (kind == Kind::Affine && !(sigma_u >= 0.0))
        errs.push_back("nonfinite-moment: triggered affine noise stddev < 0");
    if (kind == Kind::Independent) {
        if (!law) {
            errs.push_back("nonfinite-moment: independent triggered law missing");
        } else {
            auto law_errs = law->check();
            errs.insert(errs.end(), law_errs.begin(), law_errs.end());
        }
    }
    return errs;
}

double joint_moment(const LevyMeasureSpec& modulator, const TriggeredJumpLaw& u,
                    int k, int l) {
    if (k < 0 || l < 0 || k + l < 1)
        throw SchemaError("order-too-low: joint moment needs k + l >= 1");
    if (k + l > kMaxMomentOrder)
        throw SchemaError("order-too-high: joint moment order exceeds 2*K_max");
    if (k == 0) return scalar_moment(modulator, l);
    if (modulator.intensity == 0.0) return 0.0;

    const JumpLaw& jl = modulator.law;
    switch (u.kind) {
    case TriggeredJumpLaw::Kind::Deterministic:
        return modulator.intensity * std::pow(u.scale, k) * jl.raw_moment(k + l);
    case TriggeredJumpLaw::Kind::Affine: {
        // E[(aJ + b + sigma_u Z)^k J^l] expanded over the independent Z.
        double acc = 0.0;
        for (int i = 0; i <= k; ++i) {
            const double z_mom = gaussian_raw_moment(0.0, 1.0, i);
            if (z_mom == 0.0) continue;
            const double noise = binomial(k, i) * std::pow(u.sigma_u, i) * z_mom;
            for (int j = 0; j <= k - i; ++j) {
                acc += noise * binomial(k - i, j) * std::pow(u.a, j) *
                       std::pow(u.b, k - i - j) * jl.raw_moment(j + l);
            }
        }
        return modulator.intensity * acc;
    }
    case TriggeredJumpLaw::Kind::Independent:
        return modulator.intensity * u.law->raw_moment(k) * jl.raw_moment(l);
    }
    return 0.0;
}

MomentTable MomentTable::for_measure(const LevyMeasureSpec& spec, int k_max) {
    if (k_max < 1 || k_max > kMaxBasisOrder)
        throw SchemaError("order-too-high: K_max outside [1, 6]");
    MomentTable t;
    t.k_max = k_max;
    t.scalar.assign(2 * k_max + 1, 0.0);
    for (int k = 1; k <= 2 * k_max; ++k) t.scalar[k] = scalar_moment(spec, k);
    t.big_jump_mean = mapmart::big_jump_mean(spec);
    return t;
}

MomentTable MomentTable::for_modulator(const LevyMeasureSpec& nu1,
                                       const TriggeredJumpLaw& u, int k_max) {
    MomentTable t = for_measure(nu1, k_max);
    t.has_joint = true;
    t.joint.assign(2 * k_max + 1, {});
    for (int k = 0; k <= 2 * k_max; ++k) {
        t.joint[k].assign(2 * k_max - k + 1, 0.0);
        for (int l = 0; l <= 2 * k_max - k; ++l) {
            if (k + l == 0) continue;
            t.joint[k][l] = joint_moment(nu1, u, k, l);
        }
    }
    return t;
}

double MomentTable::m(int k) const {
    if (k < 1 || k >= static_cast<int>(scalar.size()))
        throw SchemaError("order-too-high: scalar moment outside table");
    return scalar[k];
}

double MomentTable::c(int k, int l) const {
    if (!has_joint) throw SchemaError("joint moments not built for this table");
    if (k < 0 || l < 0 || k + l > 2 * k_max)
        throw SchemaError("order-too-high: joint moment outside table");
    return joint[k][l];
}

} // namespace mapmart
