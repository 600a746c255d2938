#include "mapmart/map_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mapmart/errors.hpp"

namespace mapmart {

CoefficientFn CoefficientFn::constant(double v) {
    CoefficientFn f;
    f.kind = Kind::Constant;
    f.value = v;
    return f;
}

CoefficientFn CoefficientFn::affine_clipped(double a, double b, double lo, double hi) {
    CoefficientFn f;
    f.kind = Kind::AffineClipped;
    f.a = a;
    f.b = b;
    f.lo = lo;
    f.hi = hi;
    return f;
}

CoefficientFn CoefficientFn::table(std::vector<double> xs, std::vector<double> ys) {
    CoefficientFn f;
    f.kind = Kind::Table;
    f.xs = std::move(xs);
    f.ys = std::move(ys);
    return f;
}

double CoefficientFn::operator()(double theta) const {
    switch (kind) {
    case Kind::Constant:
        return value;
    case Kind::AffineClipped:
        return std::clamp(a * theta + b, lo, hi);
    case Kind::Table: {
        if (theta <= xs.front()) return ys.front();
        if (theta >= xs.back()) return ys.back();
        const auto it = std::upper_bound(xs.begin(), xs.end(), theta);
        const std::size_t j = static_cast<std::size_t>(it - xs.begin());
        const double w = (theta - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return ys[j - 1] + w * (ys[j] - ys[j - 1]);
    }
    }
    return 0.0;
}

std::vector<std::string> CoefficientFn::check(const std::string& name) const {
    std::vector<std::string> errs;
    switch (kind) {
    case Kind::Constant:
        if (!std::isfinite(value)) errs.push_back(name + "-nonfinite");
        break;
    case Kind::AffineClipped:
        if (!(lo <= hi)) errs.push_back(name + "-clip-range-empty");
        if (!std::isfinite(lo) || !std::isfinite(hi))
            errs.push_back(name + "-unbounded");
        break;
    case Kind::Table:
        if (xs.size() < 2 || xs.size() != ys.size()) {
            errs.push_back(name + "-table-malformed");
        } else if (!std::is_sorted(xs.begin(), xs.end())) {
            errs.push_back(name + "-table-unsorted");
        }
        break;
    }
    return errs;
}

MapSpec MapSpec::default_spec() {
    MapSpec s;
    s.mu1 = 0.2;
    s.sigma1 = 1.0;
    s.nu1 = LevyMeasureSpec{1.0, JumpLaw::uniform(1.0, 2.0)};
    s.mu2 = CoefficientFn::constant(0.1);
    s.sigma2 = CoefficientFn::constant(0.5);
    s.nu2 = LevyMeasureSpec{2.0, JumpLaw::gaussian(0.0, 1.0)};
    s.u_law = TriggeredJumpLaw::deterministic(0.5);
    s.xi0 = 0.0;
    s.horizon = 1.0;
    s.k_max = 4;
    return s;
}

std::vector<std::string> validate(const MapSpec& spec) {
    std::vector<std::string> errs;
    if (spec.sigma1 == 0.0) errs.push_back("sigma1-zero");
    if (!std::isfinite(spec.sigma1) || !std::isfinite(spec.mu1))
        errs.push_back("modulator-params-nonfinite");
    for (const auto& e : spec.nu1.check()) errs.push_back("nu1: " + e);
    for (const auto& e : spec.nu2.check()) errs.push_back("nu2: " + e);
    for (const auto& e : spec.mu2.check("mu2")) errs.push_back(e);
    for (const auto& e : spec.sigma2.check("sigma2")) errs.push_back(e);
    for (const auto& e : spec.u_law.check()) errs.push_back("u_law: " + e);
    if (!(spec.horizon > 0.0)) errs.push_back("horizon-nonpositive");
    if (spec.k_max < 1 || spec.k_max > kMaxBasisOrder)
        errs.push_back("k-max-out-of-range");
    return errs;
}

MapSpec require_valid(MapSpec spec) {
    const auto errs = validate(spec);
    if (!errs.empty()) {
        std::ostringstream os;
        os << "invalid model spec:";
        for (const auto& e : errs) os << " [" << e << "]";
        throw SchemaError(os.str());
    }
    return spec;
}

CompensatorSpec compensators(const MapSpec& spec) {
    CompensatorSpec c;
    c.k_max = spec.k_max;
    c.xi0 = spec.xi0;
    // The truncated convention compensates only the |x| < 1 jump part, so the
    // mean growth keeps the big-jump contribution.
    c.theta_mean_rate = spec.mu1 + big_jump_mean(spec.nu1);
    c.xi_l_big_jump_rate = big_jump_mean(spec.nu2);
    const int top = 2 * spec.k_max;
    c.theta_power_rate.assign(top + 1, 0.0);
    c.xi_l_power_rate.assign(top + 1, 0.0);
    c.xi_f_power_rate.assign(top + 1, 0.0);
    c.nu1_table = MomentTable::for_modulator(spec.nu1, spec.u_law, spec.k_max);
    c.nu2_table = MomentTable::for_measure(spec.nu2, spec.k_max);
    for (int k = 1; k <= top; ++k) {
        c.theta_power_rate[k] = c.nu1_table.m(k);
        c.xi_l_power_rate[k] = c.nu2_table.m(k);
        c.xi_f_power_rate[k] = c.nu1_table.c(k, 0);
    }
    return c;
}

double CompensatorSpec::xi_l_cond_drift(std::span<const double> times,
                                        std::span<const double> theta_left,
                                        std::size_t idx,
                                        const CoefficientFn& mu2) const {
    double acc = xi0;
    for (std::size_t i = 0; i + 1 <= idx; ++i)
        acc += mu2(theta_left[i]) * (times[i + 1] - times[i]);
    return acc + times[idx] * xi_l_big_jump_rate;
}

} // namespace mapmart
