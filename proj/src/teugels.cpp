#include "mapmart/teugels.hpp"

#include <cmath>

#include "mapmart/errors.hpp"

namespace mapmart {

MartingaleView MartingaleView::scaled(double c) const {
    MartingaleView out = *this;
    for (auto& v : out.values) v *= c;
    for (auto& v : out.event_jumps) v *= c;
    out.brown_theta_coeff *= c;
    out.brown_xi_l_coeff *= c;
    return out;
}

void MartingaleView::add_scaled(const MartingaleView& other, double c) {
    if (path == nullptr) {
        path = other.path;
        values.assign(other.values.size(), 0.0);
        event_jumps.assign(other.event_jumps.size(), 0.0);
    }
    if (path != other.path)
        throw SchemaError("mismatched-parent-path: cannot combine martingales "
                          "built from different paths");
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] += c * other.values[i];
    for (std::size_t i = 0; i < event_jumps.size(); ++i)
        event_jumps[i] += c * other.event_jumps[i];
    brown_theta_coeff += c * other.brown_theta_coeff;
    brown_xi_l_coeff += c * other.brown_xi_l_coeff;
}

PowerJumpPath power_jump(const MapPath& path, const CompensatorSpec& comp,
                         const CoefficientFn& mu2, PowerFamily family, int k) {
    if (k < 1) throw SchemaError("order-zero: power jump order must be >= 1");
    if (k > 2 * comp.k_max)
        throw SchemaError("order-too-high: power jump order exceeds 2*K_max");

    const std::size_t n = path.size();
    PowerJumpPath out;
    out.family = family;
    out.order = k;
    out.raw.assign(n, 0.0);
    out.bar.path = &path;
    out.bar.values.assign(n, 0.0);
    out.bar.event_jumps.assign(path.events.size(), 0.0);

    // Jump size this family picks up at each event.
    for (std::size_t e = 0; e < path.events.size(); ++e) {
        const auto& ev = path.events[e];
        double jump = 0.0;
        switch (family) {
        case PowerFamily::ThetaPower:
            if (ev.modulator) jump = std::pow(ev.theta_jump, k);
            break;
        case PowerFamily::XiLPower:
            if (!ev.modulator) jump = std::pow(ev.xi_l_jump, k);
            break;
        case PowerFamily::XiFPower:
            if (ev.modulator) jump = std::pow(ev.trig_jump, k);
            break;
        }
        out.bar.event_jumps[e] = jump;
    }

    if (k == 1 && family == PowerFamily::ThetaPower) {
        out.raw = path.theta;
        out.bar.brown_theta_coeff = 1.0;
        for (std::size_t i = 0; i < n; ++i)
            out.bar.values[i] = path.theta[i] - comp.theta_mean_rate * path.times[i];
        return out;
    }
    if (k == 1 && family == PowerFamily::XiLPower) {
        out.raw = path.xi_l;
        out.bar.brown_xi_l_coeff = 1.0;
        // Random compensator E[xi^L_t | K_t]: same left-point quadrature as
        // the simulator, so the bar process is drift-free on the grid.
        double drift = comp.xi0;
        out.bar.values[0] = path.xi_l[0] - drift;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            drift += mu2(path.theta[i]) * (path.times[i + 1] - path.times[i]);
            out.bar.values[i + 1] = path.xi_l[i + 1] - drift -
                                    comp.xi_l_big_jump_rate * path.times[i + 1];
        }
        return out;
    }

    // Pure jump-sum construction (k >= 2 for theta / xi^L; every k for xi^f).
    double rate = 0.0;
    switch (family) {
    case PowerFamily::ThetaPower: rate = comp.theta_power_rate[k]; break;
    case PowerFamily::XiLPower: rate = comp.xi_l_power_rate[k]; break;
    case PowerFamily::XiFPower: rate = comp.xi_f_power_rate[k]; break;
    }
    double acc = 0.0;
    std::size_t e = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (e < path.events.size() && path.events[e].grid_index == i)
            acc += out.bar.event_jumps[e++];
        out.raw[i] = acc;
        out.bar.values[i] = acc - rate * path.times[i];
    }
    return out;
}

double sigma2_sq_integral(const MapPath& path, const CoefficientFn& sigma2, double t) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (path.times[i] >= t) break;
        const double upper = std::min(path.times[i + 1], t);
        const double s2 = sigma2(path.theta[i]);
        acc += s2 * s2 * (upper - path.times[i]);
    }
    return acc;
}

double cross_variation(const MartingaleView& a, const MartingaleView& b,
                       double t, const MapSpec& spec) {
    if (a.path == nullptr || a.path != b.path)
        throw SchemaError("mismatched-parent-path: cross variation needs both "
                          "martingales on one path");
    const MapPath& path = *a.path;
    if (t > path.horizon() * (1.0 + 1e-12))
        throw SchemaError("time-beyond-horizon");

    double acc = 0.0;
    for (std::size_t e = 0; e < path.events.size(); ++e) {
        if (path.events[e].time > t) break;
        acc += a.event_jumps[e] * b.event_jumps[e];
    }
    if (a.brown_theta_coeff != 0.0 && b.brown_theta_coeff != 0.0)
        acc += a.brown_theta_coeff * b.brown_theta_coeff * spec.sigma1 * spec.sigma1 * t;
    if (a.brown_xi_l_coeff != 0.0 && b.brown_xi_l_coeff != 0.0)
        acc += a.brown_xi_l_coeff * b.brown_xi_l_coeff *
               sigma2_sq_integral(path, spec.sigma2, t);
    return acc;
}

} // namespace mapmart
