#pragma once

#include <vector>

#include "mapmart/map_model.hpp"
#include "mapmart/path_sim.hpp"

namespace mapmart {

enum class PowerFamily { ThetaPower, XiLPower, XiFPower };

// A square-integrable martingale realized on one path's grid: compensated
// values, per-event jump sizes, and the coefficients it carries on the two
// Brownian order-1 martingales (the only nonzero continuous parts in the
// model). Linear combinations stay closed under this form, which is what
// makes cross-variation exact over jumps.
struct MartingaleView {
    const MapPath* path = nullptr;
    std::vector<double> values;      // compensated, values[0] = 0
    std::vector<double> event_jumps; // indexed like path->events
    double brown_theta_coeff = 0.0;  // loading on sigma1 * B
    double brown_xi_l_coeff = 0.0;   // loading on int sigma2(Theta) dW

    MartingaleView scaled(double c) const;
    void add_scaled(const MartingaleView& other, double c);
};

// Power jump process of one family and order with its compensated version.
struct PowerJumpPath {
    PowerFamily family = PowerFamily::XiLPower;
    int order = 1;
    std::vector<double> raw;  // k >= 2: exact jump sums; k = 1: the process
    MartingaleView bar;       // the Teugels martingale
};

// Exact jump-sum construction from the path's jump records. Order 1 returns
// the compensated original processes (theta-bar, xi^L-bar, xi^f-bar).
PowerJumpPath power_jump(const MapPath& path, const CompensatorSpec& comp,
                         const CoefficientFn& mu2, PowerFamily family, int k);

// Left-point Riemann sum of sigma2(Theta_s)^2 over [0, t] on the path grid.
double sigma2_sq_integral(const MapPath& path, const CoefficientFn& sigma2, double t);

// Realized cross-variation [a, b]_t: the exact sum of simultaneous-jump
// products plus the model's continuous bracket (sigma1^2 t between the
// theta-Brownian loadings, the sigma2^2 Riemann integral between the
// ordinate-Brownian loadings; cross terms vanish, B and W independent).
double cross_variation(const MartingaleView& a, const MartingaleView& b,
                       double t, const MapSpec& spec);

} // namespace mapmart
