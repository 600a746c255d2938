#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mapmart/map_model.hpp"
#include "mapmart/teugels.hpp"

namespace mapmart {

// Abstract basis symbol: x^k stands for a power of the modulator jump size,
// y^k for a power of the triggered jump size.
struct BasisLabel {
    char var = 'x';
    int power = 0;
    std::string str() const;
};

enum class SpaceKind { S1, S3 };

// A finite chunk of one of the section-3 inner-product spaces, represented by
// its Gram matrix over ordered labels.
struct InnerProductSpec {
    SpaceKind kind = SpaceKind::S1;
    Eigen::MatrixXd gram;
    double alpha = 0.0; // S1 point-mass weight (S3 folds sigma1^2 into gram)
    std::vector<BasisLabel> labels;
};

// S1 Gram over labels x^0..x^{K-1} (label x^{k-1} stands for the k-th ordinate
// Teugels martingale): gram[i][j] = m_{i+j+2}(nu2) + alpha 1{i=j=0}. The x^2
// weight of the inner product shifts moment orders by two.
InnerProductSpec build_s1(const MomentTable& nu2_moments, double alpha, int K);

// S3 Gram over labels {x^0..x^{k-1}, y^1..y^l}: the xx block is
// m_{i+j+2}(nu1) + sigma1^2 1{i=j=0}, the xy block c_{j,i+1} (one extra x
// power from the weight), the yy block c_{i+j,0}.
InnerProductSpec build_s3(const MomentTable& nu1_u_moments, double sigma1,
                          int k, int l);

// Coefficient triangles of the orthogonal martingale families. Row r holds
// the coefficients of the r-th orthogonal element over the space's labels,
// monic on its own label.
struct OrthogonalBasis {
    InnerProductSpec space;
    Eigen::MatrixXd coeffs; // lower triangular, unit diagonal
    Eigen::VectorXd norms;  // squared norms under the Gram metric
};

// Modified Gram-Schmidt in the Gram-matrix metric. Throws NumericError
// "degenerate-direction" naming the offending label when a squared norm
// falls below 1e-12 times the largest Gram diagonal.
OrthogonalBasis gram_schmidt(const InnerProductSpec& space);

// Pointwise linear combinations of the supplied power-jump martingales: the
// H family from xi^L bars, the G family from theta + xi^f bars. The powers
// must all come from one path and cover every label.
std::vector<MartingaleView> materialize(const OrthogonalBasis& basis,
                                        const std::vector<PowerJumpPath>& powers);

// The S1 point-mass weight alpha = E[ int_0^1 sigma2^2(Theta_s) ds ]: exact
// when sigma2 is constant, otherwise a Monte Carlo estimate with its stderr.
struct AlphaEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    bool analytic = true;
    std::size_t n_paths = 0;
};

AlphaEstimate estimate_alpha(const MapSpec& spec, double dt, std::uint64_t seed,
                             std::size_t n_paths);

} // namespace mapmart
