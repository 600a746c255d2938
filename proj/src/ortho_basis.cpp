#include "mapmart/ortho_basis.hpp"

#include <cmath>
#include <sstream>

#include "mapmart/errors.hpp"

namespace mapmart {

namespace {

void check_psd(const Eigen::MatrixXd& gram, const char* where) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                      Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    const double trace = gram.trace();
    if (min_eig < -1e-10 * std::max(trace, 1.0)) {
        std::ostringstream os;
        os << "psd-violation: " << where << " Gram has eigenvalue " << min_eig
           << " (trace " << trace << ")";
        throw NumericError(os.str());
    }
}

} // namespace

std::string BasisLabel::str() const {
    std::ostringstream os;
    os << var << '^' << power;
    return os.str();
}

InnerProductSpec build_s1(const MomentTable& nu2_moments, double alpha, int K) {
    if (K < 1 || K > nu2_moments.k_max)
        throw SchemaError("order-too-high: S1 size exceeds the moment table");
    if (!(alpha >= 0.0)) throw SchemaError("alpha-negative");
    InnerProductSpec s;
    s.kind = SpaceKind::S1;
    s.alpha = alpha;
    s.gram.resize(K, K);
    for (int i = 0; i < K; ++i) {
        s.labels.push_back({'x', i});
        for (int j = 0; j < K; ++j) {
            s.gram(i, j) = nu2_moments.m(i + j + 2);
            if (i == 0 && j == 0) s.gram(i, j) += alpha;
        }
    }
    check_psd(s.gram, "S1");
    return s;
}

InnerProductSpec build_s3(const MomentTable& nu1_u_moments, double sigma1,
                          int k, int l) {
    if (k < 0 || l < 0 || k + l < 1)
        throw SchemaError("order-too-low: S3 needs k >= 1 or l >= 1");
    if (k > nu1_u_moments.k_max || l > nu1_u_moments.k_max)
        throw SchemaError("order-too-high: S3 size exceeds the moment table");
    InnerProductSpec s;
    s.kind = SpaceKind::S3;
    const int n = k + l;
    s.gram.resize(n, n);
    for (int i = 0; i < k; ++i) s.labels.push_back({'x', i});
    for (int j = 1; j <= l; ++j) s.labels.push_back({'y', j});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const BasisLabel& a = s.labels[i];
            const BasisLabel& b = s.labels[j];
            double v;
            if (a.var == 'x' && b.var == 'x') {
                v = nu1_u_moments.m(a.power + b.power + 2);
                if (a.power == 0 && b.power == 0) v += sigma1 * sigma1;
            } else if (a.var == 'y' && b.var == 'y') {
                v = nu1_u_moments.c(a.power + b.power, 0);
            } else {
                const int yp = (a.var == 'y') ? a.power : b.power;
                const int xp = (a.var == 'x') ? a.power : b.power;
                v = nu1_u_moments.c(yp, xp + 1);
            }
            s.gram(i, j) = v;
        }
    }
    check_psd(s.gram, "S3");
    return s;
}

OrthogonalBasis gram_schmidt(const InnerProductSpec& space) {
    const auto n = space.gram.rows();
    const double max_diag = space.gram.diagonal().maxCoeff();
    OrthogonalBasis out;
    out.space = space;
    out.coeffs = Eigen::MatrixXd::Identity(n, n);
    out.norms = Eigen::VectorXd::Zero(n);

    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(n, i);
        // Modified step: project out previous directions one at a time.
        for (Eigen::Index j = 0; j < i; ++j) {
            const Eigen::VectorXd vj = out.coeffs.row(j).transpose();
            const double proj = vj.dot(space.gram * v) / out.norms(j);
            v -= proj * vj;
        }
        // v(i) is untouched by the projections (previous rows are supported
        // on earlier labels), so the row is monic by construction.
        const double norm = v.dot(space.gram * v);
        if (norm < 1e-12 * std::max(max_diag, 1.0)) {
            std::ostringstream os;
            os << "degenerate-direction: label " << space.labels[i].str()
               << " has squared norm " << norm
               << " after projection; drop the dependent label";
            throw NumericError(os.str());
        }
        out.coeffs.row(i) = v.transpose();
        out.norms(i) = norm;
    }
    return out;
}

std::vector<MartingaleView> materialize(const OrthogonalBasis& basis,
                                        const std::vector<PowerJumpPath>& powers) {
    const auto& labels = basis.space.labels;
    // Label x^i means order i+1 of the x family, y^j means order j of the
    // triggered family; the x family is theta for S3 and xi^L for S1.
    const PowerFamily x_family = basis.space.kind == SpaceKind::S1
                                     ? PowerFamily::XiLPower
                                     : PowerFamily::ThetaPower;
    std::vector<const MartingaleView*> slots(labels.size(), nullptr);
    for (std::size_t s = 0; s < labels.size(); ++s) {
        const PowerFamily want =
            labels[s].var == 'y' ? PowerFamily::XiFPower : x_family;
        const int order = labels[s].var == 'y' ? labels[s].power : labels[s].power + 1;
        for (const auto& p : powers) {
            if (p.family == want && p.order == order) {
                slots[s] = &p.bar;
                break;
            }
        }
        if (slots[s] == nullptr)
            throw SchemaError("missing-order: no power path for label " +
                              labels[s].str());
    }
    std::vector<MartingaleView> out;
    out.reserve(labels.size());
    for (Eigen::Index r = 0; r < basis.coeffs.rows(); ++r) {
        MartingaleView m;
        for (std::size_t s = 0; s < labels.size(); ++s) {
            const double c = basis.coeffs(r, static_cast<Eigen::Index>(s));
            if (c != 0.0) m.add_scaled(*slots[s], c);
        }
        out.push_back(std::move(m));
    }
    return out;
}

AlphaEstimate estimate_alpha(const MapSpec& spec, double dt, std::uint64_t seed,
                             std::size_t n_paths) {
    // alpha is the expectation of int_0^1 sigma2^2(Theta_s) ds; the unit
    // horizon matches the bracket expectations defining the inner products.
    AlphaEstimate est;
    if (spec.sigma2.is_constant()) {
        est.value = spec.sigma2.value * spec.sigma2.value;
        est.analytic = true;
        return est;
    }
    if (spec.horizon < 1.0)
        throw SchemaError("alpha-horizon-too-short: Monte Carlo alpha needs "
                          "horizon >= 1");
    est.analytic = false;
    est.n_paths = n_paths;
    const double t_end = 1.0;
    double mean = 0.0, m2 = 0.0;
    std::size_t count = 0;
    simulate_batch(spec, dt, seed, n_paths, [&](std::size_t, const MapPath& p) {
        const double v = sigma2_sq_integral(p, spec.sigma2, t_end);
        ++count;
        const double d = v - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (v - mean);
    });
    est.value = mean;
    est.stderr_ = count > 1 ? std::sqrt(m2 / (static_cast<double>(count) *
                                              (static_cast<double>(count) - 1)))
                            : 0.0;
    return est;
}

} // namespace mapmart
