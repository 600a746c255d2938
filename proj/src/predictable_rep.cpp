#include "mapmart/predictable_rep.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "mapmart/errors.hpp"
#include "mapmart/path_sim.hpp"
#include "mapmart/rng.hpp"
#include "mapmart/teugels.hpp"

namespace mapmart {

Payoff Payoff::terminal_ordinate() { return Payoff{}; }

Payoff Payoff::terminal_square() {
    Payoff f;
    f.kind = Kind::TerminalSquare;
    return f;
}

Payoff Payoff::monomial(int g, int p, int b) {
    if (g < 0 || p < 0 || b < 0 || g + p + b < 1)
        throw SchemaError("payoff-degree: monomial needs g + p + b >= 1");
    Payoff f;
    f.kind = Kind::Monomial;
    f.g = g;
    f.p = p;
    f.b = b;
    return f;
}

Payoff Payoff::polynomial(std::vector<Term> combo) {
    if (combo.empty()) throw SchemaError("payoff-empty-combo");
    Payoff f;
    f.kind = Kind::PolynomialCombo;
    f.combo = std::move(combo);
    return f;
}

std::string Payoff::name() const {
    switch (kind) {
    case Kind::TerminalOrdinate: return "terminal_ordinate";
    case Kind::TerminalSquare: return "terminal_square";
    case Kind::Monomial: {
        std::ostringstream os;
        os << "monomial(" << g << "," << p << "," << b << ")";
        return os.str();
    }
    case Kind::PolynomialCombo: return "polynomial_combo";
    }
    return "?";
}

namespace {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Monomial list view of a payoff in (thetabar, xibarL, xibarF); the two
// terminal kinds expand xibar = xibarL + xibarF binomially.
std::vector<Payoff::Term> monomial_terms(const Payoff& payoff) {
    switch (payoff.kind) {
    case Payoff::Kind::TerminalOrdinate:
        return {{1.0, 0, 1, 0}, {1.0, 0, 0, 1}};
    case Payoff::Kind::TerminalSquare:
        return {{1.0, 0, 2, 0}, {2.0, 0, 1, 1}, {1.0, 0, 0, 2}};
    case Payoff::Kind::Monomial:
        return {{1.0, payoff.g, payoff.p, payoff.b}};
    case Payoff::Kind::PolynomialCombo:
        return payoff.combo;
    }
    return {};
}

// Joint raw moments of the compensated increment triple over duration tau,
// computed from cumulants. Valid when mu2 and sigma2 are constant, which
// makes (thetabar, xibarL-bar, xibarF-bar) a Levy triple with independent
// stationary increments.
class IncrementMoments {
public:
    explicit IncrementMoments(const MapSpec& spec) : spec_(spec) {}

    double moment(int a, int c, int d, double tau) {
        if (a < 0 || c < 0 || d < 0) return 0.0;
        if (a + c + d == 0) return 1.0;
        const auto key = std::array<int, 3>{a, c, d};
        auto it = memo_.find(key);
        if (it == memo_.end()) {
            it = memo_.emplace(key, build_poly(a, c, d)).first;
        }
        // Polynomial in tau, constant term zero.
        double v = 0.0, tp = 1.0;
        for (double coeff : it->second) {
            v += coeff * tp;
            tp *= tau;
        }
        return v;
    }

private:
    // Cumulant rate of order (a, c, d): all cumulants are linear in tau.
    double cumulant_rate(int a, int c, int d) const {
        if (a + c + d < 2) return 0.0;
        double r = 0.0;
        if (c == 0) {
            // Modulator events move theta and the triggered jump together.
            r += joint_moment(spec_.nu1, spec_.u_law, d, a);
        }
        if (a == 0 && d == 0) r += scalar_moment(spec_.nu2, c);
        if (a == 2 && c == 0 && d == 0) r += spec_.sigma1 * spec_.sigma1;
        if (a == 0 && c == 2 && d == 0) {
            const double s2 = spec_.sigma2.value;
            r += s2 * s2;
        }
        return r;
    }

    // Moments from cumulants: pick the first active coordinate i and use
    // mu_alpha = sum_{beta <= alpha - e_i} C(alpha-e_i, beta)
    //            kappa_{beta+e_i} mu_{alpha-e_i-beta}.
    // Represented as polynomials in tau for exactness.
    std::vector<double> build_poly(int a, int c, int d) {
        const int deg = a + c + d;
        std::vector<double> poly(deg + 1, 0.0);
        int e[3] = {0, 0, 0};
        if (a >= 1)
            e[0] = 1;
        else if (c >= 1)
            e[1] = 1;
        else
            e[2] = 1;
        const int ra = a - e[0], rc = c - e[1], rd = d - e[2];
        for (int ba = 0; ba <= ra; ++ba)
            for (int bc = 0; bc <= rc; ++bc)
                for (int bd = 0; bd <= rd; ++bd) {
                    const double rate =
                        cumulant_rate(ba + e[0], bc + e[1], bd + e[2]);
                    if (rate == 0.0) continue;
                    const double cb = binomial(ra, ba) * binomial(rc, bc) *
                                      binomial(rd, bd);
                    // kappa = rate * tau; multiply by the lower moment poly.
                    const auto& lower =
                        lower_poly(ra - ba, rc - bc, rd - bd, deg);
                    for (std::size_t j = 0; j + 1 < poly.size() && j < lower.size(); ++j)
                        poly[j + 1] += cb * rate * lower[j];
                }
        return poly;
    }

    const std::vector<double>& lower_poly(int a, int c, int d, int cap) {
        const auto key = std::array<int, 3>{a, c, d};
        auto it = memo_.find(key);
        if (it == memo_.end()) {
            if (a + c + d == 0) {
                static const std::vector<double> one{1.0};
                return one;
            }
            it = memo_.emplace(key, build_poly(a, c, d)).first;
        }
        (void)cap;
        return it->second;
    }

    const MapSpec& spec_;
    std::map<std::array<int, 3>, std::vector<double>> memo_;
};

// Everything replicate() needs from one path, bucketed.
struct PathSample {
    std::vector<double> dz;        // [bucket * nq + q] integrator increments
    std::vector<double> theta_at;  // thetabar at bucket starts
    std::vector<double> xi_at;     // xibar at bucket starts
    std::vector<double> dm;        // target increments per bucket
    double payoff = 0.0;
    // Known-integrand replication value when available, else NaN.
    double known_replication = 0.0;
    bool has_known = false;
};

struct Extractor {
    const MapSpec& spec;
    const CompensatorSpec& comp;
    int K;
    std::size_t nb;
    std::vector<Payoff::Term> terms;
    bool exact_target = false;
    Payoff::Kind kind;
    IncrementMoments* moments = nullptr;

    std::size_t n_integrators() const {
        return 1 + static_cast<std::size_t>(K - 1) + static_cast<std::size_t>(K) +
               static_cast<std::size_t>(K);
    }

    PathSample extract(const MapPath& path) const {
        const double T = path.horizon();
        const std::size_t nq = n_integrators();

        // Bucket boundary grid indices (first grid point at or past q*T/nb).
        std::vector<std::size_t> bound(nb + 1, 0);
        for (std::size_t q = 1; q <= nb; ++q) {
            const double tq = T * static_cast<double>(q) / static_cast<double>(nb);
            bound[q] = static_cast<std::size_t>(
                std::lower_bound(path.times.begin(), path.times.end(),
                                 tq - 1e-12) -
                path.times.begin());
        }
        bound[nb] = path.size() - 1;

        // Bar processes.
        const auto thetas = bars(path, PowerFamily::ThetaPower, K);
        const auto xils = bars(path, PowerFamily::XiLPower, std::max(K, 1));
        const auto xifs = bars(path, PowerFamily::XiFPower, K);

        PathSample s;
        s.dz.assign(nb * nq, 0.0);
        s.theta_at.assign(nb, 0.0);
        s.xi_at.assign(nb, 0.0);
        s.dm.assign(nb, 0.0);

        auto value_at = [&](const std::vector<std::vector<double>>& fam, int k,
                            std::size_t gi) { return fam[static_cast<std::size_t>(k - 1)][gi]; };

        for (std::size_t i = 0; i < nb; ++i) {
            const std::size_t a = bound[i], b2 = bound[i + 1];
            s.theta_at[i] = value_at(thetas, 1, a);
            s.xi_at[i] = value_at(xils, 1, a) + value_at(xifs, 1, a);
            std::size_t q = 0;
            // d xibar
            s.dz[i * nq + q++] = (value_at(xils, 1, b2) + value_at(xifs, 1, b2)) -
                                 (value_at(xils, 1, a) + value_at(xifs, 1, a));
            for (int k = 2; k <= K; ++k)
                s.dz[i * nq + q++] = value_at(xils, k, b2) - value_at(xils, k, a);
            for (int l = 1; l <= K; ++l)
                s.dz[i * nq + q++] = value_at(xifs, l, b2) - value_at(xifs, l, a);
            for (int m = 1; m <= K; ++m)
                s.dz[i * nq + q++] = value_at(thetas, m, b2) - value_at(thetas, m, a);
        }

        // Payoff and targets.
        auto mono_at = [&](std::size_t gi, int g, int p, int b) {
            return std::pow(value_at(thetas, 1, gi), g) *
                   std::pow(value_at(xils, 1, gi), p) *
                   std::pow(value_at(xifs, 1, gi), b);
        };
        s.payoff = 0.0;
        for (const auto& t : terms) s.payoff += t.weight * mono_at(path.size() - 1, t.g, t.p, t.b);

        if (exact_target) {
            // M_t = E[F | F_t] expanded over the independent increment.
            std::vector<double> m_at(nb + 1, 0.0);
            for (std::size_t i = 0; i <= nb; ++i) {
                const std::size_t gi = bound[i];
                const double tau = T - path.times[gi];
                const double A = value_at(thetas, 1, gi);
                const double C = value_at(xils, 1, gi);
                const double D = value_at(xifs, 1, gi);
                double m = 0.0;
                for (const auto& t : terms) {
                    double acc = 0.0;
                    for (int ia = 0; ia <= t.g; ++ia)
                        for (int ic = 0; ic <= t.p; ++ic)
                            for (int id = 0; id <= t.b; ++id) {
                                const double mom = moments->moment(
                                    t.g - ia, t.p - ic, t.b - id, tau);
                                if (mom == 0.0) continue;
                                acc += binomial(t.g, ia) * binomial(t.p, ic) *
                                       binomial(t.b, id) * std::pow(A, ia) *
                                       std::pow(C, ic) * std::pow(D, id) * mom;
                            }
                    m += t.weight * acc;
                }
                m_at[i] = m;
            }
            for (std::size_t i = 0; i < nb; ++i) s.dm[i] = m_at[i + 1] - m_at[i];
        } else {
            for (std::size_t i = 0; i < nb; ++i) s.dm[i] = s.payoff;
        }

        // Known-integrand replication for the floor.
        const std::size_t nq0 = nq;
        if (kind == Payoff::Kind::TerminalOrdinate) {
            double r = 0.0;
            for (std::size_t i = 0; i < nb; ++i) r += s.dz[i * nq0 + 0];
            s.known_replication = r;
            s.has_known = true;
        } else if (kind == Payoff::Kind::TerminalSquare && K >= 2) {
            // F = xibar_T^2: h_xi = 2 xibar_{s-}, unit loads on the order-2
            // ordinate and triggered bars, frozen at bucket starts.
            double r = 0.0;
            for (std::size_t i = 0; i < nb; ++i) {
                r += 2.0 * s.xi_at[i] * s.dz[i * nq0 + 0];
                r += s.dz[i * nq0 + 1];                       // d xibarL^(2)
                r += s.dz[i * nq0 + (1 + (K - 1) + 1)];       // d xibarF^[2]
            }
            s.known_replication = r;
            s.has_known = true;
        } else if (kind == Payoff::Kind::Monomial &&
                   ((terms[0].g + terms[0].p + terms[0].b) == 1)) {
            // Degree-1 monomials are exact single integrals.
            double r = 0.0;
            for (std::size_t i = 0; i < nb; ++i) {
                if (terms[0].p == 1)
                    r += s.dz[i * nq0 + 0] - s.dz[i * nq0 + (1 + (K - 1))];
                else if (terms[0].b == 1)
                    r += s.dz[i * nq0 + (1 + (K - 1))];
                else
                    r += s.dz[i * nq0 + (1 + (K - 1) + K)];
            }
            s.known_replication = r;
            s.has_known = true;
        }
        return s;
    }

private:
    std::vector<std::vector<double>> bars(const MapPath& path, PowerFamily fam,
                                          int upto) const {
        std::vector<std::vector<double>> out;
        out.reserve(static_cast<std::size_t>(upto));
        for (int k = 1; k <= upto; ++k)
            out.push_back(power_jump(path, comp, spec.mu2, fam, k).bar.values);
        return out;
    }
};

} // namespace

double ReplicationReport::integrand(std::size_t bucket, std::size_t integrator,
                                    double theta_bar, double xi_bar) const {
    const auto& c = coeffs[bucket][integrator];
    return c[0] + c[1] * theta_bar + c[2] * xi_bar;
}

ReplicationReport replicate(const MapSpec& spec, const Payoff& payoff, int K,
                            std::size_t n_paths, double dt, std::uint64_t seed,
                            std::size_t n_buckets) {
    if (K < 1 || K > spec.k_max)
        throw SchemaError("order-too-high: replication basis order exceeds K_max");
    if (n_paths < 200) throw SchemaError("n-paths-too-small: need >= 200");
    if (n_buckets < 1) throw SchemaError("buckets-nonpositive");

    const CompensatorSpec comp = compensators(spec);
    IncrementMoments moments(spec);

    Extractor ex{spec, comp, K, n_buckets, monomial_terms(payoff), false,
                 payoff.kind, &moments};
    ex.exact_target = spec.mu2.is_constant() && spec.sigma2.is_constant();

    const std::size_t nq = ex.n_integrators();
    const std::size_t nf = 3; // features 1, thetabar, xibar
    const std::size_t P = nq * nf;

    // Per-bucket normal equations accumulated in path order (training set).
    std::vector<Eigen::MatrixXd> xtx(n_buckets, Eigen::MatrixXd::Zero(P, P));
    std::vector<Eigen::VectorXd> xty(n_buckets, Eigen::VectorXd::Zero(P));

    const std::size_t n_train = n_paths / 2;
    const std::size_t n_hold = n_paths - n_train;
    const std::uint64_t train_base = path_seed(seed, 0xA11CE);
    const std::uint64_t hold_base = path_seed(seed, 0xB0B);

    Eigen::VectorXd row(P);
    simulate_batch(spec, dt, train_base, n_train,
                   [&](std::size_t, const MapPath& path) {
                       const PathSample s = ex.extract(path);
                       for (std::size_t i = 0; i < n_buckets; ++i) {
                           for (std::size_t q = 0; q < nq; ++q) {
                               const double dz = s.dz[i * nq + q];
                               row(static_cast<Eigen::Index>(q * nf + 0)) = dz;
                               row(static_cast<Eigen::Index>(q * nf + 1)) = dz * s.theta_at[i];
                               row(static_cast<Eigen::Index>(q * nf + 2)) = dz * s.xi_at[i];
                           }
                           xtx[i].selfadjointView<Eigen::Lower>().rankUpdate(row);
                           xty[i] += row * s.dm[i];
                       }
                   });

    ReplicationReport rep;
    rep.basis_order = K;
    rep.n_paths = n_paths; // split 50/50 into training and held-out sets
    rep.n_buckets = n_buckets;
    rep.dt = dt;
    rep.seed = seed;
    rep.exact_target = ex.exact_target;
    rep.integrator_names.push_back("xi");
    for (int k = 2; k <= K; ++k)
        rep.integrator_names.push_back("L" + std::to_string(k));
    for (int l = 1; l <= K; ++l)
        rep.integrator_names.push_back("f" + std::to_string(l));
    for (int m = 1; m <= K; ++m)
        rep.integrator_names.push_back("T" + std::to_string(m));
    for (std::size_t i = 0; i < n_buckets; ++i)
        rep.bucket_starts.push_back(spec.horizon * static_cast<double>(i) /
                                    static_cast<double>(n_buckets));

    // Solve per bucket; singular systems fall back to a reported ridge.
    rep.coeffs.assign(n_buckets, std::vector<std::array<double, 3>>(
                                     nq, {0.0, 0.0, 0.0}));
    std::vector<Eigen::VectorXd> beta(n_buckets);
    for (std::size_t i = 0; i < n_buckets; ++i) {
        Eigen::MatrixXd a = xtx[i].selfadjointView<Eigen::Lower>();
        Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
        if (ok) {
            const double dmax = ldlt.vectorD().maxCoeff();
            const double dmin = ldlt.vectorD().minCoeff();
            ok = dmin > 1e-13 * std::max(dmax, 1.0);
        }
        if (!ok) {
            const double ridge =
                1e-10 * std::max(a.trace() / static_cast<double>(P), 1.0);
            rep.ridge = std::max(rep.ridge, ridge);
            a += ridge * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(P),
                                                   static_cast<Eigen::Index>(P));
            ldlt.compute(a);
        }
        beta[i] = ldlt.solve(xty[i]);
        for (std::size_t q = 0; q < nq; ++q)
            for (std::size_t r = 0; r < nf; ++r)
                rep.coeffs[i][q][r] = beta[i](static_cast<Eigen::Index>(q * nf + r));
    }

    // Held-out residuals.
    std::vector<double> resid, payoffs, known;
    resid.reserve(n_hold);
    payoffs.reserve(n_hold);
    bool any_known = true;
    simulate_batch(spec, dt, hold_base, n_hold,
                   [&](std::size_t, const MapPath& path) {
                       const PathSample s = ex.extract(path);
                       double r = s.payoff;
                       for (std::size_t i = 0; i < n_buckets; ++i)
                           for (std::size_t q = 0; q < nq; ++q)
                               r -= s.dz[i * nq + q] *
                                    rep.integrand(i, q, s.theta_at[i], s.xi_at[i]);
                       resid.push_back(r);
                       payoffs.push_back(s.payoff);
                       any_known = any_known && s.has_known;
                       if (s.has_known)
                           known.push_back(s.payoff - s.known_replication);
                   });
    auto variance = [](const std::vector<double>& xs, double* mean_out = nullptr) {
        double mean = 0.0, m2 = 0.0;
        std::size_t c = 0;
        for (double x : xs) {
            ++c;
            const double d = x - mean;
            mean += d / static_cast<double>(c);
            m2 += d * (x - mean);
        }
        if (mean_out != nullptr) *mean_out = mean;
        return c > 1 ? m2 / static_cast<double>(c - 1) : 0.0;
    };
    double mean_r = 0.0;
    rep.residual_variance = variance(resid, &mean_r);
    rep.payoff_variance = variance(payoffs);
    // stderr of the variance estimate: sqrt((m4 - var^2)/n).
    double m4_acc = 0.0;
    for (double x : resid) {
        const double d2 = (x - mean_r) * (x - mean_r) - rep.residual_variance;
        m4_acc += d2 * d2;
    }
    rep.residual_stderr = std::sqrt(m4_acc) / static_cast<double>(resid.size());
    if (any_known && !known.empty()) rep.floor_variance = variance(known);
    return rep;
}

} // namespace mapmart
