#include "mapmart/monomial_chaos.hpp"

#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "mapmart/errors.hpp"
#include "mapmart/teugels.hpp"

namespace mapmart {

namespace {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void require_degree(int g, int p, int b) {
    if (g < 0 || p < 0 || b < 0 || g + p + b < 1)
        throw SchemaError("degree-too-low: need g + p + b >= 1");
    if (g + p + b > kChaosDegreeCap)
        throw SchemaError("degree-cap: g + p + b exceeds the desk-scale cap");
}

RepresentationTerm make_term(double coeff, RateSymbol rate, int rk, int rl,
                             ChaosIntegrator integ, bool s2kappa, int g, int p,
                             int b) {
    RepresentationTerm t;
    t.coeff = coeff;
    t.rate = rate;
    t.rate_k = rk;
    t.rate_l = rl;
    t.integrator = integ;
    t.sigma2_kappa = s2kappa;
    t.g = g;
    t.p = p;
    t.b = b;
    if (g + p + b > 0) t.children = expand(g, p, b).terms;
    return t;
}

} // namespace

MonomialExpansion expand(int g, int p, int b) {
    require_degree(g, p, b);
    MonomialExpansion out;
    out.g = g;
    out.p = p;
    out.b = b;
    auto& terms = out.terms;

    // First-order Ito terms against the order-1 bars.
    if (g >= 1)
        terms.push_back(make_term(g, RateSymbol::One, 0, 0,
                                  {IntegratorKind::ThetaBar, 1, 0}, false,
                                  g - 1, p, b));
    if (p >= 1)
        terms.push_back(make_term(p, RateSymbol::One, 0, 0,
                                  {IntegratorKind::XiLBar, 1, 0}, false, g,
                                  p - 1, b));
    if (b >= 1)
        terms.push_back(make_term(b, RateSymbol::One, 0, 0,
                                  {IntegratorKind::XiFBar, 0, 1}, false, g, p,
                                  b - 1));

    // Continuous brackets: [xibarL]^c has density sigma2^2(Theta_{s-}),
    // [thetabar]^c has density sigma1^2; all other continuous brackets vanish.
    if (p >= 2)
        terms.push_back(make_term(0.5 * p * (p - 1), RateSymbol::One, 0, 0,
                                  {IntegratorKind::Lebesgue, 0, 0}, true, g,
                                  p - 2, b));
    if (g >= 2)
        terms.push_back(make_term(0.5 * g * (g - 1), RateSymbol::Sigma1Sq, 0, 0,
                                  {IntegratorKind::Lebesgue, 0, 0}, false,
                                  g - 2, p, b));

    // Jump corrections at ordinate-Levy events: binomial orders >= 2, written
    // against the bar power-jump process plus its compensating rate.
    for (int m2 = 2; m2 <= p; ++m2) {
        const double c = binomial(p, m2);
        terms.push_back(make_term(c, RateSymbol::One, 0, 0,
                                  {IntegratorKind::XiLBar, m2, 0}, false, g,
                                  p - m2, b));
        terms.push_back(make_term(c, RateSymbol::XiLMoment, m2, 0,
                                  {IntegratorKind::Lebesgue, 0, 0}, false, g,
                                  p - m2, b));
    }

    // Jump corrections at modulator events, where theta and the triggered
    // jump move together: all (m1, m3) with m1 + m3 >= 2 survive, the pure
    // cases collapsing to the theta / triggered power-jump bars.
    for (int m1 = 0; m1 <= g; ++m1) {
        for (int m3 = 0; m3 <= b; ++m3) {
            if (m1 + m3 < 2) continue;
            const double c = binomial(g, m1) * binomial(b, m3);
            ChaosIntegrator integ;
            if (m3 == 0)
                integ = {IntegratorKind::ThetaBar, m1, 0};
            else if (m1 == 0)
                integ = {IntegratorKind::XiFBar, 0, m3};
            else
                integ = {IntegratorKind::ThetaXiFJoint, m1, m3};
            terms.push_back(make_term(c, RateSymbol::One, 0, 0, integ, false,
                                      g - m1, p, b - m3));
            terms.push_back(make_term(c, RateSymbol::JointMoment, m3, m1,
                                      {IntegratorKind::Lebesgue, 0, 0}, false,
                                      g - m1, p, b - m3));
        }
    }
    return out;
}

namespace {

// Per-path evaluation context: integrator increments and expansion prefix
// paths are built once and cached.
class Evaluator {
public:
    Evaluator(const MapPath& path, const MapSpec& spec,
              const CompensatorSpec& comp)
        : path_(path), spec_(spec), comp_(comp), n_(path.size()) {}

    // Prefix path of a full expansion (memoized by degree triple).
    const std::vector<double>& expansion_path(int g, int p, int b) {
        const auto key = std::array<int, 3>{g, p, b};
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        const MonomialExpansion ex = expand(g, p, b);
        std::vector<double> acc(n_, 0.0);
        for (const auto& t : ex.terms) add_term_path(acc, t);
        return memo_.emplace(key, std::move(acc)).first->second;
    }

    double term_terminal(const RepresentationTerm& t) {
        std::vector<double> acc(n_, 0.0);
        add_term_path(acc, t);
        return acc.back();
    }

    // Adds the term's prefix path into acc.
    void add_term_path(std::vector<double>& acc, const RepresentationTerm& t) {
        const double scale = t.coeff * rate_value(t);
        if (scale == 0.0) return;
        const std::vector<double>* inner = nullptr;
        if (t.g + t.p + t.b > 0) inner = &expansion_path(t.g, t.p, t.b);
        const std::vector<double>& dz = integrator_increments(t.integrator);
        double run = 0.0;
        for (std::size_t i = 0; i + 1 < n_; ++i) {
            double u = inner ? (*inner)[i] : 1.0;
            if (t.sigma2_kappa) {
                const double s2 = spec_.sigma2(path_.theta[i]);
                u *= s2 * s2;
            }
            run += u * dz[i];
            acc[i + 1] += scale * run;
        }
    }

    double lhs(int g, int p, int b) {
        build_order1();
        return std::pow(theta_bar_, g) * std::pow(xi_l_bar_, p) *
               std::pow(xi_f_bar_, b);
    }

private:
    double rate_value(const RepresentationTerm& t) const {
        switch (t.rate) {
        case RateSymbol::One:
            return 1.0;
        case RateSymbol::Sigma1Sq:
            return spec_.sigma1 * spec_.sigma1;
        case RateSymbol::XiLMoment:
            return scalar_moment(spec_.nu2, t.rate_k);
        case RateSymbol::JointMoment:
            return joint_moment(spec_.nu1, spec_.u_law, t.rate_k, t.rate_l);
        }
        return 0.0;
    }

    void build_order1() {
        if (order1_built_) return;
        const auto th = power_jump(path_, comp_, spec_.mu2, PowerFamily::ThetaPower, 1);
        const auto xl = power_jump(path_, comp_, spec_.mu2, PowerFamily::XiLPower, 1);
        const auto xf = power_jump(path_, comp_, spec_.mu2, PowerFamily::XiFPower, 1);
        theta_bar_ = th.bar.values.back();
        xi_l_bar_ = xl.bar.values.back();
        xi_f_bar_ = xf.bar.values.back();
        order1_built_ = true;
    }

    // Per-interval increments of the integrator; interval i covers
    // (times[i], times[i+1]] and includes any jump at times[i+1].
    const std::vector<double>& integrator_increments(const ChaosIntegrator& z) {
        const auto key = std::array<int, 3>{static_cast<int>(z.kind), z.mx, z.my};
        auto it = incr_memo_.find(key);
        if (it != incr_memo_.end()) return it->second;

        std::vector<double> dz(n_ - 1, 0.0);
        switch (z.kind) {
        case IntegratorKind::Lebesgue:
            for (std::size_t i = 0; i + 1 < n_; ++i)
                dz[i] = path_.times[i + 1] - path_.times[i];
            break;
        case IntegratorKind::ThetaBar: {
            const auto pj = power_jump(path_, comp_, spec_.mu2,
                                       PowerFamily::ThetaPower, z.mx);
            for (std::size_t i = 0; i + 1 < n_; ++i)
                dz[i] = pj.bar.values[i + 1] - pj.bar.values[i];
            break;
        }
        case IntegratorKind::XiLBar: {
            const auto pj = power_jump(path_, comp_, spec_.mu2,
                                       PowerFamily::XiLPower, z.mx);
            for (std::size_t i = 0; i + 1 < n_; ++i)
                dz[i] = pj.bar.values[i + 1] - pj.bar.values[i];
            break;
        }
        case IntegratorKind::XiFBar: {
            const auto pj = power_jump(path_, comp_, spec_.mu2,
                                       PowerFamily::XiFPower, z.my);
            for (std::size_t i = 0; i + 1 < n_; ++i)
                dz[i] = pj.bar.values[i + 1] - pj.bar.values[i];
            break;
        }
        case IntegratorKind::ThetaXiFJoint: {
            // Compensated joint power-jump process: jumps x^mx y^my at
            // modulator events, rate c_{my,mx}.
            const double rate = joint_moment(spec_.nu1, spec_.u_law, z.my, z.mx);
            std::vector<double> jump_at(n_, 0.0);
            for (const auto& ev : path_.events)
                if (ev.modulator)
                    jump_at[ev.grid_index] = std::pow(ev.theta_jump, z.mx) *
                                             std::pow(ev.trig_jump, z.my);
            for (std::size_t i = 0; i + 1 < n_; ++i)
                dz[i] = jump_at[i + 1] -
                        rate * (path_.times[i + 1] - path_.times[i]);
            break;
        }
        }
        return incr_memo_.emplace(key, std::move(dz)).first->second;
    }

    const MapPath& path_;
    const MapSpec& spec_;
    const CompensatorSpec& comp_;
    std::size_t n_;
    std::map<std::array<int, 3>, std::vector<double>> memo_;
    std::map<std::array<int, 3>, std::vector<double>> incr_memo_;
    bool order1_built_ = false;
    double theta_bar_ = 0.0, xi_l_bar_ = 0.0, xi_f_bar_ = 0.0;
};

} // namespace

PathwiseCheck evaluate(const MonomialExpansion& expansion, const MapPath& path,
                       const MapSpec& spec, const CompensatorSpec& comp) {
    Evaluator ev(path, spec, comp);
    PathwiseCheck chk;
    chk.dt = path.dt;
    chk.lhs = ev.lhs(expansion.g, expansion.p, expansion.b);
    chk.rhs = ev.expansion_path(expansion.g, expansion.p, expansion.b).back();
    chk.abs_error = std::abs(chk.lhs - chk.rhs);
    chk.rel_error = chk.abs_error / (1.0 + std::abs(chk.lhs));
    chk.mesh_warning = chk.rel_error > 0.5;
    return chk;
}

double lebesgue_part(const MonomialExpansion& expansion, const MapPath& path,
                     const MapSpec& spec, const CompensatorSpec& comp) {
    Evaluator ev(path, spec, comp);
    double out = 0.0;
    for (const auto& t : expansion.terms)
        if (t.integrator.kind == IntegratorKind::Lebesgue)
            out += ev.term_terminal(t);
    return out;
}

namespace {

std::string integrator_name(const ChaosIntegrator& z) {
    std::ostringstream os;
    switch (z.kind) {
    case IntegratorKind::ThetaBar: os << "dThetaBar^(" << z.mx << ")"; break;
    case IntegratorKind::XiLBar: os << "dXiLBar^(" << z.mx << ")"; break;
    case IntegratorKind::XiFBar: os << "dXiFBar^[" << z.my << "]"; break;
    case IntegratorKind::ThetaXiFJoint:
        os << "dJoint^(" << z.mx << "," << z.my << ")";
        break;
    case IntegratorKind::Lebesgue: os << "ds"; break;
    }
    return os.str();
}

void render_terms(std::ostringstream& os, const std::vector<RepresentationTerm>& terms,
                  int indent) {
    for (const auto& t : terms) {
        for (int i = 0; i < indent; ++i) os << "  ";
        os << t.coeff;
        switch (t.rate) {
        case RateSymbol::One: break;
        case RateSymbol::Sigma1Sq: os << " * sigma1^2"; break;
        case RateSymbol::XiLMoment: os << " * m_" << t.rate_k << "(nu2)"; break;
        case RateSymbol::JointMoment:
            os << " * c_{" << t.rate_k << "," << t.rate_l << "}";
            break;
        }
        os << " * Int[ ";
        if (t.g + t.p + t.b == 0)
            os << "1";
        else
            os << "ThetaBar^" << t.g << " XiLBar^" << t.p << " XiFBar^" << t.b;
        if (t.sigma2_kappa) os << " * sigma2^2(Theta_{s-})";
        os << " ] " << integrator_name(t.integrator) << "\n";
        render_terms(os, t.children, indent + 1);
    }
}

} // namespace

std::string render(const MonomialExpansion& expansion) {
    std::ostringstream os;
    os << "ThetaBar^" << expansion.g << " XiLBar^" << expansion.p << " XiFBar^"
       << expansion.b << " =\n";
    render_terms(os, expansion.terms, 1);
    return os.str();
}

} // namespace mapmart
