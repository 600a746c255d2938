#include "mapmart/model_json.hpp"

#include <cstdint>
#include <set>
#include <sstream>

#include "mapmart/errors.hpp"

namespace mapmart {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::set<std::string>& required, const char* where) {
    if (!j.is_object())
        throw SchemaError(std::string("schema: ") + where + " must be an object");
    for (const auto& item : j.items()) {
        if (allowed.find(item.key()) == allowed.end())
            throw SchemaError(std::string("schema: unknown key '") + item.key() +
                              "' in " + where);
    }
    for (const auto& k : required) {
        if (!j.contains(k))
            throw SchemaError(std::string("schema: missing key '") + k + "' in " +
                              where);
    }
}

double number(const json& j, const char* key, const char* where) {
    const auto& v = j.at(key);
    if (!v.is_number())
        throw SchemaError(std::string("schema: '") + key + "' in " + where +
                          " must be a number");
    return v.get<double>();
}

} // namespace

nlohmann::json to_json(const JumpLaw& law) {
    switch (law.type) {
    case JumpLawType::Gaussian:
        return {{"type", "gaussian"}, {"mean", law.a}, {"stddev", law.b}};
    case JumpLawType::Uniform:
        return {{"type", "uniform"}, {"lo", law.a}, {"hi", law.b}};
    case JumpLawType::TwoPoint:
        return {{"type", "two_point"}, {"x1", law.a}, {"p1", law.b},
                {"x2", law.c}, {"p2", law.d}};
    case JumpLawType::Exponential:
        return {{"type", "exponential"}, {"rate", law.a}, {"sign", law.b}};
    }
    return {};
}

JumpLaw jump_law_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw SchemaError("schema: jump law needs a 'type'");
    const std::string type = j.at("type").get<std::string>();
    if (type == "gaussian") {
        require_keys(j, {"type", "mean", "stddev"}, {"mean", "stddev"}, "law");
        return JumpLaw::gaussian(number(j, "mean", "law"), number(j, "stddev", "law"));
    }
    if (type == "uniform") {
        require_keys(j, {"type", "lo", "hi"}, {"lo", "hi"}, "law");
        return JumpLaw::uniform(number(j, "lo", "law"), number(j, "hi", "law"));
    }
    if (type == "two_point") {
        require_keys(j, {"type", "x1", "p1", "x2", "p2"}, {"x1", "p1", "x2", "p2"},
                     "law");
        return JumpLaw::two_point(number(j, "x1", "law"), number(j, "p1", "law"),
                                  number(j, "x2", "law"), number(j, "p2", "law"));
    }
    if (type == "exponential") {
        require_keys(j, {"type", "rate", "sign"}, {"rate", "sign"}, "law");
        return JumpLaw::exponential(number(j, "rate", "law"),
                                    number(j, "sign", "law"));
    }
    throw SchemaError("schema: unknown jump law type '" + type + "'");
}

nlohmann::json to_json(const LevyMeasureSpec& spec) {
    return {{"intensity", spec.intensity}, {"law", to_json(spec.law)}};
}

LevyMeasureSpec levy_measure_from_json(const nlohmann::json& j) {
    require_keys(j, {"intensity", "law"}, {"intensity"}, "measure");
    LevyMeasureSpec s;
    s.intensity = number(j, "intensity", "measure");
    if (s.intensity > 0.0 || j.contains("law"))
        s.law = jump_law_from_json(j.at("law"));
    return s;
}

nlohmann::json to_json(const TriggeredJumpLaw& u) {
    switch (u.kind) {
    case TriggeredJumpLaw::Kind::Deterministic:
        return {{"type", "deterministic"}, {"scale", u.scale}};
    case TriggeredJumpLaw::Kind::Affine:
        return {{"type", "affine"}, {"a", u.a}, {"b", u.b}, {"sigma_u", u.sigma_u}};
    case TriggeredJumpLaw::Kind::Independent:
        return {{"type", "independent"}, {"law", to_json(*u.law)}};
    }
    return {};
}

TriggeredJumpLaw triggered_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw SchemaError("schema: triggered law needs a 'type'");
    const std::string type = j.at("type").get<std::string>();
    if (type == "deterministic") {
        require_keys(j, {"type", "scale"}, {"scale"}, "triggered");
        return TriggeredJumpLaw::deterministic(number(j, "scale", "triggered"));
    }
    if (type == "affine") {
        require_keys(j, {"type", "a", "b", "sigma_u"}, {"a", "b", "sigma_u"},
                     "triggered");
        return TriggeredJumpLaw::affine(number(j, "a", "triggered"),
                                        number(j, "b", "triggered"),
                                        number(j, "sigma_u", "triggered"));
    }
    if (type == "independent") {
        require_keys(j, {"type", "law"}, {"law"}, "triggered");
        return TriggeredJumpLaw::independent(jump_law_from_json(j.at("law")));
    }
    throw SchemaError("schema: unknown triggered law type '" + type + "'");
}

nlohmann::json to_json(const CoefficientFn& f) {
    switch (f.kind) {
    case CoefficientFn::Kind::Constant:
        return {{"type", "constant"}, {"value", f.value}};
    case CoefficientFn::Kind::AffineClipped:
        return {{"type", "affine_clipped"}, {"a", f.a}, {"b", f.b},
                {"lo", f.lo}, {"hi", f.hi}};
    case CoefficientFn::Kind::Table:
        return {{"type", "table"}, {"theta", f.xs}, {"value", f.ys}};
    }
    return {};
}

CoefficientFn coefficient_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw SchemaError("schema: coefficient function needs a 'type'");
    const std::string type = j.at("type").get<std::string>();
    if (type == "constant") {
        require_keys(j, {"type", "value"}, {"value"}, "coefficient");
        return CoefficientFn::constant(number(j, "value", "coefficient"));
    }
    if (type == "affine_clipped") {
        require_keys(j, {"type", "a", "b", "lo", "hi"}, {"a", "b", "lo", "hi"},
                     "coefficient");
        return CoefficientFn::affine_clipped(
            number(j, "a", "coefficient"), number(j, "b", "coefficient"),
            number(j, "lo", "coefficient"), number(j, "hi", "coefficient"));
    }
    if (type == "table") {
        require_keys(j, {"type", "theta", "value"}, {"theta", "value"},
                     "coefficient");
        return CoefficientFn::table(j.at("theta").get<std::vector<double>>(),
                                    j.at("value").get<std::vector<double>>());
    }
    throw SchemaError("schema: unknown coefficient type '" + type + "'");
}

nlohmann::json to_json(const MapSpec& spec) {
    return {
        {"schema", "v1"},
        {"modulator",
         {{"mu1", spec.mu1}, {"sigma1", spec.sigma1}, {"nu1", to_json(spec.nu1)}}},
        {"ordinate",
         {{"mu2", to_json(spec.mu2)},
          {"sigma2", to_json(spec.sigma2)},
          {"nu2", to_json(spec.nu2)}}},
        {"triggered", to_json(spec.u_law)},
        {"xi0", spec.xi0},
        {"horizon", spec.horizon},
        {"k_max", spec.k_max},
    };
}

MapSpec map_spec_from_json(const nlohmann::json& j) {
    require_keys(j,
                 {"schema", "modulator", "ordinate", "triggered", "xi0",
                  "horizon", "k_max"},
                 {"modulator", "ordinate", "triggered"}, "model");
    if (j.contains("schema") && j.at("schema").get<std::string>() != "v1")
        throw SchemaError("schema: unsupported model schema version");
    MapSpec s;
    const auto& mod = j.at("modulator");
    require_keys(mod, {"mu1", "sigma1", "nu1"}, {"mu1", "sigma1", "nu1"},
                 "modulator");
    s.mu1 = number(mod, "mu1", "modulator");
    s.sigma1 = number(mod, "sigma1", "modulator");
    s.nu1 = levy_measure_from_json(mod.at("nu1"));
    const auto& ord = j.at("ordinate");
    require_keys(ord, {"mu2", "sigma2", "nu2"}, {"mu2", "sigma2", "nu2"},
                 "ordinate");
    s.mu2 = coefficient_from_json(ord.at("mu2"));
    s.sigma2 = coefficient_from_json(ord.at("sigma2"));
    s.nu2 = levy_measure_from_json(ord.at("nu2"));
    s.u_law = triggered_from_json(j.at("triggered"));
    if (j.contains("xi0")) s.xi0 = number(j, "xi0", "model");
    if (j.contains("horizon")) s.horizon = number(j, "horizon", "model");
    if (j.contains("k_max")) {
        if (!j.at("k_max").is_number_integer())
            throw SchemaError("schema: k_max must be an integer");
        s.k_max = j.at("k_max").get<int>();
    }
    return s;
}

std::string spec_hash(const MapSpec& spec) {
    const std::string canon = to_json(spec).dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

} // namespace mapmart
