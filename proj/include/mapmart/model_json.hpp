#pragma once

#include <string>

#include <json.hpp>

#include "mapmart/map_model.hpp"

namespace mapmart {

// Model schema "v1". Parsing is strict: unknown keys are rejected with a
// SchemaError naming the offender.
nlohmann::json to_json(const JumpLaw& law);
nlohmann::json to_json(const LevyMeasureSpec& spec);
nlohmann::json to_json(const TriggeredJumpLaw& u);
nlohmann::json to_json(const CoefficientFn& f);
nlohmann::json to_json(const MapSpec& spec);

JumpLaw jump_law_from_json(const nlohmann::json& j);
LevyMeasureSpec levy_measure_from_json(const nlohmann::json& j);
TriggeredJumpLaw triggered_from_json(const nlohmann::json& j);
CoefficientFn coefficient_from_json(const nlohmann::json& j);
MapSpec map_spec_from_json(const nlohmann::json& j);

// FNV-1a over the canonical serialized spec; stable across runs.
std::string spec_hash(const MapSpec& spec);

} // namespace mapmart
