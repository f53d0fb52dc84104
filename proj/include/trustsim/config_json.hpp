#pragma once

#include <string>

#include <json.hpp>

#include "trustsim/analysis.hpp"
#include "trustsim/game_engine.hpp"

namespace trustsim {

/// Money from "7.50", "$7.50", 7 or 7.5. Throws ConfigError.
Money config_money(const nlohmann::json &j, const std::string &field);

/// "trust" or {"kind": "map_trust", "probability": 0.3, "endowment": "10",
/// "multiplier": 3, "rounds": 7}. Unset fields take the kind's defaults.
GameSpec game_spec_from_json(const nlohmann::json &j);
nlohmann::json game_spec_to_json(const GameSpec &spec);

AnalysisOptions analysis_options_from_json(const nlohmann::json &j);
nlohmann::json analysis_options_to_json(const AnalysisOptions &options);

}  // namespace trustsim
