#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trustsim/agent.hpp"
#include "trustsim/game_engine.hpp"
#include "trustsim/prompt_forge.hpp"
#include "trustsim/response_parser.hpp"

namespace trustsim {

/// One prompt → reply → decision exchange inside a trial.
struct DecisionStep {
    Role role = Role::Trustor;
    int round = 1;
    std::string system_prompt;
    std::string user_prompt;
    DecisionSpace space;
    std::string raw_text;
    std::optional<ParsedDecision> decision;
    bool valid = false;
    bool strictly_positive = false;
    std::optional<std::string> belief;
    std::optional<std::string> desire;
    std::optional<std::string> intention;
    std::optional<bool> cache_hit;
    std::map<std::string, std::string> provider_meta;
    double latency_ms = 0.0;  // wall-clock
};

struct TrialRecord {
    std::size_t index = 0;
    std::string trial_key;
    GameKind game = GameKind::Trust;
    std::string condition;
    std::optional<double> probability;
    std::optional<int> group;
    int sample = 0;
    std::string trustor_id;
    std::optional<std::string> trustee_id;
    std::vector<std::string> mutation_tags;
    std::vector<DecisionStep> steps;
    std::optional<RepeatedTranscript> transcript;
    std::optional<Outcome> outcome;
    std::optional<std::string> error;
    std::optional<std::string> error_kind;
    std::string started_at;   // wall-clock
    std::string finished_at;  // wall-clock
};

/// Builds a step from the request that produced it and the agent's answer.
DecisionStep make_step(const DecisionRequest &request, int round, const AgentResponse &response);

nlohmann::json to_json(const TrialRecord &r);
TrialRecord record_from_json(const nlohmann::json &j);  // throws ParseError

nlohmann::json decision_to_json(const std::optional<ParsedDecision> &d);
std::optional<ParsedDecision> decision_from_json(const nlohmann::json &j);
nlohmann::json transcript_to_json(const RepeatedTranscript &t);
RepeatedTranscript transcript_from_json(const nlohmann::json &j);
nlohmann::json outcome_to_json(const Outcome &o);
Outcome outcome_from_json(const nlohmann::json &j);

/// Drops every wall-clock field so two runs can be compared byte for byte.
nlohmann::json strip_wall_clock(nlohmann::json record);

/// Reads a JSON-lines records file. A torn final line (killed run) is skipped.
std::vector<TrialRecord> load_records(const std::filesystem::path &path);

/// The decision step that carries the trial's headline decision: the first
/// trustor step.
const DecisionStep *primary_step(const TrialRecord &r);

}  // namespace trustsim
