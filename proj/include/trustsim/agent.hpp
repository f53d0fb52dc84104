#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "trustsim/game_engine.hpp"
#include "trustsim/llm_client.hpp"
#include "trustsim/prompt_forge.hpp"
#include "trustsim/response_cache.hpp"
#include "trustsim/response_parser.hpp"

namespace trustsim {

/// What kind of answer a request admits.
struct DecisionSpace {
    bool binary = false;
    MoneyRange bounds;  // meaningful only when !binary

    static DecisionSpace amount(MoneyRange r) { return {false, r}; }
    static DecisionSpace binary_trust() { return {true, {}}; }
    bool operator==(const DecisionSpace &) const = default;
};

struct DecisionRequest {
    PromptBundle bundle;
    Role role = Role::Trustor;
    DecisionSpace space;
    std::string trial_key;
    GameSpec game;
};

/// Decision space for a role: [0, endowment] to send, [0, k·sent] to return,
/// binary for the choice games.
DecisionSpace decision_space_for(const GameSpec &game, Role role, Money sent = Money{});

struct AgentResponse {
    std::string raw_text;
    std::optional<ParsedDecision> decision;
    std::optional<BdiSegments> bdi;
    bool valid = false;
    std::chrono::duration<double, std::milli> latency{0};
    std::map<std::string, std::string> provider_meta;
};

/// Parses a reply exactly as every text-producing agent does.
AgentResponse interpret_reply(std::string raw_text, const DecisionRequest &request);

class Agent {
public:
    virtual ~Agent() = default;
    virtual AgentResponse decide(const DecisionRequest &request) const = 0;
    virtual std::string describe() const = 0;
};

using AgentPtr = std::shared_ptr<const Agent>;

/// Always answers `amount`. Throws InvalidAgent when `amount` is outside `space`.
AgentPtr scripted_fixed(Money amount, MoneyRange space = {Money{}, Money::dollars(10)});
AgentPtr scripted_fixed(TrustChoice choice);

/// Maximizes expected own payoff; ties go to trust / gamble.
AgentPtr rational_ev_agent();

/// Serves canned replies by trial key and parses them like an LLM reply.
AgentPtr replay_agent(std::map<std::string, std::string> canned);

/// Chat-completion backed agent with a shared response cache.
AgentPtr llm_agent(LlmConfig config, std::shared_ptr<ResponseCache> cache);

/// Cache key for one LLM request.
std::string llm_cache_key(const LlmConfig &config, const PromptBundle &bundle, const std::string &trial_key);

}  // namespace trustsim
