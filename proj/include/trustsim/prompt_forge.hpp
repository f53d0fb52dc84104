#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trustsim/game_engine.hpp"
#include "trustsim/persona.hpp"

namespace trustsim {

enum class Role { Trustor, Trustee };

std::string_view to_string(Role r);
Role role_from_string(std::string_view s);

/// What one side saw in the previous round of a repeated game. `kept` is the
/// money that side ended the round with.
struct RoundSummary {
    Money sent;
    Money received;
    Money returned;
    Money kept;
};

enum class MutationKind { GenderFrame, RaceFrame, HumanCounterpart, LlmCounterpart, ManipulateTrust, ChainOfThought };

struct ScenarioMutation {
    MutationKind kind;
    std::string payload;  // "female"/"male", race label, or "increase"/"decrease"

    static ScenarioMutation gender(Gender g);
    static ScenarioMutation race(std::string label);
    static ScenarioMutation human_counterpart();
    static ScenarioMutation llm_counterpart();
    static ScenarioMutation manipulate_trust(bool increase);
    static ScenarioMutation chain_of_thought();

    /// Parses the tag form ("gender:female", "race:Black", "human_counterpart",
    /// "llm_counterpart", "trust:increase", "trust:decrease", "cot").
    static ScenarioMutation parse(std::string_view tag);
    std::string tag() const;
};

struct PromptBundle {
    GameKind game = GameKind::Trust;
    Role role = Role::Trustor;
    std::string system_prompt;
    std::string user_prompt;
    std::vector<std::string> mutation_tags;
    std::map<std::string, std::string> placeholders_filled;
    bool bdi_attached = false;
};

namespace sentences {
inline constexpr std::string_view kChainOfThought = "you must think step by step.";
inline constexpr std::string_view kTrustIncrease = "You need to trust the other player.";
inline constexpr std::string_view kTrustDecrease = "You must not trust the other player.";
inline constexpr std::string_view kHumanCounterpart = "The other player is a real person.";
}  // namespace sentences

/// Decimal rendering used in prompts ("0.46", "1.0").
std::string format_probability(double p);
/// Percentage rendering used by the lottery prompts ("46%").
std::string format_percent(double p);
/// 1 − p computed on a 1e-6 grid so 0.46 yields exactly "0.54".
double complement_probability(double p);

/// Game text for (kind, role, phase), fully instantiated.
/// `round` is 1-based and only meaningful for RepeatedTrust.
std::string game_prompt(const GameSpec &spec, Role role, int round = 1,
                        const std::optional<RoundSummary> &context = std::nullopt,
                        std::map<std::string, std::string> *filled = nullptr);

/// Line appended to a trustee prompt telling it what arrived this round.
std::string trustee_offer_prompt(Money sent, Money received);

/// Bundle with persona system prompt and unmutated game text.
PromptBundle make_bundle(const Persona &persona, const GameSpec &spec, Role role, int round = 1,
                         const std::optional<RoundSummary> &context = std::nullopt);

PromptBundle apply_mutation(const PromptBundle &bundle, const ScenarioMutation &mutation);

/// Instruction that asks for Belief/Desire/Intention and a fixed final sentence.
std::string_view bdi_instruction(bool amount_decision);
PromptBundle attach_bdi_instruction(const PromptBundle &bundle);

/// True when the bundle's decision is an amount (send or return).
bool is_amount_decision(GameKind game, Role role);

/// Every template string the forge can emit, for manifest digests.
std::vector<std::pair<std::string, std::string_view>> prompt_templates();

}  // namespace trustsim
