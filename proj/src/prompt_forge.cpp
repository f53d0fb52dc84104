#include "trustsim/prompt_forge.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "trustsim/error.hpp"

namespace trustsim {
namespace {

// Game texts. Named {markers} are filled by game_prompt; dollar figures come
// from the GameSpec so overridden payoffs stay consistent with the text.
namespace tmpl {

constexpr std::string_view kTrust =
    "You're taking part in an experiment. You are randomly paired online with another player. You don't know who "
    "the player is, and the player doesn't know who you are. You will receive ${endowment} from the study group. "
    "You can give N dollars to the other player, and the player will receive {k}N dollars and then can choose how "
    "much to return to you. How much money would you give to the other player?";

constexpr std::string_view kTrustLlm =
    "Suppose you are in an experiment, and you are randomly paired online with a complicated LLM. You don't know its "
    "identity, and it doesn't know yours. You will receive ${endowment} from the study group. You can give N dollars "
    "to the LLM, and it will receive {k}N dollars and then can choose how much to return to you. How much money "
    "would you give to it?";

constexpr std::string_view kDictator =
    "You're taking part in an experiment. You are randomly paired with another player. You don't know who the player "
    "is, and the player doesn't know who you are. You will receive ${endowment} from the study group. You can give N "
    "dollars to the other player, and the player will receive {k}N dollars. How much money would you give to the "
    "other player?";

constexpr std::string_view kMapTrust =
    "You and another player are part of a game. Neither of you knows each other's identity. You can choose to trust "
    "the other player or not trust them. If you choose not to trust the other player, both of you will receive "
    "${safe} each, and the game ends. If you choose to trust the other player and they also choose to trust you, you "
    "both get ${good} each. However, if the other player chooses not to trust you after you trusted them, you will "
    "receive ${bad_trustor} while the other player will receive ${bad_trustee}. Now, here's a question: If there's a "
    "probability denoted as {p} that the other player will trust you and {1-p} probability the other player will not "
    "trust you. Would you trust the other player?";

constexpr std::string_view kRiskyDictator =
    "You and another player are part of a game. Neither of you knows each other's identity. You can choose to trust "
    "the other player or not trust them. If you choose not to trust the other player, both of you will receive "
    "${safe} each, and the game ends. If you choose to trust the other player, the funds will become ${pot}. In the "
    "case of a probability {p}, both you and the other player will receive ${good} with that probability, but with a "
    "probability of {1-p}, you will only receive ${bad_trustor} while the other player will receive ${bad_trustee}. "
    "(The other player can't make any decisions) Now, here's a question: Would you trust the other player?";

constexpr std::string_view kLotteryPeople =
    "You and another player are part of a game. You have the option to either trust the other player or not trust. "
    "If you choose not to trust the other player, you will receive ${safe_trustor}, and the other player will "
    "receive ${safe_trustee}, and the game ends. If you choose to trust the other player and they also choose to "
    "trust you, both of you will receive ${good}. However, if the other player chooses not to trust you after you "
    "trusted them, you will receive ${bad_trustor} while the other player will receive ${bad_trustee}. The "
    "probability that the other player also chooses to trust you is {p}. Would you choose not to trust or trust the "
    "other player?";

constexpr std::string_view kLotteryGamble =
    "You play another game where you can choose not to trust the bet and get a fixed ${safe}, or you can choose to "
    "trust the bet where there is a probability of {p} and you will get ${good} and there is a probability of {1-p} "
    "and you will get nothing. Should you choose trust or distrust?";

constexpr std::string_view kRepeatedTrustorStart =
    "You're taking part in an experiment. You are randomly paired with another player. You don't know who this "
    "person is, and they don't know who you are. You will receive ${endowment} from the study group. You can give N "
    "dollars to the other player, and they will receive {k}N dollars and then can choose how much to return to you. "
    "How much money would you give to this person?";

constexpr std::string_view kRepeatedTrustorNext =
    "In the last round, you give the other player {sent} dollars, the other player receive {received} dollars, and "
    "the other player return you {returned} dollars. Last round you left {kept} dollars. This round is beginning. All "
    "the money you earned in the previous round is gone, and you now have only ${endowment}. How much will you give "
    "to the other player?";

constexpr std::string_view kRepeatedTrusteeStart =
    "You're taking part in an experiment. You are randomly paired with another player. You don't know who this "
    "person is, and they don't know who you are either. This person will receive {endowment} dollars from the "
    "experimenter. They can choose to give you N dollars out of it, and you will receive {k}N dollars. Then, you can "
    "choose how much to give back to this person.";

constexpr std::string_view kRepeatedTrusteeNext =
    "In the last round, the other player gives you {sent} dollars, you receive {received} dollars, and you return "
    "the other player {returned} dollars. In the last round you left {kept} dollars. This round is beginning. All "
    "the money you earned in the previous round is gone.";

constexpr std::string_view kTrusteeOffer =
    "The other player gives you {sent} dollars, so you receive {received} dollars. How much will you return to the "
    "other player?";

constexpr std::string_view kBdiAmount =
    "Before deciding, state your Belief, Desire, and Intention as the reasoning process behind your decision, in "
    "sentences beginning with \"My belief\", \"My desire\", and \"My intention\". End your answer with one final "
    "sentence of the form \"Finally, I will give N dollars.\" where N is the amount you give.";

constexpr std::string_view kBdiChoice =
    "Before deciding, state your Belief, Desire, and Intention as the reasoning process behind your decision, in "
    "sentences beginning with \"My belief\", \"My desire\", and \"My intention\". End your answer with one final "
    "sentence that is either \"Finally, I choose to trust.\" or \"Finally, I choose not to trust.\"";

}  // namespace tmpl

using Fills = std::map<std::string, std::string>;

std::string fill(std::string_view text, const Fills &values, Fills *used) {
    std::string out;
    out.reserve(text.size() + 32);
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '{') {
            out += text[i++];
            continue;
        }
        const auto close = text.find('}', i);
        if (close == std::string_view::npos) throw std::logic_error("unterminated placeholder in template");
        const std::string name(text.substr(i + 1, close - i - 1));
        const auto it = values.find(name);
        if (it == values.end()) throw std::logic_error("no value for placeholder {" + name + "}");
        out += it->second;
        if (used) (*used)[name] = it->second;
        i = close + 1;
    }
    return out;
}

// Renders an integer count of millionths as a trimmed decimal.
std::string format_micros(std::int64_t micros, bool keep_one_decimal) {
    std::string whole = std::to_string(micros / 1'000'000);
    std::string frac = std::to_string(micros % 1'000'000);
    frac.insert(0, 6 - frac.size(), '0');
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    if (frac.empty()) return keep_one_decimal ? whole + ".0" : whole;
    return whole + "." + frac;
}

std::int64_t to_micros(double p) { return static_cast<std::int64_t>(std::llround(p * 1e6)); }

void add_money_fills(const GameSpec &spec, Fills &v) {
    const auto &pay = spec.payoffs;
    v["endowment"] = spec.endowment.to_string();
    v["k"] = std::to_string(spec.multiplier);
    v["safe"] = pay.no_trust.trustor.to_string();
    v["safe_trustor"] = pay.no_trust.trustor.to_string();
    v["safe_trustee"] = pay.no_trust.trustee.to_string();
    v["good"] = pay.both_trust.trustor.to_string();
    v["bad_trustor"] = pay.betrayed.trustor.to_string();
    v["bad_trustee"] = pay.betrayed.trustee.to_string();
    v["pot"] = (pay.both_trust.trustor + pay.both_trust.trustee).to_string();
}

void add_probability_fills(const GameSpec &spec, Fills &v) {
    const double p = *spec.probability;
    const bool percent = spec.kind == GameKind::LotteryPeople || spec.kind == GameKind::LotteryGamble;
    const double q = complement_probability(p);
    v["p"] = percent ? format_percent(p) : format_probability(p);
    v["1-p"] = percent ? format_percent(q) : format_probability(q);
}

bool has_tag_prefix(const PromptBundle &b, std::string_view prefix) {
    for (const auto &t : b.mutation_tags)
        if (std::string_view(t).substr(0, prefix.size()) == prefix) return true;
    return false;
}

std::string replace_word_player(const std::string &text, const std::string &label) {
    static constexpr std::string_view kWord = "player";
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto hit = text.find(kWord, pos);
        if (hit == std::string::npos) break;
        out.append(text, pos, hit - pos);
        out += label;
        out += ' ';
        out += kWord;
        pos = hit + kWord.size();
    }
    out.append(text, pos, std::string::npos);
    return out;
}

}  // namespace

std::string_view to_string(Role r) { return r == Role::Trustor ? "trustor" : "trustee"; }

Role role_from_string(std::string_view s) {
    if (s == "trustor") return Role::Trustor;
    if (s == "trustee") return Role::Trustee;
    throw UnsupportedRole("unknown role '" + std::string(s) + "'");
}

ScenarioMutation ScenarioMutation::gender(Gender g) {
    if (g == Gender::Unspecified) throw UnsupportedMutation("gender frame needs female or male");
    return {MutationKind::GenderFrame, std::string(to_string(g))};
}
ScenarioMutation ScenarioMutation::race(std::string label) {
    if (label.empty()) throw UnsupportedMutation("race frame needs a label");
    return {MutationKind::RaceFrame, std::move(label)};
}
ScenarioMutation ScenarioMutation::human_counterpart() { return {MutationKind::HumanCounterpart, {}}; }
ScenarioMutation ScenarioMutation::llm_counterpart() { return {MutationKind::LlmCounterpart, {}}; }
ScenarioMutation ScenarioMutation::manipulate_trust(bool increase) {
    return {MutationKind::ManipulateTrust, increase ? "increase" : "decrease"};
}
ScenarioMutation ScenarioMutation::chain_of_thought() { return {MutationKind::ChainOfThought, {}}; }

ScenarioMutation ScenarioMutation::parse(std::string_view tag) {
    const auto colon = tag.find(':');
    const auto head = tag.substr(0, colon);
    const auto arg = colon == std::string_view::npos ? std::string_view{} : tag.substr(colon + 1);
    if (head == "gender") return gender(gender_from_string(arg));
    if (head == "race") return race(std::string(arg));
    if (head == "human_counterpart" && arg.empty()) return human_counterpart();
    if (head == "llm_counterpart" && arg.empty()) return llm_counterpart();
    if (head == "cot" && arg.empty()) return chain_of_thought();
    if (head == "trust" && (arg == "increase" || arg == "decrease")) return manipulate_trust(arg == "increase");
    throw UnsupportedMutation("unknown mutation '" + std::string(tag) + "'");
}

std::string ScenarioMutation::tag() const {
    switch (kind) {
        case MutationKind::GenderFrame: return "gender:" + payload;
        case MutationKind::RaceFrame: return "race:" + payload;
        case MutationKind::HumanCounterpart: return "human_counterpart";
        case MutationKind::LlmCounterpart: return "llm_counterpart";
        case MutationKind::ManipulateTrust: return "trust:" + payload;
        case MutationKind::ChainOfThought: return "cot";
    }
    return {};
}

std::string format_probability(double p) { return format_micros(to_micros(p), true); }

std::string format_percent(double p) {
    // percent = p·100, kept on a 1e-4 grid
    return format_micros(to_micros(p) * 100, false) + "%";
}

double complement_probability(double p) { return static_cast<double>(1'000'000 - to_micros(p)) / 1e6; }

bool is_amount_decision(GameKind game, Role role) { return role == Role::Trustee || is_amount_game(game); }

std::string game_prompt(const GameSpec &spec, Role role, int round, const std::optional<RoundSummary> &context,
                        std::map<std::string, std::string> *filled) {
    const bool repeated = spec.kind == GameKind::RepeatedTrust;
    if (role == Role::Trustee && spec.kind != GameKind::Trust && !repeated) {
        throw UnsupportedRole(std::string(to_string(spec.kind)) + " has no trustee prompt");
    }
    if (!repeated && (round != 1 || context)) throw MissingContext("round context only applies to repeated_trust");
    if (repeated && round >= 2 && !context) throw MissingContext("round " + std::to_string(round) + " needs the previous round summary");
    if (repeated && round < 2 && context) throw MissingContext("round 1 takes no previous round summary");
    if (has_probability(spec.kind) && !spec.probability) throw InvalidGameSpec("probability missing");

    Fills v;
    add_money_fills(spec, v);
    if (has_probability(spec.kind)) add_probability_fills(spec, v);
    if (context) {
        v["sent"] = context->sent.to_string();
        v["received"] = context->received.to_string();
        v["returned"] = context->returned.to_string();
        v["kept"] = context->kept.to_string();
    }

    std::string_view text;
    switch (spec.kind) {
        case GameKind::Trust:
            text = role == Role::Trustor ? tmpl::kTrust : tmpl::kRepeatedTrusteeStart;
            break;
        case GameKind::Dictator: text = tmpl::kDictator; break;
        case GameKind::MapTrust: text = tmpl::kMapTrust; break;
        case GameKind::RiskyDictator: text = tmpl::kRiskyDictator; break;
        case GameKind::LotteryPeople: text = tmpl::kLotteryPeople; break;
        case GameKind::LotteryGamble: text = tmpl::kLotteryGamble; break;
        case GameKind::RepeatedTrust:
            if (role == Role::Trustor) text = context ? tmpl::kRepeatedTrustorNext : tmpl::kRepeatedTrustorStart;
            else text = context ? tmpl::kRepeatedTrusteeNext : tmpl::kRepeatedTrusteeStart;
            break;
    }
    return fill(text, v, filled);
}

std::string trustee_offer_prompt(Money sent, Money received) {
    return fill(tmpl::kTrusteeOffer, {{"sent", sent.to_string()}, {"received", received.to_string()}}, nullptr);
}

PromptBundle make_bundle(const Persona &persona, const GameSpec &spec, Role role, int round,
                         const std::optional<RoundSummary> &context) {
    PromptBundle b;
    b.game = spec.kind;
    b.role = role;
    b.system_prompt = persona_system_prompt(persona, {});
    b.user_prompt = game_prompt(spec, role, round, context, &b.placeholders_filled);
    return b;
}

PromptBundle apply_mutation(const PromptBundle &bundle, const ScenarioMutation &mutation) {
    const bool demographic = has_tag_prefix(bundle, "gender:") || has_tag_prefix(bundle, "race:");
    const bool llm = has_tag_prefix(bundle, "llm_counterpart");
    const bool human = has_tag_prefix(bundle, "human_counterpart");

    PromptBundle out = bundle;
    auto append_system = [&out](std::string_view sentence) {
        out.system_prompt += ' ';
        out.system_prompt += sentence;
    };

    switch (mutation.kind) {
        case MutationKind::GenderFrame:
        case MutationKind::RaceFrame:
            if (demographic) throw ConflictingMutation("at most one gender/race frame per bundle");
            if (llm) throw ConflictingMutation("a demographic frame cannot describe an LLM counterpart");
            out.user_prompt = replace_word_player(out.user_prompt, mutation.payload);
            break;
        case MutationKind::HumanCounterpart:
            if (human || llm) throw ConflictingMutation("at most one counterpart identity per bundle");
            append_system(sentences::kHumanCounterpart);
            break;
        case MutationKind::LlmCounterpart:
            if (human || llm) throw ConflictingMutation("at most one counterpart identity per bundle");
            if (demographic) throw ConflictingMutation("a demographic frame cannot describe an LLM counterpart");
            if (bundle.game != GameKind::Trust || bundle.role != Role::Trustor) {
                throw UnsupportedMutation("the LLM counterpart text exists only for the Trust Game trustor");
            }
            if (!bundle.placeholders_filled.count("endowment") || !bundle.placeholders_filled.count("k")) {
                throw UnsupportedMutation("bundle lacks the fills needed to rebuild its prompt");
            }
            out.user_prompt = fill(tmpl::kTrustLlm, bundle.placeholders_filled, nullptr);
            break;
        case MutationKind::ManipulateTrust:
            if (has_tag_prefix(bundle, "trust:")) throw ConflictingMutation("at most one trust manipulation per bundle");
            append_system(mutation.payload == "increase" ? sentences::kTrustIncrease : sentences::kTrustDecrease);
            break;
        case MutationKind::ChainOfThought:
            if (has_tag_prefix(bundle, "cot")) throw ConflictingMutation("chain-of-thought already applied");
            append_system(sentences::kChainOfThought);
            break;
    }
    if (bundle.bdi_attached && mutation.kind != MutationKind::HumanCounterpart &&
        mutation.kind != MutationKind::ManipulateTrust && mutation.kind != MutationKind::ChainOfThought) {
        throw ConflictingMutation("user-prompt mutations must precede the BDI instruction");
    }
    out.mutation_tags.push_back(mutation.tag());
    return out;
}

std::string_view bdi_instruction(bool amount_decision) {
    return amount_decision ? tmpl::kBdiAmount : tmpl::kBdiChoice;
}

PromptBundle attach_bdi_instruction(const PromptBundle &bundle) {
    if (bundle.bdi_attached) return bundle;
    PromptBundle out = bundle;
    out.user_prompt += "\n\n";
    out.user_prompt += bdi_instruction(is_amount_decision(bundle.game, bundle.role));
    out.bdi_attached = true;
    return out;
}

std::vector<std::pair<std::string, std::string_view>> prompt_templates() {
    return {
        {"trust", tmpl::kTrust},
        {"trust_llm", tmpl::kTrustLlm},
        {"dictator", tmpl::kDictator},
        {"map_trust", tmpl::kMapTrust},
        {"risky_dictator", tmpl::kRiskyDictator},
        {"lottery_people", tmpl::kLotteryPeople},
        {"lottery_gamble", tmpl::kLotteryGamble},
        {"repeated_trustor_start", tmpl::kRepeatedTrustorStart},
        {"repeated_trustor_next", tmpl::kRepeatedTrustorNext},
        {"repeated_trustee_start", tmpl::kRepeatedTrusteeStart},
        {"repeated_trustee_next", tmpl::kRepeatedTrusteeNext},
        {"trustee_offer", tmpl::kTrusteeOffer},
    };
}

}  // namespace trustsim
