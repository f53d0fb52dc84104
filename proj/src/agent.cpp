#include "trustsim/agent.hpp"

#include <algorithm>
#include <semaphore>

#include "trustsim/digest.hpp"
#include "trustsim/error.hpp"

namespace trustsim {
namespace {

class FixedAgent final : public Agent {
public:
    explicit FixedAgent(std::variant<Money, TrustChoice> value) : value_(value) {}

    AgentResponse decide(const DecisionRequest &request) const override {
        std::string text;
        if (std::holds_alternative<Money>(value_)) {
            const Money amount = std::get<Money>(value_);
            if (request.space.binary) throw InvalidAgent("fixed amount agent asked for a trust choice");
            if (!request.space.bounds.contains(amount)) {
                throw InvalidAgent("fixed amount " + amount.to_string() + " outside the requested range");
            }
            text = canonical_amount_sentence(amount);
        } else {
            if (!request.space.binary) throw InvalidAgent("fixed choice agent asked for an amount");
            text = canonical_choice_sentence(std::get<TrustChoice>(value_));
        }
        auto r = interpret_reply(std::move(text), request);
        r.provider_meta["agent"] = describe();
        return r;
    }

    std::string describe() const override {
        if (std::holds_alternative<Money>(value_)) return "fixed:" + std::get<Money>(value_).to_string();
        return std::string("fixed:") + std::string(to_string(std::get<TrustChoice>(value_)));
    }

private:
    std::variant<Money, TrustChoice> value_;
};

class RationalAgent final : public Agent {
public:
    AgentResponse decide(const DecisionRequest &request) const override {
        const GameSpec &g = request.game;
        std::string text;
        if (request.space.binary) {
            if (!g.probability) throw InvalidAgent("rational agent needs the game probability");
            const bool trust = *g.probability >= indifference_probability(g.payoffs);
            text = canonical_choice_sentence(trust ? TrustChoice::Trust : TrustChoice::NotTrust);
        } else {
            // No return is guaranteed, so nothing sent and nothing returned.
            text = canonical_amount_sentence(Money{});
        }
        auto r = interpret_reply(std::move(text), request);
        r.provider_meta["agent"] = describe();
        return r;
    }

    std::string describe() const override { return "rational"; }
};

class ReplayAgent final : public Agent {
public:
    explicit ReplayAgent(std::map<std::string, std::string> canned) : canned_(std::move(canned)) {}

    AgentResponse decide(const DecisionRequest &request) const override {
        const auto it = canned_.find(request.trial_key);
        if (it == canned_.end()) throw MissingCannedResponse("no canned reply for '" + request.trial_key + "'");
        auto r = interpret_reply(it->second, request);
        r.provider_meta["agent"] = describe();
        return r;
    }

    std::string describe() const override { return "replay"; }

private:
    std::map<std::string, std::string> canned_;
};

class LlmAgent final : public Agent {
public:
    LlmAgent(LlmConfig config, std::shared_ptr<ResponseCache> cache)
        : config_(std::move(config)), cache_(std::move(cache)), slots_(std::clamp(config_.parallelism_limit, 1, 1024)) {}

    AgentResponse decide(const DecisionRequest &request) const override {
        auto r = ask(request, request.trial_key);
        if (!r.valid && config_.reask_invalid) {
            auto second = ask(request, request.trial_key + "#reask");
            second.provider_meta["reasked"] = "true";
            return second;
        }
        return r;
    }

    std::string describe() const override { return "llm:" + config_.model_name; }

private:
    AgentResponse ask(const DecisionRequest &request, const std::string &key_id) const {
        const auto key = llm_cache_key(config_, request.bundle, key_id);
        const auto started = std::chrono::steady_clock::now();
        if (cache_) {
            if (auto hit = cache_->get(key)) {
                auto r = interpret_reply(*hit, request);
                r.latency = std::chrono::steady_clock::now() - started;
                r.provider_meta = {{"agent", describe()}, {"cache_hit", "true"}, {"cache_key", key}};
                return r;
            }
        }

        ChatReply reply;
        {
            slots_.acquire();
            struct Release {
                std::counting_semaphore<1024> &s;
                ~Release() { s.release(); }
            } release{slots_};
            reply = chat_complete(config_, request.bundle.system_prompt, request.bundle.user_prompt);
        }
        if (cache_) {
            cache_->put(key,
                        {{"model", config_.model_name},
                         {"system", request.bundle.system_prompt},
                         {"user", request.bundle.user_prompt},
                         {"temperature", config_.temperature},
                         {"trial_key", key_id}},
                        reply.content);
        }
        auto r = interpret_reply(reply.content, request);
        r.latency = reply.latency;
        r.provider_meta = {{"agent", describe()},
                           {"cache_hit", "false"},
                           {"cache_key", key},
                           {"attempts", std::to_string(reply.attempts)}};
        return r;
    }

    LlmConfig config_;
    std::shared_ptr<ResponseCache> cache_;
    mutable std::counting_semaphore<1024> slots_;
};

}  // namespace

DecisionSpace decision_space_for(const GameSpec &game, Role role, Money sent) {
    if (role == Role::Trustee) return DecisionSpace::amount({Money{}, game.max_return(sent)});
    if (is_amount_game(game.kind)) return DecisionSpace::amount({Money{}, game.endowment});
    return DecisionSpace::binary_trust();
}

AgentResponse interpret_reply(std::string raw_text, const DecisionRequest &request) {
    AgentResponse r;
    r.raw_text = std::move(raw_text);
    if (request.space.binary) {
        r.decision = extract_choice(r.raw_text);
        r.valid = classify_validity(r.decision);
    } else {
        r.decision = extract_amount(r.raw_text);
        r.valid = classify_validity(r.decision, request.space.bounds);
    }
    auto bdi = extract_bdi(r.raw_text);
    if (bdi.belief || bdi.desire || bdi.intention) r.bdi = std::move(bdi);
    return r;
}

AgentPtr scripted_fixed(Money amount, MoneyRange space) {
    if (!space.contains(amount)) {
        throw InvalidAgent("fixed amount " + amount.to_string() + " outside [" + space.min.to_string() + ", " +
                           space.max.to_string() + "]");
    }
    return std::make_shared<FixedAgent>(amount);
}

AgentPtr scripted_fixed(TrustChoice choice) { return std::make_shared<FixedAgent>(choice); }

AgentPtr rational_ev_agent() { return std::make_shared<RationalAgent>(); }

AgentPtr replay_agent(std::map<std::string, std::string> canned) {
    return std::make_shared<ReplayAgent>(std::move(canned));
}

AgentPtr llm_agent(LlmConfig config, std::shared_ptr<ResponseCache> cache) {
    if (config.model_name.empty()) throw InvalidAgent("llm agent needs a model name");
    return std::make_shared<LlmAgent>(std::move(config), std::move(cache));
}

std::string llm_cache_key(const LlmConfig &config, const PromptBundle &bundle, const std::string &trial_key) {
    const nlohmann::json key = nlohmann::json::array(
        {config.model_name, bundle.system_prompt, bundle.user_prompt, config.temperature, trial_key});
    return sha256_hex(key.dump());
}

}  // namespace trustsim
