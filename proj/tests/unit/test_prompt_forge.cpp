#include <doctest.h>

#include "support/workspace.hpp"
#include "trustsim/digest.hpp"
#include "trustsim/error.hpp"
#include "trustsim/prompt_forge.hpp"

using namespace trustsim;
using namespace trustsim::testing;

namespace {

std::string fixture(const std::string &name) { return read_file(data_dir() / "prompts" / name); }

const Persona &emily() {
    static const Roster r = load_roster(data_dir() / "personas" / "exemplars.json");
    return r.at(0);
}

bool has_brace(const std::string &s) { return s.find('{') != std::string::npos || s.find('}') != std::string::npos; }

}  // namespace

TEST_CASE("game prompts match the fixtures") {
    CHECK(game_prompt(GameSpec::defaults(GameKind::Trust), Role::Trustor) == fixture("trust_trustor.txt"));
    CHECK(game_prompt(GameSpec::defaults(GameKind::Dictator), Role::Trustor) == fixture("dictator_trustor.txt"));

    std::map<std::string, std::string> filled;
    const auto map = game_prompt(GameSpec::defaults(GameKind::MapTrust, 0.46), Role::Trustor, 1, std::nullopt, &filled);
    CHECK(map == fixture("map_trust_trustor_p0.46.txt"));
    CHECK(map.find("0.46") != std::string::npos);
    CHECK(map.find("0.54") != std::string::npos);

    const auto round2 = game_prompt(GameSpec::defaults(GameKind::RepeatedTrust), Role::Trustor, 2,
                                    RoundSummary{Money::dollars(3), Money::dollars(9), Money::dollars(5), Money::dollars(12)});
    CHECK(round2 == fixture("repeated_trustor_round2.txt"));
}

TEST_CASE("placeholders are always filled") {
    for (double p : {0.0, 0.1, 0.2, 0.3, 0.46, 0.5, 0.7, 1.0}) {
        for (auto kind : {GameKind::MapTrust, GameKind::RiskyDictator, GameKind::LotteryPeople, GameKind::LotteryGamble}) {
            const auto text = game_prompt(GameSpec::defaults(kind, p), Role::Trustor);
            CHECK_FALSE(has_brace(text));
        }
    }
    for (auto kind : {GameKind::Trust, GameKind::Dictator, GameKind::RepeatedTrust})
        CHECK_FALSE(has_brace(game_prompt(GameSpec::defaults(kind), Role::Trustor)));
}

TEST_CASE("probability rendering") {
    CHECK(format_probability(0.46) == "0.46");
    CHECK(format_probability(1.0) == "1.0");
    CHECK(format_percent(0.46) == "46%");
    CHECK(complement_probability(0.46) == 0.54);
    CHECK(format_probability(complement_probability(0.7)) == "0.3");
}

TEST_CASE("role and context preconditions") {
    CHECK_THROWS_AS(game_prompt(GameSpec::defaults(GameKind::Dictator), Role::Trustee), UnsupportedRole);
    CHECK_THROWS_AS(game_prompt(GameSpec::defaults(GameKind::MapTrust, 0.5), Role::Trustee), UnsupportedRole);
    CHECK_THROWS_AS(game_prompt(GameSpec::defaults(GameKind::RepeatedTrust), Role::Trustor, 2), MissingContext);
}

TEST_CASE("mutations rewrite the documented region") {
    const auto base = make_bundle(emily(), GameSpec::defaults(GameKind::Trust), Role::Trustor);

    const auto male = apply_mutation(base, ScenarioMutation::gender(Gender::Male));
    CHECK(male.user_prompt == fixture("trust_trustor_gender_male.txt"));
    CHECK(male.system_prompt == base.system_prompt);
    CHECK(male.mutation_tags == std::vector<std::string>{"gender:male"});

    const auto decrease = apply_mutation(base, ScenarioMutation::manipulate_trust(false));
    CHECK(decrease.system_prompt.ends_with("You must not trust the other player."));
    CHECK(decrease.user_prompt == base.user_prompt);

    const auto cot = apply_mutation(base, ScenarioMutation::chain_of_thought());
    CHECK(cot.system_prompt == base.system_prompt + " you must think step by step.");

    const auto llm = apply_mutation(base, ScenarioMutation::llm_counterpart());
    CHECK(llm.user_prompt == fixture("trust_trustor_llm_counterpart.txt"));
    CHECK(llm.system_prompt == base.system_prompt);

    const auto human = apply_mutation(base, ScenarioMutation::human_counterpart());
    CHECK(human.system_prompt.ends_with("The other player is a real person."));
    CHECK_THROWS_AS(apply_mutation(human, ScenarioMutation::llm_counterpart()), ConflictingMutation);
    CHECK_THROWS_AS(apply_mutation(decrease, ScenarioMutation::manipulate_trust(true)), ConflictingMutation);

    const auto race = apply_mutation(base, ScenarioMutation::race("Asian"));
    CHECK(race.user_prompt.find("Asian player") != std::string::npos);
    CHECK(race.mutation_tags == std::vector<std::string>{"race:Asian"});
}

TEST_CASE("mutation tags parse and print") {
    for (const char *tag : {"gender:female", "race:Black", "human_counterpart", "llm_counterpart", "trust:increase",
                            "trust:decrease", "cot"})
        CHECK(ScenarioMutation::parse(tag).tag() == tag);
    CHECK_THROWS(ScenarioMutation::parse("weather:rainy"));
}

TEST_CASE("bdi instruction") {
    const auto amount = make_bundle(emily(), GameSpec::defaults(GameKind::Trust), Role::Trustor);
    const auto with = attach_bdi_instruction(amount);
    CHECK(with.bdi_attached);
    CHECK(with.user_prompt.find("Finally, I will give") != std::string::npos);
    CHECK(with.user_prompt.starts_with(amount.user_prompt));
    const auto twice = attach_bdi_instruction(with);
    CHECK(twice.user_prompt == with.user_prompt);
    CHECK(twice.system_prompt == with.system_prompt);

    const auto choice = attach_bdi_instruction(make_bundle(emily(), GameSpec::defaults(GameKind::MapTrust, 0.5), Role::Trustor));
    CHECK(choice.user_prompt.find("Finally, I choose to trust") != std::string::npos);
    CHECK(choice.user_prompt.find("not to trust") != std::string::npos);
}
