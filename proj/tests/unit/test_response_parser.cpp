#include <doctest.h>

#include <random>

#include <json.hpp>

#include "support/workspace.hpp"
#include "trustsim/digest.hpp"
#include "trustsim/response_parser.hpp"

using namespace trustsim;
using namespace trustsim::testing;

namespace {

const MoneyRange kTen{Money{}, Money::dollars(10)};

}  // namespace

TEST_CASE("amount extraction precedence") {
    const std::string a = "I would consider $3 or maybe $4. Finally, I will give 4 dollars.";
    const auto d = extract_amount(a);
    REQUIRE(d);
    CHECK(d->amount() == Money::dollars(4));
    CHECK(d->extraction_rule == "final_sentence");
    CHECK(a.substr(d->evidence_span.begin, d->evidence_span.end - d->evidence_span.begin) == "Finally, I will give 4 dollars");

    CHECK(extract_amount("I'd send 6 dollars. Maybe $2.")->extraction_rule == "give_phrase");
    CHECK(extract_amount("Maybe $2.")->extraction_rule == "dollar_sign");
    CHECK_FALSE(extract_amount("No idea.").has_value());
    CHECK(extract_amount("Finally, I will give 14 dollars.")->amount() == Money::dollars(14));
}

TEST_CASE("choice extraction") {
    CHECK(extract_choice("I choose to trust the other player.")->choice() == TrustChoice::Trust);
    CHECK(extract_choice("Given the risk, I will not trust the other player.")->choice() == TrustChoice::NotTrust);
    CHECK_FALSE(extract_choice("Trust is important, but I cannot decide.").has_value());
}

TEST_CASE("bdi segmentation") {
    const std::string excerpt = read_file(test_dir() / "fixtures" / "parser" / "excerpt_high_amount.txt");
    const auto seg = extract_bdi(excerpt);
    CHECK(seg.belief_text(excerpt).find("strong belief in the goodness of humanity") != std::string::npos);

    const std::string none = "Nothing to see here. Just numbers.";
    const auto empty = extract_bdi(none);
    CHECK_FALSE(empty.belief);
    CHECK_FALSE(empty.desire);
    CHECK_FALSE(empty.intention);
    CHECK(empty.residual == none);

    const std::string s = "My desire is X. I intend Y.";
    const auto two = extract_bdi(s);
    CHECK(two.desire_text(s) == "My desire is X.");
    CHECK(two.intention_text(s) == "I intend Y.");
    CHECK_FALSE(two.belief);
}

TEST_CASE("bdi segments and residual cover the text without overlap") {
    const std::string text = "I believe people are kind. My desire is fairness. I intend to split. Finally, I will give 5 dollars.";
    const auto seg = extract_bdi(text);
    std::size_t covered = 0;
    std::vector<int> marks(text.size(), 0);
    for (const auto *s : {&seg.belief, &seg.desire, &seg.intention}) {
        if (!*s) continue;
        for (std::size_t i = (*s)->begin; i < (*s)->end; ++i) ++marks[i];
        covered += (*s)->end - (*s)->begin;
    }
    for (int m : marks) CHECK(m <= 1);
    CHECK(covered + seg.residual.size() == text.size());
}

TEST_CASE("validity boundary") {
    auto amount = [](Money m) { return std::optional<ParsedDecision>(ParsedDecision{m, {0, 1}, "test"}); };
    CHECK(classify_validity(amount(Money::dollars(10)), kTen));
    CHECK(classify_validity(amount(Money{}), kTen));
    CHECK_FALSE(classify_validity(amount(Money::dollars(15)), kTen));
    CHECK_FALSE(classify_validity(amount(Money::cents(1001)), kTen));
    CHECK_FALSE(classify_validity(std::nullopt, kTen));
    CHECK_FALSE(is_strictly_positive(amount(Money{})));
    CHECK(is_strictly_positive(amount(Money::cents(1))));
}

TEST_CASE("canonical sentence round trip") {
    for (int n = 0; n <= 10; ++n) {
        const auto d = extract_amount(canonical_amount_sentence(Money::dollars(n)));
        REQUIRE(d);
        CHECK(d->amount() == Money::dollars(n));
    }
    CHECK(extract_choice(canonical_choice_sentence(TrustChoice::Trust))->choice() == TrustChoice::Trust);
    CHECK(extract_choice(canonical_choice_sentence(TrustChoice::NotTrust))->choice() == TrustChoice::NotTrust);
}

TEST_CASE("validity predicate over random decisions and bounds") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t hi = static_cast<std::int64_t>(rng() % 5000);
        const MoneyRange bounds{Money{}, Money::cents(hi)};
        const bool present = rng() % 4 != 0;
        const Money m = Money::cents(static_cast<std::int64_t>(rng() % 6000));
        std::optional<ParsedDecision> d;
        if (present) d = ParsedDecision{m, {0, 1}, "test"};
        CHECK(classify_validity(d, bounds) == (present && m.in_cents() <= hi));
    }
}

TEST_CASE("hand-labeled corpus") {
    std::size_t cases = 0;
    for (const auto &entry : std::filesystem::directory_iterator(test_dir() / "fixtures" / "parser")) {
        const auto path = entry.path();
        if (path.extension() != ".txt") continue;
        ++cases;
        auto label_path = path;
        label_path.replace_extension(".label.json");
        const auto label = nlohmann::json::parse(read_file(label_path));
        const std::string text = read_file(path);
        const auto d = label["task"] == "amount" ? extract_amount(text) : extract_choice(text);
        CAPTURE(path.filename().string());
        if (label["value"].is_null()) {
            CHECK_FALSE(d.has_value());
            continue;
        }
        REQUIRE(d.has_value());
        if (label["task"] == "amount")
            CHECK(d->amount() == *Money::parse(label["value"].get<std::string>()));
        else
            CHECK(to_string(d->choice()) == label["value"].get<std::string>());
        CHECK(d->extraction_rule == label["rule"].get<std::string>());
        CHECK(d->evidence_span.end > d->evidence_span.begin);
        CHECK(d->evidence_span.end <= text.size());
    }
    CHECK(cases >= 30);
}
