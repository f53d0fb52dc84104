#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "trustsim/money.hpp"

namespace trustsim {

enum class TrustChoice { Trust, NotTrust };

std::string_view to_string(TrustChoice c);

/// Half-open byte range [begin, end) into the parsed text.
struct TextSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    bool operator==(const TextSpan &) const = default;
};

struct ParsedDecision {
    std::variant<Money, TrustChoice> value;
    TextSpan evidence_span;
    std::string extraction_rule;

    bool is_amount() const { return std::holds_alternative<Money>(value); }
    Money amount() const { return std::get<Money>(value); }
    TrustChoice choice() const { return std::get<TrustChoice>(value); }
    bool operator==(const ParsedDecision &) const = default;
};

/// Rule precedence: "Finally, I will give X dollars" > "give/send X dollars" >
/// a bare "$X"; the last match of the highest rule that fires wins. Amounts
/// outside any bounds are still returned.
std::optional<ParsedDecision> extract_amount(std::string_view text);

/// Decides from the last sentence that contains a decisive trust phrase. If
/// that sentence holds both polarities, or no sentence does, returns nullopt.
std::optional<ParsedDecision> extract_choice(std::string_view text);

struct BdiSegments {
    std::optional<TextSpan> belief;
    std::optional<TextSpan> desire;
    std::optional<TextSpan> intention;
    std::string residual;

    // Convenience accessors returning the segment text (empty when absent).
    std::string belief_text(std::string_view source) const;
    std::string desire_text(std::string_view source) const;
    std::string intention_text(std::string_view source) const;
};

BdiSegments extract_bdi(std::string_view text);

/// Amount: present and within [bounds.min, bounds.max]. Choice: present.
bool classify_validity(const std::optional<ParsedDecision> &decision, const MoneyRange &bounds);
bool classify_validity(const std::optional<ParsedDecision> &decision);

/// Amount strictly above zero (the trust-existence condition).
bool is_strictly_positive(const std::optional<ParsedDecision> &decision);

/// Canonical final sentences emitted by scripted agents.
std::string canonical_amount_sentence(Money amount);
std::string canonical_choice_sentence(TrustChoice choice);

}  // namespace trustsim
