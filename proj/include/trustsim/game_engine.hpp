#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trustsim/money.hpp"

namespace trustsim {

enum class GameKind {
    Trust,
    Dictator,
    MapTrust,
    RiskyDictator,
    LotteryPeople,
    LotteryGamble,
    RepeatedTrust,
};

std::string_view to_string(GameKind kind);
GameKind game_kind_from_string(std::string_view name);  // throws InvalidGameSpec

/// Games whose decision is "how many dollars"; the rest are binary choices.
bool is_amount_game(GameKind kind);
/// Games that carry a probability p.
bool has_probability(GameKind kind);

struct PayoffPair {
    Money trustor;
    Money trustee;
    bool operator==(const PayoffPair &) const = default;
};

/// Payoff cells of the binary-choice games. For LotteryGamble the trustee
/// column is unused and the cells read as (fixed, win, lose).
struct ChoicePayoffs {
    PayoffPair no_trust;
    PayoffPair both_trust;
    PayoffPair betrayed;
    bool operator==(const ChoicePayoffs &) const = default;
};

ChoicePayoffs default_payoffs(GameKind kind);

struct GameSpec {
    GameKind kind = GameKind::Trust;
    Money endowment = Money::dollars(10);
    int multiplier = 3;
    std::optional<double> probability;
    int rounds = 7;
    ChoicePayoffs payoffs = default_payoffs(GameKind::Trust);

    /// Defaults for a game kind. Probability games get p=0.46 only for the
    /// two lotteries; MapTrust/RiskyDictator need p supplied (or a grid).
    static GameSpec defaults(GameKind kind, std::optional<double> p = std::nullopt);

    /// Throws InvalidGameSpec when an invariant is broken.
    void validate() const;

    Money max_return(Money sent) const { return sent * multiplier; }
};

struct Outcome {
    Money trustor_payoff;
    Money trustee_payoff;
    bool resolved_by_chance = false;
    std::optional<double> chance_draw;  // present iff resolved_by_chance
    bool operator==(const Outcome &) const = default;
};

Outcome trust_game_payoff(Money endowment, Money sent, Money returned, int multiplier);
Outcome dictator_game_payoff(Money endowment, Money sent, int multiplier);

Outcome map_game_payoff(bool trustor_trusts, bool trustee_trusts);
Outcome map_game_payoff(const ChoicePayoffs &payoffs, bool trustor_trusts, bool trustee_trusts);

Outcome risky_dictator_outcome(bool trust, double p, double draw);
Outcome risky_dictator_outcome(const ChoicePayoffs &payoffs, bool trust, double p, double draw);

Outcome lottery_people_payoff(bool trustor_trusts, bool trustee_trusts);

Money lottery_gamble_outcome(bool gamble, double p, double draw);
Money lottery_gamble_outcome(const ChoicePayoffs &payoffs, bool gamble, double p, double draw);

/// Probability p* at which p*·both_trust + (1−p*)·betrayed equals no_trust
/// for the trustor. Throws Degenerate if both_trust == betrayed.
double indifference_probability(const ChoicePayoffs &payoffs);
/// Same, restricted to MapTrust specs (throws InvalidGameSpec otherwise).
double map_indifference_probability(const GameSpec &spec);

struct RepeatedRound {
    Money sent;
    Money received;
    Money returned;
    Money trustor_kept;
    Money trustee_kept;
    bool operator==(const RepeatedRound &) const = default;
};

struct RepeatedTranscript {
    std::vector<RepeatedRound> rounds;
    bool operator==(const RepeatedTranscript &) const = default;
};

/// Returns a copy of `transcript` with one more round. Each round starts
/// from the full endowment; nothing carries over.
RepeatedTranscript repeated_game_advance(const RepeatedTranscript &transcript, const GameSpec &spec,
                                         Money sent, Money returned);

}  // namespace trustsim
