#include "trustsim/game_engine.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "trustsim/error.hpp"

namespace trustsim {
namespace {

constexpr std::array<std::pair<GameKind, std::string_view>, 7> kKindNames{{
    {GameKind::Trust, "trust"},
    {GameKind::Dictator, "dictator"},
    {GameKind::MapTrust, "map_trust"},
    {GameKind::RiskyDictator, "risky_dictator"},
    {GameKind::LotteryPeople, "lottery_people"},
    {GameKind::LotteryGamble, "lottery_gamble"},
    {GameKind::RepeatedTrust, "repeated_trust"},
}};

PayoffPair pair(int trustor, int trustee) {
    return {Money::dollars(trustor), Money::dollars(trustee)};
}

void require_probability(double p, const char *what) {
    if (!(p >= 0.0 && p <= 1.0)) throw OutOfRange(std::string(what) + " must lie in [0, 1]");
}

void require_draw(double draw) {
    if (!(draw >= 0.0 && draw < 1.0)) throw OutOfRange("chance draw must lie in [0, 1)");
}

void require_send(Money endowment, Money sent) {
    if (sent < Money{} || sent > endowment) {
        throw OutOfRange("amount sent " + sent.to_string() + " outside [0, " + endowment.to_string() + "]");
    }
}

void require_return(Money sent, Money returned, int multiplier) {
    if (returned < Money{} || returned > sent * multiplier) {
        throw OutOfRange("amount returned " + returned.to_string() + " outside [0, " +
                         (sent * multiplier).to_string() + "]");
    }
}

}  // namespace

std::string_view to_string(GameKind kind) {
    for (const auto &[k, name] : kKindNames)
        if (k == kind) return name;
    return "unknown";
}

GameKind game_kind_from_string(std::string_view name) {
    for (const auto &[k, n] : kKindNames)
        if (n == name) return k;
    throw InvalidGameSpec("unknown game kind '" + std::string(name) + "'");
}

bool is_amount_game(GameKind kind) {
    return kind == GameKind::Trust || kind == GameKind::Dictator || kind == GameKind::RepeatedTrust;
}

bool has_probability(GameKind kind) {
    return kind == GameKind::MapTrust || kind == GameKind::RiskyDictator || kind == GameKind::LotteryPeople ||
           kind == GameKind::LotteryGamble;
}

ChoicePayoffs default_payoffs(GameKind kind) {
    switch (kind) {
        case GameKind::LotteryPeople:
            return {pair(5, 0), pair(10, 10), pair(0, 20)};
        case GameKind::LotteryGamble:
            return {pair(5, 0), pair(10, 0), pair(0, 0)};
        default:
            return {pair(10, 10), pair(15, 15), pair(8, 22)};
    }
}

GameSpec GameSpec::defaults(GameKind kind, std::optional<double> p) {
    GameSpec spec;
    spec.kind = kind;
    spec.payoffs = default_payoffs(kind);
    if (has_probability(kind)) {
        if (p) {
            spec.probability = p;
        } else if (kind == GameKind::LotteryPeople || kind == GameKind::LotteryGamble) {
            spec.probability = 0.46;
        }
    }
    return spec;
}

void GameSpec::validate() const {
    if (multiplier < 1) throw InvalidGameSpec("multiplier must be >= 1");
    if (endowment <= Money{}) throw InvalidGameSpec("endowment must be positive");
    if (rounds < 1) throw InvalidGameSpec("rounds must be >= 1");
    if (has_probability(kind)) {
        if (!probability) throw InvalidGameSpec(std::string(to_string(kind)) + " requires a probability");
        if (!(*probability >= 0.0 && *probability <= 1.0))
            throw InvalidGameSpec("probability must lie in [0, 1]");
    } else if (probability) {
        throw InvalidGameSpec(std::string(to_string(kind)) + " takes no probability");
    }
}

Outcome trust_game_payoff(Money endowment, Money sent, Money returned, int multiplier) {
    require_send(endowment, sent);
    require_return(sent, returned, multiplier);
    return {endowment - sent + returned, sent * multiplier - returned, false, std::nullopt};
}

Outcome dictator_game_payoff(Money endowment, Money sent, int multiplier) {
    require_send(endowment, sent);
    return {endowment - sent, sent * multiplier, false, std::nullopt};
}

Outcome map_game_payoff(const ChoicePayoffs &payoffs, bool trustor_trusts, bool trustee_trusts) {
    const PayoffPair &cell = !trustor_trusts ? payoffs.no_trust
                             : trustee_trusts ? payoffs.both_trust
                                              : payoffs.betrayed;
    return {cell.trustor, cell.trustee, false, std::nullopt};
}

Outcome map_game_payoff(bool trustor_trusts, bool trustee_trusts) {
    return map_game_payoff(default_payoffs(GameKind::MapTrust), trustor_trusts, trustee_trusts);
}

Outcome risky_dictator_outcome(const ChoicePayoffs &payoffs, bool trust, double p, double draw) {
    require_probability(p, "probability");
    require_draw(draw);
    if (!trust) return {payoffs.no_trust.trustor, payoffs.no_trust.trustee, false, std::nullopt};
    const PayoffPair &cell = draw < p ? payoffs.both_trust : payoffs.betrayed;
    return {cell.trustor, cell.trustee, true, draw};
}

Outcome risky_dictator_outcome(bool trust, double p, double draw) {
    return risky_dictator_outcome(default_payoffs(GameKind::RiskyDictator), trust, p, draw);
}

Outcome lottery_people_payoff(bool trustor_trusts, bool trustee_trusts) {
    return map_game_payoff(default_payoffs(GameKind::LotteryPeople), trustor_trusts, trustee_trusts);
}

Money lottery_gamble_outcome(const ChoicePayoffs &payoffs, bool gamble, double p, double draw) {
    require_probability(p, "probability");
    require_draw(draw);
    if (!gamble) return payoffs.no_trust.trustor;
    return draw < p ? payoffs.both_trust.trustor : payoffs.betrayed.trustor;
}

Money lottery_gamble_outcome(bool gamble, double p, double draw) {
    return lottery_gamble_outcome(default_payoffs(GameKind::LotteryGamble), gamble, p, draw);
}

double indifference_probability(const ChoicePayoffs &payoffs) {
    // p·good + (1−p)·bad = safe  ⇒  p = (safe − bad) / (good − bad)
    const auto good = payoffs.both_trust.trustor.in_cents();
    const auto bad = payoffs.betrayed.trustor.in_cents();
    const auto safe = payoffs.no_trust.trustor.in_cents();
    if (good == bad) throw Degenerate("trust payoffs are equal; expected value never crosses the safe payoff");
    return static_cast<double>(safe - bad) / static_cast<double>(good - bad);
}

double map_indifference_probability(const GameSpec &spec) {
    if (spec.kind != GameKind::MapTrust) throw InvalidGameSpec("indifference point is defined for map_trust");
    return indifference_probability(spec.payoffs);
}

RepeatedTranscript repeated_game_advance(const RepeatedTranscript &transcript, const GameSpec &spec, Money sent,
                                         Money returned) {
    if (static_cast<int>(transcript.rounds.size()) >= spec.rounds) {
        throw GameOver("transcript already holds " + std::to_string(spec.rounds) + " rounds");
    }
    const Outcome o = trust_game_payoff(spec.endowment, sent, returned, spec.multiplier);
    RepeatedTranscript next = transcript;
    next.rounds.push_back({sent, sent * spec.multiplier, returned, o.trustor_payoff, o.trustee_payoff});
    return next;
}

}  // namespace trustsim
