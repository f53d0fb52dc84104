#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trustsim/game_engine.hpp"
#include "trustsim/records.hpp"
#include "trustsim/stats.hpp"

namespace trustsim {

/// 100 · valid / total over each record's headline (first trustor) decision.
/// Records without a decision (failed trials) are not responses and are skipped.
double compute_vrr(std::span<const TrialRecord> records);
double compute_vrr(std::span<const bool> validity);

struct AmountStats {
    double mean = 0.0;    // dollars
    double median = 0.0;  // dollars
    std::map<std::int64_t, std::size_t> histogram;  // whole-dollar bin → count
    std::size_t count = 0;
};

AmountStats amount_stats(std::span<const Money> valid_amounts);
/// Over valid headline amounts only.
AmountStats amount_stats(std::span<const TrialRecord> records);

struct TrustRate {
    double rate = 0.0;  // percent
    std::size_t trust = 0;
    std::size_t not_trust = 0;
    std::size_t excluded = 0;  // ambiguous / absent
};

TrustRate trust_rate(std::span<const std::optional<TrustChoice>> decisions);

using TrustRateCurve = std::map<double, TrustRate>;
TrustRateCurve trust_rate_curve(const std::map<double, std::vector<std::optional<TrustChoice>>> &grid_runs);

/// The probability grid 0.1, 0.2, …, 1.0.
std::vector<double> default_probability_grid();

/// Thresholds for the repeated-game patterns.
struct PatternConfig {
    // |Δ ratio| ≤ stability_num / stability_den counts as stable.
    std::int64_t stability_num = 1;
    std::int64_t stability_den = 10;
    // A reversal is a sign change between successive sent differences that are
    // both at least this large.
    Money reversal_magnitude = Money::dollars(3);
    int max_reversals = 1;
};

struct PatternFlags {
    bool returned_exceeds_sent = false;  // pattern 1
    bool stable_ratio = false;           // pattern 2
    bool few_fluctuations = false;       // pattern 3
    bool operator==(const PatternFlags &) const = default;
};

/// Throws TooShort for fewer than two rounds.
PatternFlags detect_patterns(const RepeatedTranscript &transcript, int multiplier = 3,
                             const PatternConfig &config = {});

/// Returned / (multiplier · sent) for each round; nullopt where sent is zero.
std::vector<std::optional<double>> return_ratio_series(const RepeatedTranscript &transcript, int multiplier = 3);

struct PatternPrevalence {
    double p1 = 0.0;
    double p2 = 0.0;
    double p3 = 0.0;
    std::size_t groups = 0;
};

PatternPrevalence pattern_prevalence(std::span<const PatternFlags> flags);

struct BaselineEntry {
    std::string name;
    double value = 0.0;
    std::string citation;
    std::string metric;  // report scalar this constant is compared against; may be empty
};

struct Baselines {
    std::map<std::string, BaselineEntry> entries;
    const BaselineEntry &at(const std::string &name) const;
    bool contains(const std::string &name) const { return entries.count(name) != 0; }
};

Baselines load_baselines(const std::filesystem::path &path);
Baselines parse_baselines(const std::string &text);

struct GameMetrics {
    std::size_t records = 0;
    std::size_t failed = 0;
    std::optional<double> vrr;
    std::optional<double> positive_rate;  // percent of responses with amount > 0
    std::optional<AmountStats> amounts;
    std::optional<TrustRate> trust_rate;  // pooled over all probabilities
    TrustRateCurve trust_rate_curve;
};

struct LotteryRates {
    std::optional<double> gamble_rate;
    std::optional<double> people_rate;
};

struct MetricReport {
    std::map<std::string, GameMetrics> games;  // keyed by game kind name
    LotteryRates lottery_rates;
    std::optional<PatternPrevalence> pattern_prevalence;
    std::vector<PatternFlags> pattern_flags;
    std::vector<TestResult> tests;
    std::map<std::string, double> baseline_deltas;

    /// Flat view: "trust.vrr", "trust.amount_mean", "lottery_people_rate",
    /// "pattern1_prevalence", "tests.<name>.p_value", …
    std::map<std::string, double> scalars() const;
};

/// One-tailed comparison of headline amounts, H1: mean(greater) > mean(lesser).
struct Comparison {
    std::string name;
    GameKind greater = GameKind::Trust;
    GameKind lesser = GameKind::Dictator;
};

struct AnalysisOptions {
    PatternConfig patterns;
    TTestVariant t_test = TTestVariant::Welch;
    int multiplier = 3;
    std::vector<Comparison> comparisons = {{"trust_vs_dictator", GameKind::Trust, GameKind::Dictator}};
};

/// Metrics for every game present in `records`, plus each comparison whose
/// two games both have valid amounts and non-degenerate samples.
MetricReport analyze(std::span<const TrialRecord> records, const AnalysisOptions &options = {});

/// report scalar − baseline value for every baseline whose metric is present.
std::map<std::string, double> compare_to_baseline(const MetricReport &report, const Baselines &baselines);

}  // namespace trustsim
