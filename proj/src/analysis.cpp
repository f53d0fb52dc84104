#include "trustsim/analysis.hpp"

#include <algorithm>
#include <cstdlib>

#include "trustsim/digest.hpp"
#include "trustsim/error.hpp"
#include "trustsim/prompt_forge.hpp"

namespace trustsim {
namespace {

using i128 = __int128;

std::vector<const DecisionStep *> headline_steps(std::span<const TrialRecord> records) {
    std::vector<const DecisionStep *> out;
    for (const auto &r : records)
        if (const auto *s = primary_step(r)) out.push_back(s);
    return out;
}

std::string probability_key(double p) { return format_probability(p); }

int sign(std::int64_t v) { return (v > 0) - (v < 0); }

}  // namespace

double compute_vrr(std::span<const bool> validity) {
    if (validity.empty()) throw EmptyInput("no responses to score");
    const auto valid = std::count(validity.begin(), validity.end(), true);
    return 100.0 * static_cast<double>(valid) / static_cast<double>(validity.size());
}

double compute_vrr(std::span<const TrialRecord> records) {
    const auto steps = headline_steps(records);
    if (steps.empty()) throw EmptyInput("no responses to score");
    std::size_t valid = 0;
    for (const auto *s : steps) valid += s->valid;
    return 100.0 * static_cast<double>(valid) / static_cast<double>(steps.size());
}

AmountStats amount_stats(std::span<const Money> valid_amounts) {
    if (valid_amounts.empty()) throw NoValidRecords("no valid amounts");
    std::vector<std::int64_t> cents;
    cents.reserve(valid_amounts.size());
    for (Money m : valid_amounts) cents.push_back(m.in_cents());
    std::sort(cents.begin(), cents.end());

    AmountStats st;
    st.count = cents.size();
    std::int64_t total = 0;
    for (auto c : cents) {
        total += c;
        ++st.histogram[c / 100];
    }
    st.mean = static_cast<double>(total) / static_cast<double>(cents.size()) / 100.0;
    const auto n = cents.size();
    st.median = n % 2 == 1 ? static_cast<double>(cents[n / 2]) / 100.0
                           : static_cast<double>(cents[n / 2 - 1] + cents[n / 2]) / 200.0;
    return st;
}

AmountStats amount_stats(std::span<const TrialRecord> records) {
    std::vector<Money> amounts;
    for (const auto *s : headline_steps(records))
        if (s->valid && s->decision && s->decision->is_amount()) amounts.push_back(s->decision->amount());
    return amount_stats(amounts);
}

TrustRate trust_rate(std::span<const std::optional<TrustChoice>> decisions) {
    if (decisions.empty()) throw EmptyInput("no decisions");
    TrustRate r;
    for (const auto &d : decisions) {
        if (!d) ++r.excluded;
        else if (*d == TrustChoice::Trust) ++r.trust;
        else ++r.not_trust;
    }
    if (r.trust + r.not_trust == 0) throw AllAmbiguous("every decision is ambiguous");
    r.rate = 100.0 * static_cast<double>(r.trust) / static_cast<double>(r.trust + r.not_trust);
    return r;
}

TrustRateCurve trust_rate_curve(const std::map<double, std::vector<std::optional<TrustChoice>>> &grid_runs) {
    TrustRateCurve curve;
    for (const auto &[p, decisions] : grid_runs) curve[p] = trust_rate(decisions);
    return curve;
}

std::vector<double> default_probability_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(i / 10.0);
    return grid;
}

std::vector<std::optional<double>> return_ratio_series(const RepeatedTranscript &transcript, int multiplier) {
    std::vector<std::optional<double>> out;
    for (const auto &r : transcript.rounds) {
        if (r.sent.in_cents() == 0) out.emplace_back();
        else out.emplace_back(r.returned.in_dollars() / (multiplier * r.sent.in_dollars()));
    }
    return out;
}

PatternFlags detect_patterns(const RepeatedTranscript &transcript, int multiplier, const PatternConfig &config) {
    const auto &rounds = transcript.rounds;
    const std::size_t n = rounds.size();
    if (n < 2) throw TooShort("pattern detection needs at least two rounds");

    PatternFlags f;
    f.returned_exceeds_sent =
        std::all_of(rounds.begin(), rounds.end(), [](const RepeatedRound &r) { return r.returned > r.sent; });

    // Ratio_t = R_t / (k·S_t). Compared exactly:
    // |R₂/(kS₂) − R₁/(kS₁)| ≤ num/den  ⇔  |R₂S₁ − R₁S₂|·den ≤ num·k·S₁·S₂
    std::size_t defined_pairs = 0;
    bool stable = true;
    for (std::size_t t = 0; t + 2 < n; ++t) {  // the pair entering the final round is exempt
        const i128 s1 = rounds[t].sent.in_cents();
        const i128 s2 = rounds[t + 1].sent.in_cents();
        if (s1 == 0 || s2 == 0) continue;
        const i128 r1 = rounds[t].returned.in_cents();
        const i128 r2 = rounds[t + 1].returned.in_cents();
        i128 diff = r2 * s1 - r1 * s2;
        if (diff < 0) diff = -diff;
        ++defined_pairs;
        if (diff * config.stability_den > static_cast<i128>(config.stability_num) * multiplier * s1 * s2) {
            stable = false;
        }
    }
    f.stable_ratio = defined_pairs >= 1 && stable;

    int reversals = 0;
    const auto mag = config.reversal_magnitude.in_cents();
    for (std::size_t t = 0; t + 2 < n; ++t) {
        const auto d1 = rounds[t + 1].sent.in_cents() - rounds[t].sent.in_cents();
        const auto d2 = rounds[t + 2].sent.in_cents() - rounds[t + 1].sent.in_cents();
        if (std::llabs(d1) >= mag && std::llabs(d2) >= mag && sign(d1) != sign(d2)) ++reversals;
    }
    f.few_fluctuations = reversals <= config.max_reversals;
    return f;
}

PatternPrevalence pattern_prevalence(std::span<const PatternFlags> flags) {
    if (flags.empty()) throw EmptyInput("no transcripts");
    PatternPrevalence p;
    p.groups = flags.size();
    std::size_t c1 = 0, c2 = 0, c3 = 0;
    for (const auto &f : flags) {
        c1 += f.returned_exceeds_sent;
        c2 += f.stable_ratio;
        c3 += f.few_fluctuations;
    }
    const double k = static_cast<double>(flags.size());
    p.p1 = 100.0 * static_cast<double>(c1) / k;
    p.p2 = 100.0 * static_cast<double>(c2) / k;
    p.p3 = 100.0 * static_cast<double>(c3) / k;
    return p;
}

const BaselineEntry &Baselines::at(const std::string &name) const {
    const auto it = entries.find(name);
    if (it == entries.end()) throw ParseError("no baseline named '" + name + "'");
    return it->second;
}

Baselines parse_baselines(const std::string &text) {
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("constants") || !doc["constants"].is_object()) {
        throw ParseError("baselines file must be an object with a 'constants' map");
    }
    Baselines b;
    for (const auto &[name, e] : doc["constants"].items()) {
        if (!e.is_object() || !e.contains("value") || !e["value"].is_number() || !e.contains("citation") ||
            !e["citation"].is_string()) {
            throw ParseError("baseline '" + name + "' needs a numeric value and a citation");
        }
        b.entries[name] = {name, e["value"].get<double>(), e["citation"].get<std::string>(),
                           e.value("metric", std::string{})};
    }
    return b;
}

Baselines load_baselines(const std::filesystem::path &path) {
    try {
        return parse_baselines(read_file(path));
    } catch (const std::runtime_error &e) {
        if (dynamic_cast<const ParseError *>(&e)) throw;
        throw ParseError(e.what());
    }
}

std::map<std::string, double> MetricReport::scalars() const {
    std::map<std::string, double> s;
    for (const auto &[game, m] : games) {
        if (m.vrr) s[game + ".vrr"] = *m.vrr;
        if (m.positive_rate) s[game + ".positive_rate"] = *m.positive_rate;
        if (m.amounts) {
            s[game + ".amount_mean"] = m.amounts->mean;
            s[game + ".amount_median"] = m.amounts->median;
        }
        if (m.trust_rate) s[game + ".trust_rate"] = m.trust_rate->rate;
        for (const auto &[p, tr] : m.trust_rate_curve) s[game + ".trust_rate@" + probability_key(p)] = tr.rate;
    }
    if (lottery_rates.gamble_rate) s["lottery_gamble_rate"] = *lottery_rates.gamble_rate;
    if (lottery_rates.people_rate) s["lottery_people_rate"] = *lottery_rates.people_rate;
    if (pattern_prevalence) {
        s["pattern1_prevalence"] = pattern_prevalence->p1;
        s["pattern2_prevalence"] = pattern_prevalence->p2;
        s["pattern3_prevalence"] = pattern_prevalence->p3;
    }
    for (const auto &t : tests) {
        s["tests." + t.name + ".statistic"] = t.statistic;
        s["tests." + t.name + ".p_value"] = t.p_value;
        s["tests." + t.name + ".mean_a"] = t.mean_a;
        s["tests." + t.name + ".mean_b"] = t.mean_b;
    }
    return s;
}

MetricReport analyze(std::span<const TrialRecord> records, const AnalysisOptions &options) {
    std::map<GameKind, std::vector<TrialRecord>> by_game;
    for (const auto &r : records) by_game[r.game].push_back(r);

    MetricReport report;
    std::map<GameKind, std::vector<double>> amount_samples;
    for (const auto &[kind, recs] : by_game) {
        GameMetrics m;
        m.records = recs.size();
        const auto steps = headline_steps(recs);
        for (const auto &r : recs) m.failed += r.error.has_value();
        if (!steps.empty()) {
            m.vrr = compute_vrr(std::span<const TrialRecord>(recs));
            std::size_t positive = 0;
            for (const auto *s : steps) positive += s->strictly_positive;
            if (is_amount_game(kind)) {
                m.positive_rate = 100.0 * static_cast<double>(positive) / static_cast<double>(steps.size());
                try {
                    m.amounts = amount_stats(std::span<const TrialRecord>(recs));
                    for (const auto *s : steps)
                        if (s->valid && s->decision && s->decision->is_amount())
                            amount_samples[kind].push_back(s->decision->amount().in_dollars());
                } catch (const NoValidRecords &) {
                }
            } else {
                std::vector<std::optional<TrustChoice>> pooled;
                std::map<double, std::vector<std::optional<TrustChoice>>> grid;
                for (const auto &r : recs) {
                    const auto *s = primary_step(r);
                    if (!s) continue;
                    std::optional<TrustChoice> c;
                    if (s->valid && s->decision && !s->decision->is_amount()) c = s->decision->choice();
                    pooled.push_back(c);
                    if (r.probability) grid[*r.probability].push_back(c);
                }
                try {
                    m.trust_rate = trust_rate(pooled);
                } catch (const AllAmbiguous &) {
                }
                for (const auto &[p, ds] : grid) {
                    try {
                        m.trust_rate_curve[p] = trust_rate(ds);
                    } catch (const AllAmbiguous &) {
                    }
                }
            }
        }
        if (kind == GameKind::RepeatedTrust) {
            for (const auto &r : recs)
                if (r.transcript && r.transcript->rounds.size() >= 2)
                    report.pattern_flags.push_back(detect_patterns(*r.transcript, options.multiplier, options.patterns));
            if (!report.pattern_flags.empty()) report.pattern_prevalence = pattern_prevalence(report.pattern_flags);
        }
        report.games[std::string(to_string(kind))] = std::move(m);
    }

    if (auto it = report.games.find("lottery_gamble"); it != report.games.end() && it->second.trust_rate)
        report.lottery_rates.gamble_rate = it->second.trust_rate->rate;
    if (auto it = report.games.find("lottery_people"); it != report.games.end() && it->second.trust_rate)
        report.lottery_rates.people_rate = it->second.trust_rate->rate;

    for (const auto &c : options.comparisons) {
        const auto &a = amount_samples[c.greater];
        const auto &b = amount_samples[c.lesser];
        if (a.empty() || b.empty()) continue;
        try {
            report.tests.push_back(one_tailed_t_test(a, b, options.t_test, c.name));
        } catch (const DegenerateSample &) {
        }
    }
    return report;
}

std::map<std::string, double> compare_to_baseline(const MetricReport &report, const Baselines &baselines) {
    const auto scalars = report.scalars();
    std::map<std::string, double> deltas;
    for (const auto &[name, entry] : baselines.entries) {
        if (entry.metric.empty()) continue;
        const auto it = scalars.find(entry.metric);
        if (it == scalars.end()) continue;
        deltas[name] = it->second - entry.value;
    }
    return deltas;
}

}  // namespace trustsim
