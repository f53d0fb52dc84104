// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "support/oracles.hpp"
#include "support/workspace.hpp"
#include "trustsim/agent.hpp"
#include "trustsim/digest.hpp"
#include "trustsim/experiment.hpp"
#include "trustsim/stats.hpp"

using namespace trustsim;
using namespace trustsim::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Check {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string &what) {
        if (!ok) failures.push_back(what);
    }
};

struct Criterion {
    std::string name;
    double limit_ms;  // 0 = untimed
    std::function<void(Check &)> body;
};

bool same_cells(const Outcome &o, std::int64_t trustor, std::int64_t trustee) {
    return o.trustor_payoff == Money::dollars(trustor) && o.trustee_payoff == Money::dollars(trustee);
}

std::string num(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

std::string stripped_lines(const fs::path &records) {
    std::ifstream in(records);
    std::string out;
    for (std::string line; std::getline(in, line);) out += strip_wall_clock(json::parse(line)).dump() + "\n";
    return out;
}

void payoff_golden(Check &c) {
    c.expect(same_cells(map_game_payoff(false, true), 10, 10), "map (false,true) != (10,10)");
    c.expect(same_cells(map_game_payoff(false, false), 10, 10), "map (false,false) != (10,10)");
    c.expect(same_cells(map_game_payoff(true, true), 15, 15), "map (true,true) != (15,15)");
    c.expect(same_cells(map_game_payoff(true, false), 8, 22), "map (true,false) != (8,22)");
    c.expect(same_cells(lottery_people_payoff(false, false), 5, 0), "lottery (false,false) != (5,0)");
    c.expect(same_cells(lottery_people_payoff(false, true), 5, 0), "lottery (false,true) != (5,0)");
    c.expect(same_cells(lottery_people_payoff(true, true), 10, 10), "lottery (true,true) != (10,10)");
    c.expect(same_cells(lottery_people_payoff(true, false), 0, 20), "lottery (true,false) != (0,20)");
}

void conservation(Check &c) {
    std::mt19937_64 rng(20240611);
    const auto spec = GameSpec::defaults(GameKind::RepeatedTrust);
    for (int i = 0; i < 10000; ++i) {
        const auto sent = static_cast<std::int64_t>(rng() % 1001);
        const auto returned = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(3 * sent + 1));
        const auto o = trust_game_payoff(Money::dollars(10), Money::cents(sent), Money::cents(returned), 3);
        const auto total = (o.trustor_payoff + o.trustee_payoff).in_cents();
        if (total != 1000 + 2 * sent) {
            c.expect(false, "sent " + std::to_string(sent) + " returned " + std::to_string(returned) +
                                " total " + std::to_string(total));
            return;
        }
        const auto round = repeated_game_advance({}, spec, Money::cents(sent), Money::cents(returned)).rounds[0];
        if ((round.trustor_kept + round.trustee_kept).in_cents() != 1000 + 2 * sent) {
            c.expect(false, "repeated round breaks conservation at sent " + std::to_string(sent));
            return;
        }
    }
}

void rational_curve(Check &c) {
    const auto agent = rational_ev_agent();
    const auto roster = synthetic_roster(1);
    auto decide = [&](GameKind kind, double p) {
        const auto spec = GameSpec::defaults(kind, p);
        DecisionRequest r{make_bundle(roster.at(0), spec, Role::Trustor), Role::Trustor,
                          decision_space_for(spec, Role::Trustor), "acc/p1/" + std::string(to_string(kind)), spec};
        return agent->decide(r).decision->choice();
    };
    for (double p : default_probability_grid()) {
        const auto expected = p < 2.0 / 7.0 ? TrustChoice::NotTrust : TrustChoice::Trust;
        c.expect(decide(GameKind::MapTrust, p) == expected, "MAP decision wrong at p=" + format_probability(p));
    }
    c.expect(decide(GameKind::LotteryGamble, 0.46) == TrustChoice::NotTrust, "lottery gamble at 0.46 gambles");

    TempDir dir;
    json doc{{"run_id", "curve"}, {"game", "map_trust"}, {"roster", (data_dir() / "personas" / "exemplars.json").string()},
             {"agent", {{"kind", "rational"}}}, {"output_dir", "out"}};
    const auto run = run_experiment(parse_run_config(doc, dir.path()));
    const auto curve = analyze(run.records).games.at("map_trust").trust_rate_curve;
    c.expect(curve.size() == 10, "curve has " + std::to_string(curve.size()) + " points");
    for (const auto &[p, r] : curve)
        c.expect(r.rate == (p < 2.0 / 7.0 ? 0.0 : 100.0), "run curve at p=" + format_probability(p) + " is " + num(r.rate));
}

void pattern_oracle(Check &c) {
    std::mt19937_64 rng(1000);
    int disagreements = 0;
    int held[3] = {0, 0, 0};
    for (int i = 0; i < 1000; ++i) {
        const auto t = random_transcript(rng);
        const auto f = detect_patterns(t);
        if (!(f == brute_force_patterns(t))) ++disagreements;
        held[0] += f.returned_exceeds_sent;
        held[1] += f.stable_ratio;
        held[2] += f.few_fluctuations;
    }
    c.expect(disagreements == 0, std::to_string(disagreements) + " of 1000 transcripts disagree with the oracle");
    // The sample must exercise both outcomes of every pattern.
    for (int k = 0; k < 3; ++k)
        c.expect(held[k] >= 50 && held[k] <= 950, "pattern " + std::to_string(k + 1) + " holds in " +
                                                      std::to_string(held[k]) + " of 1000 transcripts");

    const auto constant = transcript_of({5, 5, 5, 5, 5, 5, 5}, {8, 8, 8, 8, 8, 8, 8});
    c.expect(detect_patterns(constant) == PatternFlags{true, true, true}, "constant fixture flags");
    c.expect(brute_force_patterns(constant) == PatternFlags{true, true, true}, "constant fixture oracle flags");

    // Ratio 0.0 then 0.1 (or 0.1 + 1e-9) with a large endowment so the jump is exact in cents.
    GameSpec big = GameSpec::defaults(GameKind::RepeatedTrust);
    big.endowment = Money::cents(1000000000);
    big.rounds = 3;
    auto boundary = [&](std::int64_t returned) {
        RepeatedTranscript t;
        t = repeated_game_advance(t, big, big.endowment, Money{});
        t = repeated_game_advance(t, big, big.endowment, Money::cents(returned));
        t = repeated_game_advance(t, big, big.endowment, Money{});
        return t;
    };
    const auto exact = boundary(300000000), over = boundary(300000003);
    c.expect(detect_patterns(exact).stable_ratio, "jump of exactly 0.10 rejected");
    c.expect(!detect_patterns(over).stable_ratio, "jump of 0.10 + 1e-9 accepted");
    c.expect(brute_force_patterns(exact).stable_ratio && !brute_force_patterns(over).stable_ratio,
             "oracle disagrees at the 0.10 boundary");
}

void t_test_oracle(Check &c) {
    // The reference reproduces the one-tailed table value t(0.05, 10) = 1.812.
    const boost::math::students_t_distribution<long double> ten(10);
    const double table_p = static_cast<double>(boost::math::cdf(boost::math::complement(ten, 1.812L)));
    c.expect(std::abs(table_p - 0.05) < 5e-4, "reference table check p=" + num(table_p));
    c.expect(std::abs(student_t_upper_tail(1.812, 10) - 0.05) < 5e-4, "in-house table check");

    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal(0, 1);
    for (int i = 0; i < 20; ++i) {
        const int na = 2 + static_cast<int>(rng() % 30), nb = 2 + static_cast<int>(rng() % 30);
        const double shift = normal(rng), scale = 0.5 + (rng() % 100) / 25.0;
        std::vector<double> a, b;
        for (int k = 0; k < na; ++k) a.push_back(normal(rng) * scale + shift);
        for (int k = 0; k < nb; ++k) b.push_back(normal(rng));
        for (auto variant : {TTestVariant::Welch, TTestVariant::Student}) {
            const auto ours = one_tailed_t_test(a, b, variant);
            const auto ref = reference_t_test(a, b, variant == TTestVariant::Welch);
            const double diff = std::abs(ours.p_value - static_cast<double>(ref.p_value));
            c.expect(diff < 1e-6, "pair " + std::to_string(i) + " differs by " + num(diff));
        }
    }
    const std::vector<double> same{3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0};
    const auto identical = one_tailed_t_test(same, same);
    c.expect(std::abs(identical.p_value - 0.5) < 1e-12, "identical samples p=" + num(identical.p_value));
}

void parser_suite(Check &c) {
    const auto dir = test_dir() / "fixtures" / "parser";
    for (const auto &[file, dollars] : {std::pair{"excerpt_high_amount.txt", 10}, std::pair{"excerpt_low_amount.txt", 5}}) {
        const auto d = extract_amount(read_file(dir / file));
        c.expect(d && d->amount() == Money::dollars(dollars) && d->extraction_rule == "final_sentence",
                 std::string(file) + " does not parse to " + std::to_string(dollars));
    }
    for (int n = 0; n <= 10; ++n) {
        const auto d = extract_amount(canonical_amount_sentence(Money::dollars(n)));
        c.expect(d && d->amount() == Money::dollars(n), "round trip fails for " + std::to_string(n));
    }
    int cases = 0, passed = 0;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt") continue;
        ++cases;
        auto label_path = entry.path();
        label_path.replace_extension(".label.json");
        const auto label = json::parse(read_file(label_path));
        const auto text = read_file(entry.path());
        const bool amount = label["task"] == "amount";
        const auto d = amount ? extract_amount(text) : extract_choice(text);
        bool ok;
        if (label["value"].is_null()) ok = !d;
        else if (!d) ok = false;
        else if (amount) ok = d->amount() == Money::parse(label["value"].get<std::string>());
        else ok = std::string(to_string(d->choice())) == label["value"].get<std::string>();
        if (ok && d) ok = d->extraction_rule == label["rule"].get<std::string>();
        if (ok) ++passed;
        else c.expect(false, "corpus case " + entry.path().filename().string());
    }
    c.expect(cases >= 30, "corpus has only " + std::to_string(cases) + " cases");
    c.expect(passed == cases, std::to_string(passed) + "/" + std::to_string(cases) + " corpus cases pass");
}

void prompt_fidelity(Check &c) {
    const auto checks = validate_prompts(data_dir() / "prompts");
    c.expect(checks.size() >= 16, "only " + std::to_string(checks.size()) + " fixtures checked");
    for (const auto &k : checks)
        c.expect(k.status == PromptCheck::Status::Pass, k.file + " does not match at byte " + std::to_string(k.offset));
}

void end_to_end(Check &c) {
    TempDir dir;
    const auto roster_path = write_roster(dir.path(), 53);
    const auto roster = load_roster(roster_path);
    json canned = json::object();
    for (std::size_t i = 0; i < 53; ++i) {
        std::string reply;
        if (i < 50) reply = "I believe in fairness. Finally, I will give " + std::to_string(i % 10) + " dollars.";
        else if (i == 50) reply = "I refuse to answer.";
        else if (i == 51) reply = "Finally, I will give 15 dollars.";
        else reply = "Finally, I will give 10 dollars.";
        canned["e2e/" + roster.at(i).id + "/trust/base/trustor/1"] = reply;
    }
    write_file(dir / "canned.json", canned.dump());
    json doc{{"run_id", "e2e"}, {"game", "trust"}, {"roster", roster_path.string()},
             {"agent", {{"kind", "replay"}, {"path", "canned.json"}}}, {"output_dir", "p1"}};

    const auto one = run_experiment(parse_run_config(doc, dir.path()));
    doc["output_dir"] = "p16";
    doc["parallelism"] = 16;
    const auto many = run_experiment(parse_run_config(doc, dir.path()));

    c.expect(one.exit_code == ExitCode::Clean && many.exit_code == ExitCode::Clean, "run did not exit cleanly");
    c.expect(one.records.size() == 53, "expected 53 records");
    const auto report = write_report(one.run_dir / "records.jsonl");
    const auto s = report.scalars();
    // 51 valid of 53; valid amounts are 0..9 five times each plus one 10.
    const double vrr = 100.0 * 51.0 / 53.0, mean = 235.0 / 51.0, median = 5.0;
    c.expect(std::abs(s.at("trust.vrr") - vrr) < 1e-12, "VRR " + num(s.at("trust.vrr")));
    c.expect(std::abs(s.at("trust.amount_mean") - mean) < 1e-12, "mean " + num(s.at("trust.amount_mean")));
    c.expect(s.at("trust.amount_median") == median, "median " + num(s.at("trust.amount_median")));
    c.expect(stripped_lines(one.run_dir / "records.jsonl") == stripped_lines(many.run_dir / "records.jsonl"),
             "parallelism 1 and 16 records differ");
}

void baselines(Check &c) {
    const auto shipped = load_baselines(data_dir() / "baselines.json");
    c.expect(shipped.contains("human_avg_sent") && shipped.at("human_avg_sent").value == 5.97 &&
                 !shipped.at("human_avg_sent").citation.empty(),
             "human_avg_sent 5.97 missing");
    auto value = [&](const char *name) { return shipped.at(name).value; };
    c.expect(value("gpt4_lottery_people_rate") - value("human_lottery_people_rate") == 18.0, "people delta != +18");
    c.expect(value("gpt4_lottery_gamble_rate") - value("human_lottery_gamble_rate") == -8.0, "gamble delta != -8");
    c.expect(std::abs(value("gpt4_trust_game_avg_sent") - value("human_avg_sent") - 0.93) < 1e-12, "6.9 - 5.97 != 0.93");

    // A replayed run with 72% people trust and 21% gambling reports the same deltas.
    TempDir dir;
    const auto roster_path = write_roster(dir.path(), 100);
    const auto roster = load_roster(roster_path);
    json canned = json::object();
    for (std::size_t i = 0; i < 100; ++i) {
        const auto &id = roster.at(i).id;
        canned["lot/" + id + "/lottery_people/p=0.46/trustor/1"] =
            i < 72 ? "I choose to trust the other player." : "I will not trust the other player.";
        canned["lot/" + id + "/lottery_gamble/p=0.46/trustor/1"] =
            i < 21 ? "I choose to trust the bet." : "I choose not to trust the bet.";
    }
    write_file(dir / "canned.json", canned.dump());
    json doc{{"run_id", "lot"}, {"games", {"lottery_people", "lottery_gamble"}}, {"roster", roster_path.string()},
             {"agent", {{"kind", "replay"}, {"path", "canned.json"}}}, {"output_dir", "out"}};
    const auto run = run_experiment(parse_run_config(doc, dir.path()));
    const auto report = write_report(run.run_dir / "records.jsonl");
    c.expect(report.lottery_rates.people_rate == 72.0, "people rate " + num(report.lottery_rates.people_rate.value_or(-1)));
    c.expect(report.lottery_rates.gamble_rate == 21.0, "gamble rate " + num(report.lottery_rates.gamble_rate.value_or(-1)));
    const auto &d = report.baseline_deltas;
    c.expect(d.count("human_lottery_people_rate") && d.at("human_lottery_people_rate") == 18.0, "report people delta");
    c.expect(d.count("human_lottery_gamble_rate") && d.at("human_lottery_gamble_rate") == -8.0, "report gamble delta");
    const auto summary = read_file(run.run_dir / "summary.csv");
    c.expect(summary.find("baseline_delta.human_lottery_people_rate,18\n") != std::string::npos, "summary people delta");
    c.expect(summary.find("baseline_delta.human_lottery_gamble_rate,-8\n") != std::string::npos, "summary gamble delta");
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"payoff golden cells (map, lottery people)", 1000, payoff_golden},
        {"conservation over 10,000 random pairs", 1000, conservation},
        {"rational agent MAP step at 2/7 and lottery gamble at 0.46", 0, rational_curve},
        {"pattern detector matches brute-force oracle", 5000, pattern_oracle},
        {"t-test matches Boost reference", 1000, t_test_oracle},
        {"parser fixture suite", 1000, parser_suite},
        {"prompt fidelity", 1000, prompt_fidelity},
        {"53-persona end-to-end replay run", 10000, end_to_end},
        {"baseline deltas", 0, baselines},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto &k = criteria[i];
        Check check;
        const auto started = std::chrono::steady_clock::now();
        try {
            k.body(check);
        } catch (const std::exception &e) {
            check.expect(false, std::string("exception: ") + e.what());
        }
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        if (k.limit_ms > 0 && ms >= k.limit_ms) check.expect(false, "took " + num(ms) + " ms, limit " + num(k.limit_ms));
        const bool ok = check.failures.empty();
        if (!ok) ++failed;
        std::printf("%s [%zu] %s (%.1f ms)\n", ok ? "PASS" : "FAIL", i + 1, k.name.c_str(), ms);
        for (const auto &f : check.failures) std::printf("    %s\n", f.c_str());
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
