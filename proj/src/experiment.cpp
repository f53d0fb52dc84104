#include "trustsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "trustsim/clock.hpp"
#include "trustsim/config_json.hpp"
#include "trustsim/digest.hpp"
#include "trustsim/error.hpp"

namespace trustsim {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double unit_draw(std::mt19937_64 &g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

fs::path resolve(const fs::path &base, const fs::path &p) { return p.is_absolute() ? p : base / p; }

TrustChoice choice_from_string(const std::string &s) {
    if (s == "trust") return TrustChoice::Trust;
    if (s == "not_trust") return TrustChoice::NotTrust;
    throw ConfigError("choice must be 'trust' or 'not_trust', got '" + s + "'");
}

AgentChoice parse_agent(const json &j, const fs::path &base) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ConfigError("agent must be an object with a 'kind'");
    AgentChoice a;
    a.kind = j["kind"].get<std::string>();
    if (a.kind == "fixed") {
        if (j.contains("amount")) a.amount = config_money(j["amount"], "agent.amount");
        if (j.contains("choice")) a.choice = choice_from_string(j["choice"].get<std::string>());
        if (!a.amount && !a.choice) throw ConfigError("fixed agent needs 'amount' or 'choice'");
    } else if (a.kind == "replay") {
        if (!j.contains("path")) throw ConfigError("replay agent needs 'path'");
        a.replay_path = resolve(base, j["path"].get<std::string>());
    } else if (a.kind == "llm") {
        if (!j.contains("model")) throw ConfigError("llm agent needs 'model'");
        a.llm.model_name = j["model"].get<std::string>();
        a.llm.endpoint_url = j.value("endpoint", a.llm.endpoint_url);
        a.llm.temperature = j.value("temperature", a.llm.temperature);
        a.llm.max_retries = j.value("max_retries", a.llm.max_retries);
        a.llm.request_timeout = std::chrono::duration<double>(j.value("timeout_s", a.llm.request_timeout.count()));
        a.llm.initial_backoff =
            std::chrono::duration<double>(j.value("initial_backoff_s", a.llm.initial_backoff.count()));
        a.llm.parallelism_limit = j.value("parallelism_limit", a.llm.parallelism_limit);
        a.llm.api_key_env = j.value("api_key_env", a.llm.api_key_env);
        a.llm.reask_invalid = j.value("reask_invalid", a.llm.reask_invalid);
        if (j.contains("cache_dir")) a.cache_dir = resolve(base, j["cache_dir"].get<std::string>());
        if (a.llm.max_retries < 0 || a.llm.parallelism_limit < 1)
            throw ConfigError("llm max_retries must be >= 0 and parallelism_limit >= 1");
    } else if (a.kind != "rational") {
        throw ConfigError("unknown agent kind '" + a.kind + "'");
    }
    return a;
}

std::map<std::string, std::string> load_canned(const fs::path &path) {
    std::map<std::string, std::string> canned;
    if (path.extension() == ".jsonl") {
        for (const auto &r : load_records(path))
            for (const auto &s : r.steps) canned[step_key(r.trial_key, s.role, s.round)] = s.raw_text;
        return canned;
    }
    const auto doc = json::parse(read_file(path), nullptr, false);
    const json *replies = &doc;
    if (doc.is_object() && doc.contains("replies")) replies = &doc["replies"];
    if (!replies->is_object()) throw ConfigError("replay file must map step keys to reply text: " + path.string());
    for (const auto &[k, v] : replies->items()) {
        if (!v.is_string()) throw ConfigError("replay entry '" + k + "' is not a string");
        canned[k] = v.get<std::string>();
    }
    return canned;
}

AgentPtr build_agent(const AgentChoice &a) {
    if (a.kind == "fixed") {
        if (a.choice) return scripted_fixed(*a.choice);
        // The range is checked per request against the actual decision space.
        return scripted_fixed(*a.amount, {Money{}, *a.amount});
    }
    if (a.kind == "rational") return rational_ev_agent();
    if (a.kind == "replay") {
        try {
            return replay_agent(load_canned(a.replay_path));
        } catch (const ConfigError &) {
            throw;
        } catch (const std::exception &e) {
            throw ConfigError("cannot load replay file: " + std::string(e.what()));
        }
    }
    std::shared_ptr<ResponseCache> cache;
    if (a.cache_dir) cache = std::make_shared<ResponseCache>(*a.cache_dir);
    return llm_agent(a.llm, cache);
}

struct TrialPlan {
    std::size_t index = 0;
    GameSpec spec;
    std::string condition;
    std::size_t trustor = 0;
    std::optional<std::size_t> trustee;
    std::optional<int> group;
    int sample = 0;
    std::string trial_key;
};

std::string two_digits(int v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", v);
    return buf;
}

// Pairs for the repeated game: a seeded partial Fisher-Yates shuffle. When the
// roster is large enough no persona appears in two groups.
std::vector<std::pair<std::size_t, std::size_t>> draw_pairs(std::size_t n, int groups, std::uint64_t seed) {
    std::mt19937_64 g(splitmix64(seed));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    auto draw_distinct = [&](std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(g() % (n - i));
            std::swap(order[i], order[j]);
        }
    };
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (n >= static_cast<std::size_t>(2 * groups)) {
        draw_distinct(static_cast<std::size_t>(2 * groups));
        for (int k = 0; k < groups; ++k) pairs.emplace_back(order[2 * k], order[2 * k + 1]);
    } else {
        for (int k = 0; k < groups; ++k) {
            draw_distinct(2);
            pairs.emplace_back(order[0], order[1]);
        }
    }
    return pairs;
}

std::vector<std::optional<double>> conditions_for(const RunConfig &config, const GameSpec &spec) {
    if (!has_probability(spec.kind)) return {std::nullopt};
    std::vector<std::optional<double>> out;
    if (config.probability_grid) {
        for (double p : *config.probability_grid) out.emplace_back(p);
    } else if (spec.probability) {
        out.emplace_back(spec.probability);
    } else {
        for (double p : default_probability_grid()) out.emplace_back(p);
    }
    return out;
}

std::string condition_label(const std::optional<double> &p) { return p ? "p=" + format_probability(*p) : "base"; }

struct Plan {
    std::vector<TrialPlan> trials;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

Plan plan_trials(const RunConfig &config, const Roster &roster) {
    Plan plan;
    const std::size_t n = roster.size();
    auto sample_suffix = [&](int s) { return config.samples_per_cell > 1 ? "/s" + std::to_string(s) : std::string{}; };
    for (const auto &base : config.games) {
        const std::string game(to_string(base.kind));
        if (base.kind == GameKind::RepeatedTrust) {
            plan.pairs = draw_pairs(n, config.repeated_groups, config.seed);
            for (int g = 0; g < config.repeated_groups; ++g) {
                const auto [a, b] = plan.pairs[static_cast<std::size_t>(g)];
                for (int s = 0; s < config.samples_per_cell; ++s) {
                    TrialPlan t;
                    t.spec = base;
                    t.condition = "base";
                    t.trustor = a;
                    t.trustee = b;
                    t.group = g + 1;
                    t.sample = s;
                    t.trial_key = config.run_id + "/g" + two_digits(g + 1) + ":" + roster.at(a).id + "~" +
                                  roster.at(b).id + "/" + game + "/base" + sample_suffix(s);
                    plan.trials.push_back(std::move(t));
                }
            }
            continue;
        }
        for (const auto &p : conditions_for(config, base)) {
            GameSpec spec = base;
            spec.probability = p;
            for (std::size_t i = 0; i < n; ++i) {
                for (int s = 0; s < config.samples_per_cell; ++s) {
                    TrialPlan t;
                    t.spec = spec;
                    t.condition = condition_label(p);
                    t.trustor = i;
                    if (base.kind == GameKind::Trust && config.trustee_agent) t.trustee = (i + 1) % n;
                    t.sample = s;
                    t.trial_key =
                        config.run_id + "/" + roster.at(i).id + "/" + game + "/" + t.condition + sample_suffix(s);
                    plan.trials.push_back(std::move(t));
                }
            }
        }
    }
    for (std::size_t i = 0; i < plan.trials.size(); ++i) plan.trials[i].index = i;
    return plan;
}

struct RunContext {
    const RunConfig &config;
    const Roster &roster;
    AgentPtr trustor;
    AgentPtr trustee;  // may be null for one-shot games
};

PromptBundle build_bundle(const RunContext &ctx, const Persona &persona, const GameSpec &spec, Role role, int round,
                          const std::optional<RoundSummary> &summary, std::optional<Money> offered) {
    PromptBundle b = make_bundle(persona, spec, role, 1);
    if (round >= 2) b.user_prompt += "\n\n" + game_prompt(spec, role, round, summary, &b.placeholders_filled);
    if (offered) b.user_prompt += "\n\n" + trustee_offer_prompt(*offered, spec.max_return(*offered));
    if (role == Role::Trustor)
        for (const auto &m : ctx.config.mutations) b = apply_mutation(b, m);
    if (ctx.config.bdi) b = attach_bdi_instruction(b);
    return b;
}

const DecisionStep &ask(TrialRecord &rec, const AgentPtr &agent, PromptBundle bundle, Role role, int round,
                        const GameSpec &spec, DecisionSpace space) {
    DecisionRequest req{std::move(bundle), role, space, step_key(rec.trial_key, role, round), spec};
    const auto response = agent->decide(req);
    rec.steps.push_back(make_step(req, round, response));
    return rec.steps.back();
}

// Outcome of a binary-choice game. `draw` resolves the chance node and is
// ignored when the trustor declines.
Outcome choice_outcome(const GameSpec &spec, TrustChoice choice, double draw) {
    const bool trust = choice == TrustChoice::Trust;
    const double p = *spec.probability;
    if (!trust) {
        if (spec.kind == GameKind::LotteryGamble) return Outcome{spec.payoffs.no_trust.trustor, Money{}, false, {}};
        return map_game_payoff(spec.payoffs, false, false);
    }
    switch (spec.kind) {
        case GameKind::RiskyDictator: return risky_dictator_outcome(spec.payoffs, true, p, draw);
        case GameKind::LotteryGamble:
            return Outcome{lottery_gamble_outcome(spec.payoffs, true, p, draw), Money{}, true, draw};
        default: {
            Outcome o = map_game_payoff(spec.payoffs, true, draw < p);
            o.resolved_by_chance = true;
            o.chance_draw = draw;
            return o;
        }
    }
}

void run_one_shot(const RunContext &ctx, const TrialPlan &t, TrialRecord &rec, std::mt19937_64 &rng) {
    const auto &spec = t.spec;
    const auto &persona = ctx.roster.at(t.trustor);
    const auto &first = ask(rec, ctx.trustor, build_bundle(ctx, persona, spec, Role::Trustor, 1, {}, {}),
                            Role::Trustor, 1, spec, decision_space_for(spec, Role::Trustor));
    if (!first.valid || !ctx.config.simulate_payoffs) return;
    const ParsedDecision decision = *first.decision;

    switch (spec.kind) {
        case GameKind::Trust: {
            if (!ctx.trustee || !t.trustee) return;
            const Money sent = decision.amount();
            const auto &reply =
                ask(rec, ctx.trustee,
                    build_bundle(ctx, ctx.roster.at(*t.trustee), spec, Role::Trustee, 1, {}, sent), Role::Trustee,
                    1, spec, decision_space_for(spec, Role::Trustee, sent));
            if (reply.valid)
                rec.outcome = trust_game_payoff(spec.endowment, sent, reply.decision->amount(), spec.multiplier);
            return;
        }
        case GameKind::Dictator:
            rec.outcome = dictator_game_payoff(spec.endowment, decision.amount(), spec.multiplier);
            return;
        default: rec.outcome = choice_outcome(spec, decision.choice(), unit_draw(rng)); return;
    }
}

void run_repeated(const RunContext &ctx, const TrialPlan &t, TrialRecord &rec) {
    const auto &spec = t.spec;
    const auto &trustor = ctx.roster.at(t.trustor);
    const auto &trustee = ctx.roster.at(*t.trustee);
    const AgentPtr &trustee_agent = ctx.trustee ? ctx.trustee : ctx.trustor;
    RepeatedTranscript transcript;
    rec.transcript = transcript;
    for (int round = 1; round <= spec.rounds; ++round) {
        std::optional<RoundSummary> trustor_view, trustee_view;
        if (round >= 2) {
            const auto &last = transcript.rounds.back();
            trustor_view = RoundSummary{last.sent, last.received, last.returned, last.trustor_kept};
            trustee_view = RoundSummary{last.sent, last.received, last.returned, last.trustee_kept};
        }
        const auto &sent_step =
            ask(rec, ctx.trustor, build_bundle(ctx, trustor, spec, Role::Trustor, round, trustor_view, {}),
                Role::Trustor, round, spec, decision_space_for(spec, Role::Trustor));
        if (!sent_step.valid) {
            rec.error = "round " + std::to_string(round) + ": trustor reply has no valid amount";
            rec.error_kind = "InvalidReply";
            return;
        }
        const Money sent = sent_step.decision->amount();
        const auto &return_step =
            ask(rec, trustee_agent, build_bundle(ctx, trustee, spec, Role::Trustee, round, trustee_view, sent),
                Role::Trustee, round, spec, decision_space_for(spec, Role::Trustee, sent));
        if (!return_step.valid) {
            rec.error = "round " + std::to_string(round) + ": trustee reply has no valid amount";
            rec.error_kind = "InvalidReply";
            return;
        }
        transcript = repeated_game_advance(transcript, spec, sent, return_step.decision->amount());
        rec.transcript = transcript;
    }
}

TrialRecord execute(const RunContext &ctx, const TrialPlan &t) {
    TrialRecord rec;
    rec.index = t.index;
    rec.trial_key = t.trial_key;
    rec.game = t.spec.kind;
    rec.condition = t.condition;
    rec.probability = t.spec.probability;
    rec.group = t.group;
    rec.sample = t.sample;
    rec.trustor_id = ctx.roster.at(t.trustor).id;
    if (t.trustee) rec.trustee_id = ctx.roster.at(*t.trustee).id;
    for (const auto &m : ctx.config.mutations) rec.mutation_tags.push_back(m.tag());
    rec.started_at = utc_now_iso8601();

    std::mt19937_64 rng(splitmix64(ctx.config.seed ^ splitmix64(t.index + 1)));
    try {
        if (t.spec.kind == GameKind::RepeatedTrust) run_repeated(ctx, t, rec);
        else run_one_shot(ctx, t, rec, rng);
    } catch (const Error &e) {
        rec.error = e.what();
        rec.error_kind = e.kind();
    } catch (const std::exception &e) {
        rec.error = e.what();
        rec.error_kind = "exception";
    }
    rec.finished_at = utc_now_iso8601();
    return rec;
}

// Writes records in index order as they complete; each line is flushed so a
// killed run leaves a readable prefix.
class OrderedWriter {
public:
    explicit OrderedWriter(const fs::path &path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw ConfigError("cannot write " + path.string());
    }

    void submit(TrialRecord rec) {
        std::lock_guard lock(mu_);
        pending_.emplace(rec.index, std::move(rec));
        while (!pending_.empty() && pending_.begin()->first == next_) {
            auto node = pending_.extract(pending_.begin());
            out_ << to_json(node.mapped()).dump() << '\n';
            out_.flush();
            done_.push_back(std::move(node.mapped()));
            ++next_;
        }
    }

    std::vector<TrialRecord> take() { return std::move(done_); }

private:
    std::mutex mu_;
    std::ofstream out_;
    std::map<std::size_t, TrialRecord> pending_;
    std::size_t next_ = 0;
    std::vector<TrialRecord> done_;
};

void write_json_atomic(const fs::path &path, const json &doc) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << doc.dump(2) << '\n';
    }
    fs::rename(tmp, path);
}

json fixture_digests() {
    json out = json::object();
    const fs::path dir = fs::path(TRUSTSIM_DATA_DIR) / "prompts";
    if (!fs::is_directory(dir)) return out;
    std::vector<fs::path> files;
    for (const auto &e : fs::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto &f : files) out[f.filename().string()] = sha256_hex(read_file(f));
    return out;
}

json agent_digest(const AgentChoice &a) {
    if (a.kind == "replay" && fs::exists(a.replay_path)) return sha256_hex(read_file(a.replay_path));
    return nullptr;
}

json base_manifest(const RunConfig &config, const Roster &roster, const Plan &plan) {
    json templates = json::object();
    for (const auto &[name, text] : prompt_templates()) templates[name] = sha256_hex(text);
    json pairs = json::array();
    for (std::size_t g = 0; g < plan.pairs.size(); ++g)
        pairs.push_back({{"group", g + 1},
                         {"trustor", roster.at(plan.pairs[g].first).id},
                         {"trustee", roster.at(plan.pairs[g].second).id}});
    json games = json::array();
    for (const auto &g : config.games) games.push_back(game_spec_to_json(g));

    json digests{{"config", sha256_hex(config.source.dump())},
                 {"roster", roster.source_digest},
                 {"templates", templates},
                 {"prompt_fixtures", fixture_digests()},
                 {"bdi_instruction",
                  {{"amount", sha256_hex(bdi_instruction(true))}, {"choice", sha256_hex(bdi_instruction(false))}}},
                 {"trustor_replay", agent_digest(config.trustor_agent)},
                 {"trustee_replay", config.trustee_agent ? agent_digest(*config.trustee_agent) : json(nullptr)}};
    if (config.baselines_path && fs::exists(*config.baselines_path))
        digests["baselines"] = sha256_hex(read_file(*config.baselines_path));

    return {{"format", "trustsim-manifest/1"},
            {"layout_version", kLayoutVersion},
            {"tool_version", std::string(kToolVersion)},
            {"run_id", config.run_id},
            {"seed", config.seed},
            {"config", config.source},
            {"games", games},
            {"analysis", analysis_options_to_json(config.analysis)},
            {"baselines_path", config.baselines_path ? json(config.baselines_path->string()) : json(nullptr)},
            {"digests", digests},
            {"repeated_pairs", pairs},
            {"trial_count", plan.trials.size()},
            {"files", {{"records", "records.jsonl"}, {"summary", "summary.csv"}, {"report", "report.json"}, {"plot", "plot"}}},
            {"complete", false}};
}

void preflight(const RunContext &ctx) {
    const auto &persona = ctx.roster.at(0);
    for (const auto &spec : ctx.config.games) {
        GameSpec probe = spec;
        if (has_probability(spec.kind) && !probe.probability) probe.probability = 0.5;
        try {
            (void)build_bundle(ctx, persona, probe, Role::Trustor, 1, {}, {});
        } catch (const Error &e) {
            throw ConfigError(std::string(to_string(spec.kind)) + ": " + e.what());
        }
        if (ctx.config.trustor_agent.kind == "fixed") {
            const bool amount = is_amount_game(spec.kind);
            if (amount != ctx.config.trustor_agent.amount.has_value())
                throw ConfigError(std::string("fixed agent does not fit ") + std::string(to_string(spec.kind)));
        }
    }
}

std::string window(const std::string &s, std::size_t at) {
    const std::size_t from = at > 20 ? at - 20 : 0;
    return s.substr(from, std::min<std::size_t>(40, s.size() - std::min(from, s.size())));
}

}  // namespace

std::string step_key(const std::string &trial_key, Role role, int round) {
    return trial_key + "/" + std::string(to_string(role)) + "/" + std::to_string(round);
}

RunConfig parse_run_config(const json &doc, const fs::path &base_dir) {
    static const std::set<std::string> known{
        "run_id",   "game",      "games",        "roster",   "mutations", "agent",             "trustee_agent",
        "probability_grid", "repeated_groups", "seed", "output_dir", "parallelism", "samples_per_cell",
        "bdi",      "simulate_payoffs", "analysis", "baselines", "description"};
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto &[k, v] : doc.items())
        if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");

    RunConfig c;
    c.source = doc;
    try {
        c.run_id = doc.value("run_id", c.run_id);
        if (c.run_id.empty() || c.run_id.find('/') != std::string::npos)
            throw ConfigError("run_id must be non-empty and contain no '/'");
        if (doc.contains("game")) c.games.push_back(game_spec_from_json(doc["game"]));
        if (doc.contains("games"))
            for (const auto &g : doc["games"]) c.games.push_back(game_spec_from_json(g));
        if (c.games.empty()) throw ConfigError("config needs 'game' or 'games'");
        std::set<GameKind> seen;
        for (const auto &g : c.games)
            if (!seen.insert(g.kind).second) throw ConfigError("game listed twice: " + std::string(to_string(g.kind)));

        if (!doc.contains("roster")) throw ConfigError("config needs 'roster'");
        c.roster_path = resolve(base_dir, doc["roster"].get<std::string>());
        if (doc.contains("mutations"))
            for (const auto &m : doc["mutations"]) c.mutations.push_back(ScenarioMutation::parse(m.get<std::string>()));
        if (!doc.contains("agent")) throw ConfigError("config needs 'agent'");
        c.trustor_agent = parse_agent(doc["agent"], base_dir);
        if (doc.contains("trustee_agent")) c.trustee_agent = parse_agent(doc["trustee_agent"], base_dir);

        if (doc.contains("probability_grid")) {
            const auto &g = doc["probability_grid"];
            if (g.is_string() && g == "default") {
                c.probability_grid = default_probability_grid();
            } else {
                c.probability_grid = g.get<std::vector<double>>();
                if (c.probability_grid->empty()) throw ConfigError("probability_grid is empty");
                for (double p : *c.probability_grid)
                    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("probability_grid values must lie in [0, 1]");
            }
        }
        c.repeated_groups = doc.value("repeated_groups", c.repeated_groups);
        if (c.repeated_groups < 1) throw ConfigError("repeated_groups must be >= 1");
        if (doc.contains("seed")) {
            const auto &s = doc["seed"];
            const auto text = s.is_string() ? s.get<std::string>() : std::string{};
            if (s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0))
                c.seed = s.get<std::uint64_t>();
            else if (!text.empty() && text.find_first_not_of("0123456789") == std::string::npos && text.size() <= 20)
                c.seed = std::stoull(text);
            else
                throw ConfigError("seed must be a non-negative integer");
        }
        c.output_dir = resolve(base_dir, doc.value("output_dir", std::string("runs/") + c.run_id));
        c.parallelism = doc.value("parallelism", c.parallelism);
        if (c.parallelism < 1) throw ConfigError("parallelism must be >= 1");
        c.samples_per_cell = doc.value("samples_per_cell", c.samples_per_cell);
        if (c.samples_per_cell < 1) throw ConfigError("samples_per_cell must be >= 1");
        c.bdi = doc.value("bdi", c.bdi);
        c.simulate_payoffs = doc.value("simulate_payoffs", c.simulate_payoffs);
        if (doc.contains("analysis")) c.analysis = analysis_options_from_json(doc["analysis"]);
        if (doc.contains("baselines")) c.baselines_path = resolve(base_dir, doc["baselines"].get<std::string>());
    } catch (const ConfigError &) {
        throw;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::logic_error &e) {
        throw ConfigError(std::string("config: bad number: ") + e.what());
    } catch (const Error &e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_run_config(const fs::path &path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception &e) {
        throw ConfigError(e.what());
    }
    const auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
    return parse_run_config(doc, path.parent_path());
}

RunResult run_experiment(const RunConfig &config, AgentPtr trustor, AgentPtr trustee) {
    Roster roster;
    try {
        roster = load_roster(config.roster_path);
    } catch (const Error &e) {
        throw ConfigError("roster: " + std::string(e.what()));
    }
    const bool repeated = std::any_of(config.games.begin(), config.games.end(),
                                      [](const GameSpec &g) { return g.kind == GameKind::RepeatedTrust; });
    if (repeated && roster.size() < 2) throw ConfigError("repeated_trust needs at least two personas");

    if (!trustor) trustor = build_agent(config.trustor_agent);
    if (!trustee && config.trustee_agent) trustee = build_agent(*config.trustee_agent);
    const RunContext ctx{config, roster, trustor, trustee};
    preflight(ctx);

    const Plan plan = plan_trials(config, roster);
    RunResult result;
    result.run_dir = config.output_dir;
    fs::create_directories(config.output_dir);
    const fs::path manifest_path = config.output_dir / "manifest.json";

    json manifest = base_manifest(config, roster, plan);
    manifest["started_at"] = utc_now_iso8601();
    write_json_atomic(manifest_path, manifest);

    OrderedWriter writer(config.output_dir / "records.jsonl");
    std::atomic<std::size_t> next{0};
    {
        const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism),
                                                   std::max<std::size_t>(plan.trials.size(), 1));
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < plan.trials.size(); i = next++) writer.submit(execute(ctx, plan.trials[i]));
            });
        }
    }
    result.records = writer.take();

    std::size_t failed = 0;
    bool transport = false;
    for (const auto &r : result.records) {
        if (!r.error) continue;
        ++failed;
        transport = transport || r.error_kind == "TransportError";
    }
    result.exit_code = transport ? ExitCode::TransportExhausted
                                 : failed ? ExitCode::PartialFailure : ExitCode::Clean;

    manifest["finished_at"] = utc_now_iso8601();
    manifest["failed_trials"] = failed;
    manifest["exit_code"] = static_cast<int>(result.exit_code);
    manifest["complete"] = true;
    write_json_atomic(manifest_path, manifest);
    result.manifest = std::move(manifest);
    return result;
}

std::vector<PromptCheck> validate_prompts(const fs::path &fixtures_dir) {
    std::vector<PromptCheck> out;
    const fs::path index = fixtures_dir / "fixtures.json";
    if (!fs::exists(index)) {
        out.push_back({"fixtures.json", PromptCheck::Status::Missing, 0, {}, {}});
        return out;
    }
    const auto doc = json::parse(read_file(index), nullptr, false);
    if (doc.is_discarded() || !doc.contains("cases")) {
        out.push_back({"fixtures.json", PromptCheck::Status::Mismatch, 0, {}, "<unreadable fixture index>"});
        return out;
    }

    for (const auto &c : doc["cases"]) {
        PromptCheck check;
        check.file = c.value("file", std::string("?"));
        const fs::path file = fixtures_dir / check.file;
        if (!fs::exists(file)) {
            check.status = PromptCheck::Status::Missing;
            out.push_back(std::move(check));
            continue;
        }
        const std::string expected = read_file(file);
        std::string actual;
        try {
            const auto kind = game_kind_from_string(c.at("game").get<std::string>());
            std::optional<double> p;
            if (c.contains("probability")) p = c["probability"].get<double>();
            const GameSpec spec = GameSpec::defaults(kind, p);
            const Role role = role_from_string(c.at("role").get<std::string>());
            const int round = c.value("round", 1);
            std::optional<RoundSummary> context;
            if (c.contains("context")) {
                const auto &x = c["context"];
                context = RoundSummary{config_money(x.at("sent"), "sent"), config_money(x.at("received"), "received"),
                                       config_money(x.at("returned"), "returned"), config_money(x.at("kept"), "kept")};
            }
            PromptBundle bundle;
            if (c.contains("roster")) {
                const auto roster = load_roster(fixtures_dir / c["roster"].get<std::string>());
                const auto id = c.at("persona").get<std::string>();
                const auto it = std::find_if(roster.personas.begin(), roster.personas.end(),
                                             [&](const Persona &x) { return x.id == id; });
                if (it == roster.personas.end()) throw ConfigError("persona '" + id + "' not in fixture roster");
                bundle = make_bundle(*it, spec, role, round, context);
            } else {
                bundle.game = kind;
                bundle.role = role;
                bundle.user_prompt = game_prompt(spec, role, round, context, &bundle.placeholders_filled);
            }
            for (const auto &m : c.value("mutations", std::vector<std::string>{}))
                bundle = apply_mutation(bundle, ScenarioMutation::parse(m));
            actual = c.value("part", std::string("user")) == "system" ? bundle.system_prompt : bundle.user_prompt;
        } catch (const std::exception &e) {
            actual = std::string("<error: ") + e.what() + ">";
        }
        if (actual != expected) {
            check.status = PromptCheck::Status::Mismatch;
            const auto end = std::min(actual.size(), expected.size());
            std::size_t i = 0;
            while (i < end && actual[i] == expected[i]) ++i;
            check.offset = i;
            check.expected = window(expected, i);
            check.actual = window(actual, i);
        }
        out.push_back(std::move(check));
    }
    return out;
}

std::vector<ReplayDiff> replay_diff(const std::vector<TrialRecord> &records, const std::map<GameKind, GameSpec> &specs) {
    std::vector<ReplayDiff> diffs;
    for (const auto &rec : records) {
        auto note = [&](std::string field, std::string stored, std::string recomputed) {
            diffs.push_back({rec.index, rec.trial_key, std::move(field), std::move(stored), std::move(recomputed)});
        };
        GameSpec spec = specs.count(rec.game) ? specs.at(rec.game) : GameSpec::defaults(rec.game);
        spec.probability = rec.probability;

        std::vector<DecisionStep> fresh;
        for (std::size_t i = 0; i < rec.steps.size(); ++i) {
            const auto &s = rec.steps[i];
            PromptBundle bundle;
            bundle.game = rec.game;
            bundle.role = s.role;
            bundle.system_prompt = s.system_prompt;
            bundle.user_prompt = s.user_prompt;
            const DecisionRequest req{bundle, s.role, s.space, step_key(rec.trial_key, s.role, s.round), spec};
            const auto step = make_step(req, s.round, interpret_reply(s.raw_text, req));
            const std::string at = "steps[" + std::to_string(i) + "].";
            if (decision_to_json(s.decision) != decision_to_json(step.decision))
                note(at + "decision", decision_to_json(s.decision).dump(), decision_to_json(step.decision).dump());
            if (s.valid != step.valid) note(at + "valid", s.valid ? "true" : "false", step.valid ? "true" : "false");
            if (s.strictly_positive != step.strictly_positive)
                note(at + "strictly_positive", s.strictly_positive ? "true" : "false",
                     step.strictly_positive ? "true" : "false");
            if (s.belief != step.belief) note(at + "belief", s.belief.value_or("null"), step.belief.value_or("null"));
            if (s.desire != step.desire) note(at + "desire", s.desire.value_or("null"), step.desire.value_or("null"));
            if (s.intention != step.intention)
                note(at + "intention", s.intention.value_or("null"), step.intention.value_or("null"));
            fresh.push_back(step);
        }

        try {
            if (rec.game == GameKind::RepeatedTrust) {
                RepeatedTranscript t;
                for (std::size_t i = 0; i + 1 < fresh.size(); i += 2) {
                    if (!fresh[i].valid || !fresh[i + 1].valid) break;
                    t = repeated_game_advance(t, spec, fresh[i].decision->amount(), fresh[i + 1].decision->amount());
                }
                const json stored = rec.transcript ? transcript_to_json(*rec.transcript) : json::array();
                if (stored != transcript_to_json(t)) note("transcript", stored.dump(), transcript_to_json(t).dump());
            } else if (rec.outcome) {
                std::optional<Outcome> o;
                if (!fresh.empty() && fresh[0].valid) {
                    const auto &d = *fresh[0].decision;
                    if (rec.game == GameKind::Trust) {
                        if (fresh.size() >= 2 && fresh[1].valid)
                            o = trust_game_payoff(spec.endowment, d.amount(), fresh[1].decision->amount(),
                                                  spec.multiplier);
                    } else if (rec.game == GameKind::Dictator) {
                        o = dictator_game_payoff(spec.endowment, d.amount(), spec.multiplier);
                    } else if (d.choice() == TrustChoice::NotTrust || rec.outcome->chance_draw) {
                        o = choice_outcome(spec, d.choice(), rec.outcome->chance_draw.value_or(0.0));
                    }
                }
                const json stored = outcome_to_json(*rec.outcome);
                const json again = o ? outcome_to_json(*o) : json(nullptr);
                if (stored != again) note("outcome", stored.dump(), again.dump());
            }
        } catch (const Error &e) {
            note("outcome", "<stored>", std::string("<error: ") + e.what() + ">");
        }
    }
    return diffs;
}

std::vector<TrialRecord> replay(const fs::path &records_path) {
    auto records = load_records(records_path);
    std::map<GameKind, GameSpec> specs;
    const fs::path manifest = records_path.parent_path() / "manifest.json";
    if (fs::exists(manifest)) {
        const auto doc = json::parse(read_file(manifest), nullptr, false);
        if (!doc.is_discarded() && doc.contains("games"))
            for (const auto &g : doc["games"]) {
                const auto spec = game_spec_from_json(g);
                specs[spec.kind] = spec;
            }
    }
    const auto diffs = replay_diff(records, specs);
    if (!diffs.empty()) {
        std::ostringstream msg;
        msg << diffs.size() << " field(s) differ on replay:";
        for (const auto &d : diffs)
            msg << "\n  record " << d.index << " (" << d.trial_key << ") " << d.field << ": stored " << d.stored
                << ", recomputed " << d.recomputed;
        throw ReplayMismatch(msg.str());
    }
    return records;
}

}  // namespace trustsim
