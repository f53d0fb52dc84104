#include "trustsim/records.hpp"

#include <fstream>

#include "trustsim/error.hpp"

namespace trustsim {
namespace {

using nlohmann::json;

json money(Money m) { return m.to_string(); }

Money money_from(const json &j, const char *field) {
    if (!j.contains(field) || !j[field].is_string()) throw ParseError(std::string("missing money field '") + field + "'");
    auto m = Money::parse(j[field].get<std::string>());
    if (!m) throw ParseError(std::string("bad money value in '") + field + "'");
    return *m;
}

json space_to_json(const DecisionSpace &s) {
    if (s.binary) return {{"kind", "binary"}};
    return {{"kind", "amount"}, {"min", money(s.bounds.min)}, {"max", money(s.bounds.max)}};
}

DecisionSpace space_from_json(const json &j) {
    if (j.at("kind") == "binary") return DecisionSpace::binary_trust();
    return DecisionSpace::amount({money_from(j, "min"), money_from(j, "max")});
}

template <typename T>
json opt(const std::optional<T> &v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json &j, const char *field) {
    if (!j.contains(field) || j[field].is_null()) return std::nullopt;
    return j[field].get<T>();
}

json step_to_json(const DecisionStep &s) {
    json meta = json::object();
    for (const auto &[k, v] : s.provider_meta) meta[k] = v;
    return {
        {"role", std::string(to_string(s.role))},
        {"round", s.round},
        {"system_prompt", s.system_prompt},
        {"user_prompt", s.user_prompt},
        {"space", space_to_json(s.space)},
        {"raw_text", s.raw_text},
        {"decision", decision_to_json(s.decision)},
        {"valid", s.valid},
        {"strictly_positive", s.strictly_positive},
        {"bdi", {{"belief", opt(s.belief)}, {"desire", opt(s.desire)}, {"intention", opt(s.intention)}}},
        {"cache_hit", opt(s.cache_hit)},
        {"provider_meta", meta},
        {"timing", {{"latency_ms", s.latency_ms}}},
    };
}

DecisionStep step_from_json(const json &j) {
    DecisionStep s;
    s.role = role_from_string(j.at("role").get<std::string>());
    s.round = j.at("round").get<int>();
    s.system_prompt = j.at("system_prompt").get<std::string>();
    s.user_prompt = j.at("user_prompt").get<std::string>();
    s.space = space_from_json(j.at("space"));
    s.raw_text = j.at("raw_text").get<std::string>();
    s.decision = decision_from_json(j.at("decision"));
    s.valid = j.at("valid").get<bool>();
    s.strictly_positive = j.value("strictly_positive", false);
    if (j.contains("bdi")) {
        const auto &b = j["bdi"];
        s.belief = opt_from<std::string>(b, "belief");
        s.desire = opt_from<std::string>(b, "desire");
        s.intention = opt_from<std::string>(b, "intention");
    }
    s.cache_hit = opt_from<bool>(j, "cache_hit");
    if (j.contains("provider_meta"))
        for (const auto &[k, v] : j["provider_meta"].items()) s.provider_meta[k] = v.get<std::string>();
    if (j.contains("timing")) s.latency_ms = j["timing"].value("latency_ms", 0.0);
    return s;
}

}  // namespace

json decision_to_json(const std::optional<ParsedDecision> &d) {
    if (!d) return nullptr;
    json j{{"span", {d->evidence_span.begin, d->evidence_span.end}}, {"rule", d->extraction_rule}};
    if (d->is_amount()) {
        j["kind"] = "amount";
        j["amount"] = money(d->amount());
    } else {
        j["kind"] = "choice";
        j["choice"] = std::string(to_string(d->choice()));
    }
    return j;
}

std::optional<ParsedDecision> decision_from_json(const json &j) {
    if (j.is_null()) return std::nullopt;
    ParsedDecision d;
    const auto span = j.at("span");
    d.evidence_span = {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
    d.extraction_rule = j.at("rule").get<std::string>();
    if (j.at("kind") == "amount") {
        d.value = money_from(j, "amount");
    } else {
        const auto c = j.at("choice").get<std::string>();
        if (c != "trust" && c != "not_trust") throw ParseError("bad choice '" + c + "'");
        d.value = c == "trust" ? TrustChoice::Trust : TrustChoice::NotTrust;
    }
    return d;
}

json transcript_to_json(const RepeatedTranscript &t) {
    json rounds = json::array();
    for (const auto &r : t.rounds) {
        rounds.push_back({{"sent", money(r.sent)},
                          {"received", money(r.received)},
                          {"returned", money(r.returned)},
                          {"trustor_kept", money(r.trustor_kept)},
                          {"trustee_kept", money(r.trustee_kept)}});
    }
    return rounds;
}

RepeatedTranscript transcript_from_json(const json &j) {
    RepeatedTranscript t;
    for (const auto &r : j) {
        t.rounds.push_back({money_from(r, "sent"), money_from(r, "received"), money_from(r, "returned"),
                            money_from(r, "trustor_kept"), money_from(r, "trustee_kept")});
    }
    return t;
}

json outcome_to_json(const Outcome &o) {
    return {{"trustor_payoff", money(o.trustor_payoff)},
            {"trustee_payoff", money(o.trustee_payoff)},
            {"resolved_by_chance", o.resolved_by_chance},
            {"chance_draw", opt(o.chance_draw)}};
}

Outcome outcome_from_json(const json &j) {
    return {money_from(j, "trustor_payoff"), money_from(j, "trustee_payoff"), j.at("resolved_by_chance").get<bool>(),
            opt_from<double>(j, "chance_draw")};
}

json to_json(const TrialRecord &r) {
    json steps = json::array();
    for (const auto &s : r.steps) steps.push_back(step_to_json(s));
    return {
        {"index", r.index},
        {"trial_key", r.trial_key},
        {"game", std::string(to_string(r.game))},
        {"condition", r.condition},
        {"probability", opt(r.probability)},
        {"group", opt(r.group)},
        {"sample", r.sample},
        {"personas", {{"trustor", r.trustor_id}, {"trustee", opt(r.trustee_id)}}},
        {"mutation_tags", r.mutation_tags},
        {"steps", steps},
        {"transcript", r.transcript ? transcript_to_json(*r.transcript) : json(nullptr)},
        {"outcome", r.outcome ? outcome_to_json(*r.outcome) : json(nullptr)},
        {"error", opt(r.error)},
        {"error_kind", opt(r.error_kind)},
        {"timing", {{"started_at", r.started_at}, {"finished_at", r.finished_at}}},
    };
}

TrialRecord record_from_json(const json &j) {
    try {
        TrialRecord r;
        r.index = j.at("index").get<std::size_t>();
        r.trial_key = j.at("trial_key").get<std::string>();
        r.game = game_kind_from_string(j.at("game").get<std::string>());
        r.condition = j.value("condition", std::string{});
        r.probability = opt_from<double>(j, "probability");
        r.group = opt_from<int>(j, "group");
        r.sample = j.value("sample", 0);
        r.trustor_id = j.at("personas").at("trustor").get<std::string>();
        r.trustee_id = opt_from<std::string>(j.at("personas"), "trustee");
        r.mutation_tags = j.value("mutation_tags", std::vector<std::string>{});
        for (const auto &s : j.at("steps")) r.steps.push_back(step_from_json(s));
        if (j.contains("transcript") && !j["transcript"].is_null()) r.transcript = transcript_from_json(j["transcript"]);
        if (j.contains("outcome") && !j["outcome"].is_null()) r.outcome = outcome_from_json(j["outcome"]);
        r.error = opt_from<std::string>(j, "error");
        r.error_kind = opt_from<std::string>(j, "error_kind");
        if (j.contains("timing")) {
            r.started_at = j["timing"].value("started_at", std::string{});
            r.finished_at = j["timing"].value("finished_at", std::string{});
        }
        return r;
    } catch (const json::exception &e) {
        throw ParseError(std::string("malformed trial record: ") + e.what());
    } catch (const InvalidGameSpec &e) {
        throw ParseError(e.what());
    } catch (const UnsupportedRole &e) {
        throw ParseError(e.what());
    }
}

json strip_wall_clock(json record) {
    record.erase("timing");
    if (record.contains("steps"))
        for (auto &s : record["steps"]) s.erase("timing");
    return record;
}

std::vector<TrialRecord> load_records(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open records file " + path.string());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) lines.push_back(std::move(line));

    std::vector<TrialRecord> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto j = json::parse(lines[i], nullptr, false);
        if (j.is_discarded()) {
            if (i + 1 == lines.size()) break;  // torn tail
            throw ParseError("records line " + std::to_string(i + 1) + " is not JSON");
        }
        out.push_back(record_from_json(j));
    }
    return out;
}

DecisionStep make_step(const DecisionRequest &request, int round, const AgentResponse &response) {
    DecisionStep s;
    s.role = request.role;
    s.round = round;
    s.system_prompt = request.bundle.system_prompt;
    s.user_prompt = request.bundle.user_prompt;
    s.space = request.space;
    s.raw_text = response.raw_text;
    s.decision = response.decision;
    s.valid = response.valid;
    s.strictly_positive = is_strictly_positive(response.decision);
    if (response.bdi) {
        if (response.bdi->belief) s.belief = response.bdi->belief_text(response.raw_text);
        if (response.bdi->desire) s.desire = response.bdi->desire_text(response.raw_text);
        if (response.bdi->intention) s.intention = response.bdi->intention_text(response.raw_text);
    }
    if (auto it = response.provider_meta.find("cache_hit"); it != response.provider_meta.end()) {
        s.cache_hit = it->second == "true";
    }
    s.provider_meta = response.provider_meta;
    s.latency_ms = response.latency.count();
    return s;
}

const DecisionStep *primary_step(const TrialRecord &r) {
    for (const auto &s : r.steps)
        if (s.role == Role::Trustor) return &s;
    return nullptr;
}

}  // namespace trustsim
