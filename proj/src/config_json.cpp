#include "trustsim/config_json.hpp"

#include "trustsim/error.hpp"

namespace trustsim {

using nlohmann::json;

Money config_money(const json &j, const std::string &field) {
    std::optional<Money> m;
    if (j.is_string()) m = Money::parse(j.get<std::string>());
    else if (j.is_number_integer() && j.get<std::int64_t>() >= 0) m = Money::dollars(j.get<std::int64_t>());
    else if (j.is_number_float()) m = Money::parse(j.dump());
    if (!m) throw ConfigError("'" + field + "' is not an amount of money: " + j.dump());
    return *m;
}

GameSpec game_spec_from_json(const json &j) {
    if (j.is_string()) {
        const auto kind = game_kind_from_string(j.get<std::string>());
        return GameSpec::defaults(kind);
    }
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("game must be a name or an object with 'kind'");
    for (const auto &[k, v] : j.items())
        if (k != "kind" && k != "probability" && k != "endowment" && k != "multiplier" && k != "rounds")
            throw ConfigError("unknown game key '" + k + "'");
    const auto kind = game_kind_from_string(j["kind"].get<std::string>());
    std::optional<double> p;
    if (j.contains("probability") && !j["probability"].is_null()) p = j["probability"].get<double>();
    GameSpec spec = GameSpec::defaults(kind, p);
    if (j.contains("endowment")) spec.endowment = config_money(j["endowment"], "endowment");
    if (j.contains("multiplier")) spec.multiplier = j["multiplier"].get<int>();
    if (j.contains("rounds")) spec.rounds = j["rounds"].get<int>();
    GameSpec probe = spec;
    if (has_probability(kind) && !probe.probability) probe.probability = 0.5;  // grid supplies p later
    probe.validate();
    return spec;
}

json game_spec_to_json(const GameSpec &spec) {
    return {{"kind", std::string(to_string(spec.kind))},
            {"probability", spec.probability ? json(*spec.probability) : json(nullptr)},
            {"endowment", spec.endowment.to_string()},
            {"multiplier", spec.multiplier},
            {"rounds", spec.rounds}};
}

AnalysisOptions analysis_options_from_json(const json &j) {
    AnalysisOptions o;
    if (!j.is_object()) throw ConfigError("analysis must be an object");
    if (j.contains("t_test")) {
        const auto v = j["t_test"].get<std::string>();
        if (v == "welch") o.t_test = TTestVariant::Welch;
        else if (v == "student") o.t_test = TTestVariant::Student;
        else throw ConfigError("t_test must be 'welch' or 'student'");
    }
    o.multiplier = j.value("multiplier", o.multiplier);
    if (j.contains("comparisons")) {
        o.comparisons.clear();
        for (const auto &c : j["comparisons"]) {
            if (!c.contains("name") || !c.contains("greater") || !c.contains("lesser"))
                throw ConfigError("comparison needs 'name', 'greater' and 'lesser'");
            o.comparisons.push_back({c["name"].get<std::string>(), game_kind_from_string(c["greater"].get<std::string>()),
                                     game_kind_from_string(c["lesser"].get<std::string>())});
        }
    }
    if (j.contains("patterns")) {
        const auto &p = j["patterns"];
        o.patterns.stability_num = p.value("stability_num", o.patterns.stability_num);
        o.patterns.stability_den = p.value("stability_den", o.patterns.stability_den);
        if (p.contains("reversal_magnitude"))
            o.patterns.reversal_magnitude = config_money(p["reversal_magnitude"], "reversal_magnitude");
        o.patterns.max_reversals = p.value("max_reversals", o.patterns.max_reversals);
        if (o.patterns.stability_den <= 0 || o.patterns.stability_num < 0)
            throw ConfigError("pattern stability ratio must be non-negative over a positive denominator");
    }
    return o;
}

json analysis_options_to_json(const AnalysisOptions &o) {
    json comparisons = json::array();
    for (const auto &c : o.comparisons)
        comparisons.push_back({{"name", c.name},
                               {"greater", std::string(to_string(c.greater))},
                               {"lesser", std::string(to_string(c.lesser))}});
    return {{"t_test", o.t_test == TTestVariant::Welch ? "welch" : "student"},
            {"multiplier", o.multiplier},
            {"comparisons", comparisons},
            {"patterns",
             {{"stability_num", o.patterns.stability_num},
              {"stability_den", o.patterns.stability_den},
              {"reversal_magnitude", o.patterns.reversal_magnitude.to_string()},
              {"max_reversals", o.patterns.max_reversals}}}};
}

}  // namespace trustsim
