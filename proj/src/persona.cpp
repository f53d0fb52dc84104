#include "trustsim/persona.hpp"

#include <json.hpp>

#include <regex>
#include <set>
#include <unordered_set>

#include "trustsim/digest.hpp"
#include "trustsim/error.hpp"

namespace trustsim {
namespace {

using nlohmann::json;

constexpr std::string_view kRosterFormat = "trustsim-roster/1";

json persona_to_json(const Persona &p) {
    json j;
    j["id"] = p.id;
    j["name"] = p.name;
    j["age"] = p.age ? json(*p.age) : json(nullptr);
    j["gender"] = std::string(to_string(p.gender));
    j["descent_or_race"] = p.descent_or_race ? json(*p.descent_or_race) : json(nullptr);
    j["location"] = p.location;
    j["occupation"] = p.occupation;
    j["background"] = p.background;
    j["full_prompt"] = p.full_prompt;
    return j;
}

std::string require_string(const json &rec, const char *field, std::size_t index) {
    if (!rec.contains(field) || !rec[field].is_string() || rec[field].get<std::string>().empty()) {
        throw ValidationError("persona #" + std::to_string(index) + ": missing required field '" + field + "'");
    }
    return rec[field].get<std::string>();
}

std::string optional_string(const json &rec, const char *field) {
    if (!rec.contains(field) || rec[field].is_null()) return {};
    if (!rec[field].is_string()) throw ValidationError(std::string("field '") + field + "' must be text");
    return rec[field].get<std::string>();
}

// Unique match of `re` group 1 in `text`, or nullopt if absent or conflicting.
std::optional<std::string> unique_capture(std::string_view text, const std::regex &re) {
    std::set<std::string> found;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it)
        found.insert((*it)[1].str());
    if (found.size() != 1) return std::nullopt;
    return *found.begin();
}

Persona persona_from_json(const json &rec, std::size_t index) {
    if (!rec.is_object()) throw ValidationError("persona #" + std::to_string(index) + " is not an object");
    Persona p;
    p.id = require_string(rec, "id", index);
    p.name = require_string(rec, "name", index);
    if (rec.contains("age") && !rec["age"].is_null()) {
        if (!rec["age"].is_number_integer()) throw ValidationError("persona '" + p.id + "': age must be an integer");
        p.age = rec["age"].get<int>();
    }
    if (const auto g = optional_string(rec, "gender"); !g.empty()) p.gender = gender_from_string(g);
    if (const auto d = optional_string(rec, "descent_or_race"); !d.empty()) p.descent_or_race = d;
    p.location = optional_string(rec, "location");
    p.occupation = optional_string(rec, "occupation");
    p.background = optional_string(rec, "background");
    p.full_prompt = optional_string(rec, "full_prompt");

    if (p.full_prompt.empty()) {
        if (!p.age || p.occupation.empty() || p.location.empty()) {
            throw ValidationError("persona '" + p.id +
                                  "': without full_prompt, age, occupation and location are required");
        }
        p.full_prompt = synthesize_persona_prompt(p);
    } else {
        infer_demographics(p, p.full_prompt);
    }
    if (!p.background.empty()) infer_demographics(p, p.background);
    return p;
}

}  // namespace

std::string_view to_string(Gender g) {
    switch (g) {
        case Gender::Female: return "female";
        case Gender::Male: return "male";
        default: return "unspecified";
    }
}

Gender gender_from_string(std::string_view s) {
    if (s == "female") return Gender::Female;
    if (s == "male") return Gender::Male;
    if (s == "unspecified") return Gender::Unspecified;
    throw ValidationError("unknown gender '" + std::string(s) + "'");
}

std::string synthesize_persona_prompt(const Persona &p) {
    std::string out = "You are " + p.name + ", a " + std::to_string(p.age.value_or(0)) + "-year-old ";
    if (p.descent_or_race) out += *p.descent_or_race + " ";
    if (p.gender != Gender::Unspecified) out += std::string(to_string(p.gender)) + " ";
    out += p.occupation + " residing in " + p.location + ".";
    if (!p.background.empty()) out += " " + p.background;
    return out;
}

void infer_demographics(Persona &p, std::string_view text) {
    static const std::regex kAge(R"((\d{1,3})-year-old|[Aa]t the age of (\d{1,3})|[Aa]t (\d{1,3}) years old)");
    static const std::regex kFemale(R"(\b(female|woman)\b)", std::regex::icase);
    static const std::regex kMale(R"(\b(male|man)\b)", std::regex::icase);
    static const std::regex kDescent(R"(of ([A-Z][a-z]+) descent|-year-old ([A-Z][a-z]+) (?:female|male)\b|[Aa]s an? ([A-Z][a-z]+) (?:woman|man)\b)");
    static const std::regex kLocation(R"((?:residing in|based in|reside in) ((?:[A-Z][a-z]+)(?: [A-Z][a-z]+)*))");
    static const std::regex kOccupation(R"(-year-old (?:[A-Z][a-z]+ )?(?:female|male) ([a-z][a-z ]*?) (?:residing|based|of|from)\b)");

    const std::string s(text);
    if (!p.age) {
        std::set<int> ages;
        for (auto it = std::sregex_iterator(s.begin(), s.end(), kAge); it != std::sregex_iterator(); ++it) {
            for (std::size_t g = 1; g < it->size(); ++g)
                if ((*it)[g].matched) ages.insert(std::stoi((*it)[g].str()));
        }
        if (ages.size() == 1) p.age = *ages.begin();
    }
    if (p.gender == Gender::Unspecified) {
        const bool female = std::regex_search(s, kFemale);
        const bool male = std::regex_search(s, kMale);
        if (female != male) p.gender = female ? Gender::Female : Gender::Male;
    }
    if (!p.descent_or_race) {
        std::set<std::string> found;
        for (auto it = std::sregex_iterator(s.begin(), s.end(), kDescent); it != std::sregex_iterator(); ++it) {
            for (std::size_t g = 1; g < it->size(); ++g)
                if ((*it)[g].matched) found.insert((*it)[g].str());
        }
        if (found.size() == 1) p.descent_or_race = *found.begin();
    }
    if (p.location.empty())
        if (auto loc = unique_capture(s, kLocation)) p.location = *loc;
    if (p.occupation.empty())
        if (auto occ = unique_capture(s, kOccupation)) p.occupation = *occ;
}

std::string roster_digest(const std::vector<Persona> &personas) {
    json arr = json::array();
    for (const auto &p : personas) arr.push_back(persona_to_json(p));
    return sha256_hex(arr.dump());
}

Roster parse_roster(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ParseError(std::string("roster is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("personas") || !doc["personas"].is_array()) {
        throw ParseError("roster must be an object with a 'personas' array");
    }
    if (doc.contains("format") && doc["format"] != kRosterFormat) {
        throw ParseError("unsupported roster format " + doc["format"].dump());
    }

    Roster roster;
    std::unordered_set<std::string> ids;
    const auto &records = doc["personas"];
    for (std::size_t i = 0; i < records.size(); ++i) {
        Persona p = persona_from_json(records[i], i);
        if (!ids.insert(p.id).second) throw ValidationError("duplicate persona id '" + p.id + "'");
        roster.personas.push_back(std::move(p));
    }
    if (roster.personas.empty()) throw ValidationError("roster has no personas");
    roster.source_digest = roster_digest(roster.personas);
    return roster;
}

Roster load_roster(const std::filesystem::path &path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::runtime_error &e) {
        throw ParseError(e.what());
    }
    return parse_roster(text);
}

std::string serialize_roster(const Roster &roster) {
    json doc;
    doc["format"] = kRosterFormat;
    doc["personas"] = json::array();
    for (const auto &p : roster.personas) doc["personas"].push_back(persona_to_json(p));
    return doc.dump(2) + "\n";
}

std::string persona_system_prompt(const Persona &persona, const std::vector<std::string> &role_suffixes) {
    std::string out = persona.full_prompt;
    for (const auto &s : role_suffixes) {
        out += ' ';
        out += s;
    }
    return out;
}

}  // namespace trustsim
