#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trustsim {

enum class Gender { Female, Male, Unspecified };

std::string_view to_string(Gender g);
Gender gender_from_string(std::string_view s);  // throws ValidationError

struct Persona {
    std::string id;
    std::string name;
    std::optional<int> age;
    Gender gender = Gender::Unspecified;
    std::optional<std::string> descent_or_race;
    std::string location;
    std::string occupation;
    std::string background;
    std::string full_prompt;

    bool operator==(const Persona &) const = default;
};

/// "You are {name}, a {age}-year-old [{descent} ][{gender} ]{occupation} residing
/// in {location}. {background}", the shape of the shipped exemplars.
std::string synthesize_persona_prompt(const Persona &p);

/// Fills age, gender, descent, location and occupation from free text when
/// they are missing. Anything ambiguous is left unset / Unspecified.
void infer_demographics(Persona &p, std::string_view text);

struct Roster {
    std::vector<Persona> personas;
    std::string source_digest;

    std::size_t size() const { return personas.size(); }
    const Persona &at(std::size_t i) const { return personas.at(i); }
};

/// Digest over the canonical serialization of the persona list.
std::string roster_digest(const std::vector<Persona> &personas);

Roster load_roster(const std::filesystem::path &path);
Roster parse_roster(std::string_view text);
std::string serialize_roster(const Roster &roster);

/// full_prompt, then each suffix preceded by a single space.
std::string persona_system_prompt(const Persona &persona, const std::vector<std::string> &role_suffixes);

}  // namespace trustsim
