#include "support/workspace.hpp"

#include <atomic>
#include <fstream>
#include <random>
#include <unistd.h>

namespace trustsim::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string &tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

Roster synthetic_roster(std::size_t n) {
    static const char *first[] = {"Ava", "Ben", "Chloe", "Dev", "Elena", "Farid", "Grace", "Hiro", "Ines", "Jonas",
                                  "Kemi", "Luis", "Maya", "Niko", "Omar", "Priya", "Quinn", "Rosa", "Sami", "Tara"};
    static const char *jobs[] = {"nurse", "teacher", "software engineer", "chef", "farmer", "accountant",
                                 "electrician", "journalist", "pharmacist", "architect", "librarian"};
    static const char *places[] = {"Denver, Colorado", "Austin, Texas", "Seattle, Washington", "Miami, Florida",
                                   "Boston, Massachusetts", "Chicago, Illinois", "Portland, Oregon"};
    Roster r;
    for (std::size_t i = 0; i < n; ++i) {
        Persona p;
        p.id = "p" + std::to_string(i + 1);
        p.name = std::string(first[i % 20]) + " Example" + std::to_string(i + 1);
        p.age = 21 + static_cast<int>((i * 7) % 50);
        p.gender = i % 3 == 0 ? Gender::Female : i % 3 == 1 ? Gender::Male : Gender::Unspecified;
        p.occupation = jobs[i % 11];
        p.location = places[i % 7];
        p.background = "Enjoys weekend hikes and volunteers locally.";
        p.full_prompt = synthesize_persona_prompt(p);
        r.personas.push_back(p);
    }
    r.source_digest = roster_digest(r.personas);
    return r;
}

fs::path write_roster(const fs::path &dir, std::size_t n) {
    const fs::path path = dir / ("roster" + std::to_string(n) + ".json");
    write_file(path, serialize_roster(synthetic_roster(n)));
    return path;
}

void write_file(const fs::path &path, const std::string &text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

fs::path data_dir() { return TRUSTSIM_DATA_DIR; }
fs::path test_dir() { return TRUSTSIM_TEST_DIR; }

}  // namespace trustsim::testing
