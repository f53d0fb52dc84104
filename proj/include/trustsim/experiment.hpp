#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trustsim/agent.hpp"
#include "trustsim/analysis.hpp"
#include "trustsim/game_engine.hpp"
#include "trustsim/persona.hpp"
#include "trustsim/prompt_forge.hpp"
#include "trustsim/records.hpp"

namespace trustsim {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kLayoutVersion = 1;

enum class ExitCode : int { Clean = 0, ConfigError = 2, PartialFailure = 3, TransportExhausted = 4 };

/// Which agent plays a role.
struct AgentChoice {
    std::string kind = "fixed";  // fixed | rational | replay | llm
    std::optional<Money> amount;
    std::optional<TrustChoice> choice;
    std::filesystem::path replay_path;  // JSON object key → reply, or a records.jsonl
    LlmConfig llm;
    std::optional<std::filesystem::path> cache_dir;
};

struct RunConfig {
    std::string run_id = "run";
    std::vector<GameSpec> games;
    std::filesystem::path roster_path;
    std::vector<ScenarioMutation> mutations;  // applied to trustor prompts
    AgentChoice trustor_agent;
    std::optional<AgentChoice> trustee_agent;
    std::optional<std::vector<double>> probability_grid;
    int repeated_groups = 16;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    int parallelism = 1;
    int samples_per_cell = 1;
    bool bdi = false;
    bool simulate_payoffs = true;
    AnalysisOptions analysis;
    std::optional<std::filesystem::path> baselines_path;
    // The document the config was parsed from, with paths as written.
    nlohmann::json source;
};

/// Relative paths resolve against `base_dir`. Throws ConfigError.
RunConfig parse_run_config(const nlohmann::json &doc, const std::filesystem::path &base_dir);
RunConfig load_run_config(const std::filesystem::path &path);

/// Step key used for agent requests inside a trial.
std::string step_key(const std::string &trial_key, Role role, int round);

struct RunResult {
    nlohmann::json manifest;
    std::vector<TrialRecord> records;
    ExitCode exit_code = ExitCode::Clean;
    std::filesystem::path run_dir;
};

/// Runs every trial and writes manifest.json and records.jsonl into
/// config.output_dir. Agents may be injected; otherwise they are built from
/// the config. Throws ConfigError before any trial starts.
RunResult run_experiment(const RunConfig &config, AgentPtr trustor = nullptr, AgentPtr trustee = nullptr);

/// summary.csv, report.json and plot/*.tsv next to the records file.
/// Analysis options and baselines come from the sibling manifest when present.
MetricReport write_report(const std::filesystem::path &records_path,
                          const std::optional<std::filesystem::path> &out_dir = std::nullopt,
                          const std::optional<std::filesystem::path> &baselines_path = std::nullopt);

struct PromptCheck {
    enum class Status { Pass, Mismatch, Missing };
    std::string file;
    Status status = Status::Pass;
    std::size_t offset = 0;  // first differing byte
    std::string expected;    // window around the offset
    std::string actual;
};

/// Regenerates every prompt listed in `<dir>/fixtures.json` and byte-compares
/// it with its fixture file.
std::vector<PromptCheck> validate_prompts(const std::filesystem::path &fixtures_dir);

struct ReplayDiff {
    std::size_t index = 0;
    std::string trial_key;
    std::string field;
    std::string stored;
    std::string recomputed;
};

/// Re-parses every stored reply and recomputes decisions, validity and
/// payoffs. Games missing from `specs` use their defaults. Returns the
/// differences without touching the file.
std::vector<ReplayDiff> replay_diff(const std::vector<TrialRecord> &records,
                                    const std::map<GameKind, GameSpec> &specs = {});

/// The records, if replay reproduces them. Throws ReplayMismatch naming each
/// differing field otherwise.
std::vector<TrialRecord> replay(const std::filesystem::path &records_path);

}  // namespace trustsim
