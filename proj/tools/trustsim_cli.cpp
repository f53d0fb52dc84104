#include <iostream>

#include <CLI11.hpp>

#include "trustsim/error.hpp"
#include "trustsim/experiment.hpp"
#include "trustsim/response_cache.hpp"

namespace fs = std::filesystem;
using namespace trustsim;

namespace {

fs::path records_file(const fs::path &p) { return fs::is_directory(p) ? p / "records.jsonl" : p; }

void print_report(const MetricReport &report) {
    for (const auto &[k, v] : report.scalars()) std::cout << k << '\t' << v << '\n';
    for (const auto &[k, v] : report.baseline_deltas) std::cout << "baseline_delta." << k << '\t' << v << '\n';
}

int cmd_run(const std::string &config_path, const std::string &output_dir, int parallelism, bool no_report) {
    RunConfig config = load_run_config(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (parallelism > 0) config.parallelism = parallelism;
    const auto result = run_experiment(config);
    std::size_t failed = 0;
    for (const auto &r : result.records) failed += r.error.has_value();
    std::cerr << "wrote " << result.records.size() << " records to " << result.run_dir.string() << " (" << failed
              << " failed)\n";
    if (!no_report && !result.records.empty()) {
        try {
            print_report(write_report(result.run_dir / "records.jsonl"));
        } catch (const Error &e) {
            std::cerr << "report skipped: " << e.what() << '\n';
        }
    }
    return static_cast<int>(result.exit_code);
}

int cmd_validate(const std::string &dir) {
    int bad = 0;
    for (const auto &c : validate_prompts(dir)) {
        switch (c.status) {
            case PromptCheck::Status::Pass: std::cout << "PASS     " << c.file << '\n'; break;
            case PromptCheck::Status::Missing:
                ++bad;
                std::cout << "MISSING  " << c.file << '\n';
                break;
            case PromptCheck::Status::Mismatch:
                ++bad;
                std::cout << "MISMATCH " << c.file << " at byte " << c.offset << "\n  expected: " << c.expected
                          << "\n  actual:   " << c.actual << '\n';
                break;
        }
    }
    return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Trust-game experiment harness for LLM agents"};
    app.require_subcommand(1);

    std::string config_path, output_dir;
    int parallelism = 0;
    bool no_report = false;
    auto *run = app.add_subcommand("run", "Run an experiment from a config file");
    run->add_option("config", config_path, "Run config (JSON)")->required();
    run->add_option("-o,--output-dir", output_dir, "Override the config's output_dir");
    run->add_option("-j,--parallelism", parallelism, "Override the config's parallelism");
    run->add_flag("--no-report", no_report, "Skip the report step");

    std::string records_path, out_dir, baselines;
    auto *report = app.add_subcommand("report", "Compute metrics and write summary, report and plot data");
    report->add_option("records", records_path, "Run directory or records.jsonl")->required();
    report->add_option("-o,--out", out_dir, "Output directory (default: beside the records)");
    report->add_option("-b,--baselines", baselines, "Baselines file");

    std::string replay_path;
    auto *replay_cmd = app.add_subcommand("replay", "Re-parse stored replies and check they reproduce the records");
    replay_cmd->add_option("records", replay_path, "Run directory or records.jsonl")->required();

    std::string fixtures_dir = std::string(TRUSTSIM_DATA_DIR) + "/prompts";
    auto *validate = app.add_subcommand("validate-prompts", "Byte-compare generated prompts with fixtures");
    validate->add_option("-d,--dir", fixtures_dir, "Fixture directory");

    std::string cache_dir;
    auto *cache = app.add_subcommand("cache", "Inspect or clear a response cache");
    cache->require_subcommand(1);
    auto *inspect = cache->add_subcommand("inspect", "List cached entries");
    inspect->add_option("dir", cache_dir, "Cache directory")->required();
    auto *clear = cache->add_subcommand("clear", "Delete the cache store");
    clear->add_option("dir", cache_dir, "Cache directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, output_dir, parallelism, no_report);
        if (*report) {
            std::optional<fs::path> out = out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir);
            std::optional<fs::path> base = baselines.empty() ? std::nullopt : std::optional<fs::path>(baselines);
            print_report(write_report(records_file(records_path), out, base));
            return 0;
        }
        if (*replay_cmd) {
            const auto records = trustsim::replay(records_file(replay_path));
            std::cout << "replay reproduced " << records.size() << " records\n";
            return 0;
        }
        if (*validate) return cmd_validate(fixtures_dir);
        if (*inspect) {
            ResponseCache c(cache_dir);
            for (const auto &e : c.entries())
                std::cout << e.key << '\t' << e.timestamp << '\t' << e.request.value("model", "") << '\t'
                          << e.reply.size() << " bytes\n";
            std::cout << c.size() << " entries\n";
            return 0;
        }
        if (*clear) {
            ResponseCache::clear(cache_dir);
            std::cout << "cleared " << ResponseCache::store_path(cache_dir).string() << '\n';
            return 0;
        }
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::ConfigError);
    } catch (const ReplayMismatch &e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const Error &e) {
        std::cerr << e.kind() << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}
