#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "trustsim/config_json.hpp"
#include "trustsim/digest.hpp"
#include "trustsim/error.hpp"
#include "trustsim/experiment.hpp"

namespace trustsim {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Shortest decimal that reads back as the same double.
std::string num(double v) {
    char buf[64];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

template <typename T>
json opt(const std::optional<T> &v) {
    return v ? json(*v) : json(nullptr);
}

json trust_rate_json(const TrustRate &r) {
    return {{"rate", r.rate}, {"trust", r.trust}, {"not_trust", r.not_trust}, {"excluded", r.excluded}};
}

json game_json(const GameMetrics &m) {
    json j{{"records", m.records},
           {"failed", m.failed},
           {"vrr", opt(m.vrr)},
           {"positive_rate", opt(m.positive_rate)},
           {"trust_rate", m.trust_rate ? trust_rate_json(*m.trust_rate) : json(nullptr)}};
    if (m.amounts) {
        json hist = json::object();
        for (const auto &[bin, count] : m.amounts->histogram) hist[std::to_string(bin)] = count;
        j["amounts"] = {{"mean", m.amounts->mean},
                        {"median", m.amounts->median},
                        {"count", m.amounts->count},
                        {"histogram", hist}};
    } else {
        j["amounts"] = nullptr;
    }
    json curve = json::array();
    for (const auto &[p, r] : m.trust_rate_curve) {
        auto point = trust_rate_json(r);
        point["p"] = p;
        curve.push_back(point);
    }
    j["trust_rate_curve"] = curve;
    return j;
}

json test_json(const TestResult &t) {
    return {{"name", t.name},
            {"variant", t.variant},
            {"tail", t.tail},
            {"statistic", t.statistic},
            {"degrees_of_freedom", t.degrees_of_freedom},
            {"p_value", t.p_value},
            {"sample_sizes", {t.sample_sizes.first, t.sample_sizes.second}},
            {"mean_a", t.mean_a},
            {"mean_b", t.mean_b}};
}

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + path.string());
    out << text;
}

void write_series(const fs::path &path, const std::vector<std::pair<double, double>> &points) {
    std::string text;
    for (const auto &[x, y] : points) text += num(x) + "\t" + num(y) + "\n";
    write_text(path, text);
}

}  // namespace

MetricReport write_report(const fs::path &records_path, const std::optional<fs::path> &out_dir,
                          const std::optional<fs::path> &baselines_path) {
    const auto records = load_records(records_path);

    AnalysisOptions options;
    std::optional<fs::path> baselines = baselines_path;
    const fs::path manifest_path = records_path.parent_path() / "manifest.json";
    if (fs::exists(manifest_path)) {
        const auto manifest = json::parse(read_file(manifest_path), nullptr, false);
        if (manifest.is_discarded()) throw ParseError("manifest is not JSON: " + manifest_path.string());
        if (manifest.contains("analysis")) options = analysis_options_from_json(manifest["analysis"]);
        if (!baselines && manifest.contains("baselines_path") && manifest["baselines_path"].is_string())
            baselines = fs::path(manifest["baselines_path"].get<std::string>());
    }
    if (!baselines) {
        const fs::path shipped = fs::path(TRUSTSIM_DATA_DIR) / "baselines.json";
        if (fs::exists(shipped)) baselines = shipped;
    }

    MetricReport report = analyze(records, options);
    if (baselines) report.baseline_deltas = compare_to_baseline(report, load_baselines(*baselines));

    const fs::path dir = out_dir.value_or(records_path.parent_path());
    fs::create_directories(dir / "plot");
    const auto scalars = report.scalars();

    std::string csv = "metric,value\n";
    for (const auto &[k, v] : scalars) csv += k + "," + num(v) + "\n";
    for (const auto &[k, v] : report.baseline_deltas) csv += "baseline_delta." + k + "," + num(v) + "\n";
    write_text(dir / "summary.csv", csv);

    json games = json::object();
    for (const auto &[name, m] : report.games) games[name] = game_json(m);
    json flags = json::array();
    std::size_t f = 0;
    for (const auto &r : records) {
        if (r.game != GameKind::RepeatedTrust || !r.transcript || r.transcript->rounds.size() < 2) continue;
        const auto &p = report.pattern_flags.at(f++);
        flags.push_back({{"trial_key", r.trial_key},
                         {"group", opt(r.group)},
                         {"p1", p.returned_exceeds_sent},
                         {"p2", p.stable_ratio},
                         {"p3", p.few_fluctuations}});
    }
    json tests = json::array();
    for (const auto &t : report.tests) tests.push_back(test_json(t));
    json prevalence = nullptr;
    if (report.pattern_prevalence) {
        const auto &p = *report.pattern_prevalence;
        prevalence = {{"p1", p.p1}, {"p2", p.p2}, {"p3", p.p3}, {"groups", p.groups}};
    }
    const json doc{{"format", "trustsim-report/1"},
                   {"records_file", records_path.filename().string()},
                   {"games", games},
                   {"lottery_rates",
                    {{"gamble_rate", opt(report.lottery_rates.gamble_rate)},
                     {"people_rate", opt(report.lottery_rates.people_rate)}}},
                   {"pattern_prevalence", prevalence},
                   {"pattern_flags", flags},
                   {"tests", tests},
                   {"baselines", baselines ? json(baselines->string()) : json(nullptr)},
                   {"baseline_deltas", report.baseline_deltas},
                   {"scalars", scalars}};
    write_text(dir / "report.json", doc.dump(2) + "\n");

    for (const auto &[name, m] : report.games) {
        if (m.amounts) {
            std::vector<std::pair<double, double>> pts;
            for (const auto &[bin, count] : m.amounts->histogram)
                pts.emplace_back(static_cast<double>(bin), static_cast<double>(count));
            write_series(dir / "plot" / ("amount_histogram_" + name + ".tsv"), pts);
        }
        if (!m.trust_rate_curve.empty()) {
            std::vector<std::pair<double, double>> pts;
            for (const auto &[p, r] : m.trust_rate_curve) pts.emplace_back(p, r.rate);
            write_series(dir / "plot" / ("trust_rate_" + name + ".tsv"), pts);
        }
    }
    for (const auto &r : records) {
        if (r.game != GameKind::RepeatedTrust || !r.transcript) continue;
        const std::string stem = "repeated_g" + std::to_string(r.group.value_or(0)) + "_s" + std::to_string(r.sample);
        std::vector<std::pair<double, double>> sent, returned, ratio;
        const auto ratios = return_ratio_series(*r.transcript, options.multiplier);
        for (std::size_t i = 0; i < r.transcript->rounds.size(); ++i) {
            const double round = static_cast<double>(i + 1);
            sent.emplace_back(round, r.transcript->rounds[i].sent.in_dollars());
            returned.emplace_back(round, r.transcript->rounds[i].returned.in_dollars());
            if (ratios[i]) ratio.emplace_back(round, *ratios[i]);
        }
        write_series(dir / "plot" / (stem + "_sent.tsv"), sent);
        write_series(dir / "plot" / (stem + "_returned.tsv"), returned);
        write_series(dir / "plot" / (stem + "_ratio.tsv"), ratio);
    }
    return report;
}

}  // namespace trustsim
