#pragma once

// Side-by-side comparison of finished runs and seeded batch verdicts.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdlp/config.hpp"
#include "sdlp/metrics.hpp"

namespace sdlp::compare {

struct RunRecord {
    metrics::RunSummary summary;
    double alpha = 0.0;  // sensitivity the run actually used at start
    std::string strategy;
    double dangerous_fraction = 0.0;
};

// Reads summary.csv and config.yaml from a run directory.
RunRecord load_run(const std::filesystem::path& dir);

struct Verdict {
    std::string statement;
    bool holds = false;
};

struct Comparison {
    RunRecord a;
    RunRecord b;
    std::vector<Verdict> verdicts;
};

// (static - sdn) / static; 0 when static privacy is 0.
double relative_privacy_gap(double static_privacy, double sdn_privacy);
inline constexpr double kMaxPrivacyGap = 0.25;

// Throws std::invalid_argument when the runs belong to different scenarios.
Comparison compare_runs(const RunRecord& a, const RunRecord& b);

std::string format_table(const Comparison& c);
void write_comparison_csv(std::ostream& os, const Comparison& c);

struct VerdictTally {
    std::string statement;
    int passes = 0;
    int total = 0;
    double fraction() const { return total == 0 ? 0.0 : static_cast<double>(passes) / total; }
};

// Runs the scenario's comparison set for seeds base.seed .. base.seed + seeds - 1.
// With `out`, each run's artifacts go to out/seed_<s>/<variant>/ and tallies to out/batch.csv.
std::vector<VerdictTally> run_batch(const config::ScenarioConfig& base, int seeds,
                                    const std::optional<std::filesystem::path>& out);

void write_batch_csv(std::ostream& os, const std::vector<VerdictTally>& tallies);

}  // namespace sdlp::compare
