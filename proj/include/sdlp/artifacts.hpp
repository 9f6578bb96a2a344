#pragma once

// Run output directory: summary.csv, trace.csv, changes.csv, actions.csv,
// mix_events.csv, tracks.csv, locks.csv, config.yaml and, when recorded,
// protocol.jsonl and cams.csv.

#include <filesystem>

#include "sdlp/config.hpp"
#include "sdlp/simulation.hpp"

namespace sdlp::io {

void write_artifacts(const std::filesystem::path& dir, const config::ScenarioConfig& cfg, const sim::RunResult& run);

// Writes the per-vehicle trace rows in the documented column order.
void write_trace_csv(std::ostream& os, const sim::RunResult& run);

}  // namespace sdlp::io
