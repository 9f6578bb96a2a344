#pragma once

// One scenario run: world, data plane, controller and adversary stepped together.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdlp/adversary.hpp"
#include "sdlp/config.hpp"
#include "sdlp/metrics.hpp"
#include "sdlp/protocol.hpp"

namespace sdlp::sim {

struct RunOptions {
    bool record_protocol = false;
    bool keep_cams = false;
    // Directory for the misbehaviour-detection exchange files; none disables it.
    std::optional<std::filesystem::path> exchange_dir;
};

struct ActionRecord {
    double time = 0.0;
    VehicleId true_id;
    std::string strategy;
    std::string action;
};

struct LockSpan {
    VehicleId true_id;
    double from = 0.0;
    double until = 0.0;
    int priority = 0;
};

struct CamRound {
    double time = 0.0;
    std::vector<beacon::SentCam> cams;
};

// Every CAM sent in a run plus the change pairs that went on air.
struct CamTrace {
    std::vector<CamRound> rounds;
    std::vector<adversary::GroundTruthPair> pairs;
};

struct RunResult {
    metrics::RunSummary summary;
    std::vector<metrics::TraceRow> trace;
    std::vector<control::ChangeRecord> changes;
    std::vector<ActionRecord> actions;
    std::vector<metrics::MixEvent> mix_events;
    std::vector<control::ControlDirective> directives;
    std::vector<LockSpan> locks;
    std::vector<std::string> protocol;  // one JSON document per message, in channel order
    std::vector<double> alpha_per_step;
    std::vector<double> risk_per_step;
    std::size_t silence_steps = 0;
    std::size_t refusals = 0;
    std::size_t missing_vehicles = 0;  // summed LDM anomaly counts
    std::size_t guest_vehicles = 0;
    int max_infrastructure_overflow = 0;  // max over steps of occupancy - capacity, clamped at 0
    std::string tracks_csv;
    std::optional<CamTrace> cam_trace;
};

RunResult run_scenario(const config::ScenarioConfig& cfg, const RunOptions& options = {});

// Re-runs the adversary alone over a recorded CAM trace.
double replay_tracking_success(std::shared_ptr<const world::RoadMap> map, const CamTrace& trace,
                               adversary::SnifferDeployment deployment);

// Deployment actually used for a run (kernel defaults, beacon interval, seed).
adversary::SnifferDeployment run_deployment(const config::ScenarioConfig& cfg, const world::RoadMap& map);

}  // namespace sdlp::sim
