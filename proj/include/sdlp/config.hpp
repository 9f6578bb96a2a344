#pragma once

// Scenario configuration: YAML documents with strict keys.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdlp/adversary.hpp"
#include "sdlp/beacon_plane.hpp"
#include "sdlp/controller.hpp"
#include "sdlp/pseudonym_store.hpp"
#include "sdlp/road_world.hpp"
#include "sdlp/strategy_plane.hpp"

namespace sdlp::config {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sensitivity pinned for the static infrastructure scenario.
inline constexpr double kStaticScenario3Alpha = 0.3;

struct MapSpec {
    std::vector<world::Segment> segments;
    std::vector<world::Intersection> intersections;
    std::vector<world::CongestionZone> congestion_zones;
    std::vector<world::Infrastructure> infrastructures;
    double congestion_speed = 2.0;
};

struct ControllerSection {
    double lock_span = pseudonym::kMaxLockSpan;
    double credits_per_event = 1.0;
    double incentive_delta = 0.2;
    double medium_threshold = 0.3;
    double advanced_threshold = 0.6;
    double alpha_scale = 0.3;
    bool auto_select = true;
    // Feed the controller the attacker's actual power / alpha instead of learning them.
    bool disclose_attacker = false;
    double linkage_noise = 0.0;  // std-dev added to the reported linkage ratio
};

struct AttackerSection {
    adversary::SnifferDeployment deployment;  // beacon_interval and seed are filled per run
    bool default_kernel = true;               // derive sigma/gate from the speed limit
    // Powers applied over equal consecutive shares of the run; empty keeps `deployment.power`.
    std::vector<control::Power> power_schedule;
};

struct ScenarioConfig {
    int scenario = 1;
    bool sdn = true;
    std::uint64_t seed = 1;
    double duration = 600.0;
    std::size_t vehicles = 100;
    strategy::StrategyId strategy = strategy::StrategyId::UPCS;
    double dangerous_fraction = 0.0;
    double alpha = 0.3;
    std::optional<double> initial_privacy;  // absent: log2(vehicles)
    double cooperative_prob = 1.0;
    double reporting_epoch = 5.0;

    MapSpec map;
    world::WorldParams world;
    double desired_speed_min_factor = 0.85;
    double position_jitter = 0.25;
    beacon::BeaconParams beacon;
    strategy::StrategySettings settings;
    pseudonym::PseudonymPolicy policy;
    ControllerSection controller;
    AttackerSection attacker;
    bool cam_log = false;

    std::string mode_name() const { return sdn ? "sdn" : "static"; }
};

// Parse and validate; errors carry "<source>:<line>:<col>" context where available.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

// Throws ConfigError on a violated invariant.
void validate(const ScenarioConfig& cfg);

// Resolved configuration as YAML; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const ScenarioConfig& cfg);

std::shared_ptr<const world::RoadMap> build_map(const ScenarioConfig& cfg);

// Sensitivity the privacy model starts from (and keeps, in static mode).
double effective_alpha(const ScenarioConfig& cfg);

control::ControllerConfig controller_config(const ScenarioConfig& cfg,
                                            std::optional<std::filesystem::path> sybil_dir);

// Independent seed for a named random stream of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace sdlp::config
