#pragma once

/**
 * Ground-truth mobility for the simulator.
 *
 * The road is a closed single-lane ring made of chained segments. Positions
 * are kept as (segment, offset) on vehicles and converted to a scalar chain
 * coordinate in [0, ring length) for distance computations.
 */

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sdlp/ids.hpp"

namespace sdlp::world {

struct Segment {
    int id = 0;
    double length = 0.0;       // m
    double speed_limit = 0.0;  // m/s
};

struct Intersection {
    int id = 0;
    double position = 0.0;  // chain coordinate of the stop line, m
    double red_duration = 30.0;
    double green_duration = 30.0;
    double phase_offset = 0.0;
};

struct CongestionZone {
    int segment = 0;
    double start = 0.0;
    double end = 0.0;
};

struct Infrastructure {
    int id = 0;
    double position = 0.0;  // chain coordinate, m
    int capacity = 1;
    double service_time = 20.0;  // s
};

class RoadMap {
public:
    RoadMap(std::vector<Segment> segments, std::vector<Intersection> intersections,
            std::vector<CongestionZone> congestion_zones, std::vector<Infrastructure> infrastructures,
            double congestion_speed = 2.0);

    double length() const { return length_; }

    const std::vector<Segment>& segments() const { return segments_; }
    const std::vector<Intersection>& intersections() const { return intersections_; }
    const std::vector<CongestionZone>& congestion_zones() const { return zones_; }
    const std::vector<Infrastructure>& infrastructures() const { return infrastructures_; }
    double congestion_speed() const { return congestion_speed_; }

    const Segment& segment(int id) const;
    const Intersection& intersection(int id) const;
    const Infrastructure& infrastructure(int id) const;

    double chain_position(int segment_id, double offset) const;
    std::pair<int, double> locate(double chain_pos) const;

    // Wraps any real into [0, length).
    double wrap(double chain_pos) const;
    // Distance travelled going forward from `from` to reach `to`, in [0, length).
    double ahead_distance(double from, double to) const;
    // Shortest distance around the ring.
    double ring_distance(double a, double b) const;
    // Signed displacement from `from` to `to`, in (-length/2, length/2].
    double signed_offset(double from, double to) const;

    double speed_limit_at(double chain_pos) const;
    // Index into congestion_zones() of the zone containing the position, if any.
    std::optional<int> congestion_zone_at(double chain_pos) const;
    // Chain interval [start, end) of a congestion zone.
    std::pair<double, double> zone_interval(int zone_index) const;

private:
    std::vector<Segment> segments_;
    std::vector<double> segment_start_;
    std::vector<Intersection> intersections_;
    std::vector<CongestionZone> zones_;
    std::vector<Infrastructure> infrastructures_;
    double congestion_speed_;
    double length_ = 0.0;
};

enum class Light { Red, Green };

struct LightState {
    Light light = Light::Red;
    double time_in_phase = 0.0;
};

// Red first: the cycle starts with red at (time + offset) == 0 mod cycle.
LightState light_phase(const Intersection& intersection, double time);
LightState light_phase(const RoadMap& map, int intersection_id, double time);

struct InfrastructureStay {
    int id = 0;
    double exit_time = 0.0;
};

struct VehicleState {
    VehicleId true_id;
    int segment = 0;
    double offset = 0.0;
    double speed = 0.0;
    double desired_speed = 0.0;
    Heading heading = Heading::Forward;
    double cooperative_prob = 1.0;
    bool dangerous = false;
    std::optional<InfrastructureStay> inside_infrastructure;
    double stopped_for = 0.0;  // time spent at speed 0, s
};

namespace context {
struct SignalizedIntersection {
    int id = 0;
    Light light = Light::Red;
    double time_in_phase = 0.0;
    bool operator==(const SignalizedIntersection&) const = default;
};
struct CongestedSegment {
    int zone = 0;
    bool operator==(const CongestedSegment&) const = default;
};
struct RoadsideInfrastructure {
    int id = 0;
    int free_slots = 0;
    bool operator==(const RoadsideInfrastructure&) const = default;
};
struct OpenRoad {
    bool operator==(const OpenRoad&) const = default;
};
}  // namespace context

using TopologyContext = std::variant<context::SignalizedIntersection, context::CongestedSegment,
                                     context::RoadsideInfrastructure, context::OpenRoad>;

enum class ContextKind { SignalizedIntersection, CongestedSegment, RoadsideInfrastructure, OpenRoad };

ContextKind kind_of(const TopologyContext& ctx);
std::string to_string(ContextKind kind);
// Short label with the location id, e.g. "intersection:1" or "open".
std::string context_label(const TopologyContext& ctx);

struct WorldParams {
    double dt = 0.5;
    double min_gap = 2.0;
    double detection_radius = 50.0;
    double approach_radius = 30.0;
    double congestion_threshold = 5.0;  // speed under which a zone counts as congested, m/s
};

struct WorldState {
    std::uint64_t step = 0;
    double time = 0.0;
    double dt = 0.5;
    std::vector<VehicleState> vehicles;  // sorted by true_id
    std::shared_ptr<const RoadMap> map;
    WorldParams params;
    std::uint64_t rng_seed = 0;

    const VehicleState& vehicle(VehicleId id) const;
    VehicleState& vehicle(VehicleId id);
    double chain_position(const VehicleState& v) const { return map->chain_position(v.segment, v.offset); }
};

struct PopulationSpec {
    std::size_t count = 100;
    double desired_speed_min_factor = 0.85;  // of the local speed limit
    double position_jitter = 0.25;           // fraction of nominal spacing
    double dangerous_fraction = 0.0;
    double cooperative_prob = 1.0;
};

// Seeded initial placement: evenly spaced with jitter, min_gap respected,
// exactly round(dangerous_fraction * count) vehicles flagged dangerous.
WorldState make_world(std::shared_ptr<const RoadMap> map, const WorldParams& params,
                      const PopulationSpec& population, std::uint64_t seed);

WorldState step_world(const WorldState& world);

TopologyContext detect_context(const VehicleState& vehicle, const WorldState& world);
TopologyContext detect_context(VehicleId id, const WorldState& world);

int occupancy(const WorldState& world, int infrastructure_id);
int free_slots(const WorldState& world, int infrastructure_id);
// True when a vehicle leaving the infrastructure keeps min_gap to its road neighbours.
bool exit_clear(const WorldState& world, int infrastructure_id);

void enter_infrastructure(WorldState& world, VehicleId id, int infrastructure_id);
void exit_infrastructure(WorldState& world, VehicleId id);

}  // namespace sdlp::world
