#include "sdlp/road_world.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace sdlp::world {

namespace {

constexpr double kEps = 1e-9;

}  // namespace

RoadMap::RoadMap(std::vector<Segment> segments, std::vector<Intersection> intersections,
                 std::vector<CongestionZone> congestion_zones, std::vector<Infrastructure> infrastructures,
                 double congestion_speed)
    : segments_(std::move(segments)),
      intersections_(std::move(intersections)),
      zones_(std::move(congestion_zones)),
      infrastructures_(std::move(infrastructures)),
      congestion_speed_(congestion_speed) {
    if (segments_.empty()) {
        throw std::invalid_argument("road map needs at least one segment");
    }
    std::set<int> ids;
    for (const auto& s : segments_) {
        if (!ids.insert(s.id).second) {
            throw std::invalid_argument(fmt::format("duplicate segment id {}", s.id));
        }
        if (!(s.length > 0.0) || !(s.speed_limit > 0.0)) {
            throw std::invalid_argument(fmt::format("segment {} needs positive length and speed limit", s.id));
        }
        segment_start_.push_back(length_);
        length_ += s.length;
    }
    std::set<int> inter_ids;
    for (const auto& i : intersections_) {
        if (!inter_ids.insert(i.id).second) {
            throw std::invalid_argument(fmt::format("duplicate intersection id {}", i.id));
        }
        if (!(i.red_duration > 0.0) || !(i.green_duration > 0.0)) {
            throw std::invalid_argument(fmt::format("intersection {} needs positive phase durations", i.id));
        }
        if (i.position < 0.0 || i.position >= length_) {
            throw std::invalid_argument(fmt::format("intersection {} lies outside the ring", i.id));
        }
    }
    for (const auto& z : zones_) {
        const auto& seg = segment(z.segment);
        if (z.start < 0.0 || z.end > seg.length || !(z.start < z.end)) {
            throw std::invalid_argument(
                fmt::format("congestion zone [{}, {}] outside segment {}", z.start, z.end, z.segment));
        }
    }
    std::set<int> infra_ids;
    for (const auto& r : infrastructures_) {
        if (!infra_ids.insert(r.id).second) {
            throw std::invalid_argument(fmt::format("duplicate infrastructure id {}", r.id));
        }
        if (r.capacity < 1 || !(r.service_time > 0.0)) {
            throw std::invalid_argument(fmt::format("infrastructure {} needs capacity >= 1 and service time > 0", r.id));
        }
        if (r.position < 0.0 || r.position >= length_) {
            throw std::invalid_argument(fmt::format("infrastructure {} lies outside the ring", r.id));
        }
    }
    if (!(congestion_speed_ > 0.0)) {
        throw std::invalid_argument("congestion speed must be positive");
    }
}

const Segment& RoadMap::segment(int id) const {
    for (const auto& s : segments_) {
        if (s.id == id) return s;
    }
    throw LookupError(fmt::format("unknown segment {}", id));
}

const Intersection& RoadMap::intersection(int id) const {
    for (const auto& i : intersections_) {
        if (i.id == id) return i;
    }
    throw LookupError(fmt::format("unknown intersection {}", id));
}

const Infrastructure& RoadMap::infrastructure(int id) const {
    for (const auto& r : infrastructures_) {
        if (r.id == id) return r;
    }
    throw LookupError(fmt::format("unknown infrastructure {}", id));
}

double RoadMap::chain_position(int segment_id, double offset) const {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (segments_[i].id == segment_id) return wrap(segment_start_[i] + offset);
    }
    throw LookupError(fmt::format("unknown segment {}", segment_id));
}

std::pair<int, double> RoadMap::locate(double chain_pos) const {
    const double p = wrap(chain_pos);
    for (std::size_t i = segments_.size(); i-- > 0;) {
        if (p >= segment_start_[i]) {
            return {segments_[i].id, std::min(p - segment_start_[i], segments_[i].length)};
        }
    }
    return {segments_.front().id, p};
}

double RoadMap::wrap(double chain_pos) const {
    double p = std::fmod(chain_pos, length_);
    if (p < 0.0) p += length_;
    if (p >= length_) p = 0.0;
    return p;
}

double RoadMap::ahead_distance(double from, double to) const { return wrap(to - from); }

double RoadMap::ring_distance(double a, double b) const {
    const double d = ahead_distance(a, b);
    return std::min(d, length_ - d);
}

double RoadMap::signed_offset(double from, double to) const {
    const double d = ahead_distance(from, to);
    return d > length_ / 2.0 ? d - length_ : d;
}

double RoadMap::speed_limit_at(double chain_pos) const { return segment(locate(chain_pos).first).speed_limit; }

std::optional<int> RoadMap::congestion_zone_at(double chain_pos) const {
    const double p = wrap(chain_pos);
    for (std::size_t i = 0; i < zones_.size(); ++i) {
        const auto [start, end] = zone_interval(static_cast<int>(i));
        if (ahead_distance(start, p) < end - start) return static_cast<int>(i);
    }
    return std::nullopt;
}

std::pair<double, double> RoadMap::zone_interval(int zone_index) const {
    const auto& z = zones_.at(static_cast<std::size_t>(zone_index));
    const double base = chain_position(z.segment, 0.0);
    return {base + z.start, base + z.end};
}

LightState light_phase(const Intersection& intersection, double time) {
    const double cycle = intersection.red_duration + intersection.green_duration;
    double t = std::fmod(time + intersection.phase_offset, cycle);
    if (t < 0.0) t += cycle;
    if (t < intersection.red_duration) return {Light::Red, t};
    return {Light::Green, t - intersection.red_duration};
}

LightState light_phase(const RoadMap& map, int intersection_id, double time) {
    return light_phase(map.intersection(intersection_id), time);
}

ContextKind kind_of(const TopologyContext& ctx) {
    return static_cast<ContextKind>(ctx.index());
}

std::string to_string(ContextKind kind) {
    switch (kind) {
        case ContextKind::SignalizedIntersection: return "SignalizedIntersection";
        case ContextKind::CongestedSegment: return "CongestedSegment";
        case ContextKind::RoadsideInfrastructure: return "RoadsideInfrastructure";
        case ContextKind::OpenRoad: return "OpenRoad";
    }
    return "OpenRoad";
}

std::string context_label(const TopologyContext& ctx) {
    struct Visitor {
        std::string operator()(const context::SignalizedIntersection& c) const {
            return fmt::format("intersection:{}", c.id);
        }
        std::string operator()(const context::CongestedSegment& c) const { return fmt::format("zone:{}", c.zone); }
        std::string operator()(const context::RoadsideInfrastructure& c) const {
            return fmt::format("infrastructure:{}", c.id);
        }
        std::string operator()(const context::OpenRoad&) const { return "open"; }
    };
    return std::visit(Visitor{}, ctx);
}

const VehicleState& WorldState::vehicle(VehicleId id) const {
    if (id.value < vehicles.size() && vehicles[id.value].true_id == id) return vehicles[id.value];
    auto it = std::find_if(vehicles.begin(), vehicles.end(), [id](const auto& v) { return v.true_id == id; });
    if (it == vehicles.end()) throw LookupError(fmt::format("unknown vehicle {}", id.value));
    return *it;
}

VehicleState& WorldState::vehicle(VehicleId id) {
    return const_cast<VehicleState&>(std::as_const(*this).vehicle(id));
}

WorldState make_world(std::shared_ptr<const RoadMap> map, const WorldParams& params,
                      const PopulationSpec& population, std::uint64_t seed) {
    if (!(params.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (population.dangerous_fraction < 0.0 || population.dangerous_fraction > 1.0) {
        throw std::invalid_argument("dangerous fraction must lie in [0, 1]");
    }
    WorldState world;
    world.dt = params.dt;
    world.params = params;
    world.rng_seed = seed;
    world.map = map;

    const std::size_t n = population.count;
    if (n == 0) return world;
    const double spacing = map->length() / static_cast<double>(n);
    if (spacing < params.min_gap) {
        throw std::invalid_argument(fmt::format("{} vehicles do not fit on a {} m ring with min gap {}", n,
                                                map->length(), params.min_gap));
    }
    // Keep neighbours at least min_gap apart after jitter.
    const double max_jitter = std::max(0.0, (spacing - params.min_gap) / (2.0 * spacing));
    const double jitter = std::min(population.position_jitter, max_jitter);

    double max_limit = 0.0;
    for (const auto& s : map->segments()) max_limit = std::max(max_limit, s.speed_limit);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> speed_factor(population.desired_speed_min_factor, 1.0);

    world.vehicles.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        VehicleState v;
        v.true_id = VehicleId{static_cast<std::uint32_t>(i)};
        const double pos = map->wrap(static_cast<double>(i) * spacing + unit(rng) * jitter * spacing);
        const auto [seg, off] = map->locate(pos);
        v.segment = seg;
        v.offset = off;
        v.desired_speed = max_limit * speed_factor(rng);
        v.speed = std::min(v.desired_speed, map->speed_limit_at(pos));
        v.cooperative_prob = population.cooperative_prob;
        world.vehicles.push_back(v);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto dangerous =
        static_cast<std::size_t>(std::llround(population.dangerous_fraction * static_cast<double>(n)));
    for (std::size_t k = 0; k < dangerous; ++k) world.vehicles[order[k]].dangerous = true;
    return world;
}

WorldState step_world(const WorldState& world) {
    WorldState next = world;
    const RoadMap& map = *world.map;
    const double dt = world.dt;
    next.step = world.step + 1;
    next.time = static_cast<double>(next.step) * dt;

    // Road vehicles in ring order; infrastructure occupants are off the lane.
    std::vector<std::size_t> road;
    std::vector<double> pos(world.vehicles.size(), 0.0);
    for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
        pos[i] = world.chain_position(world.vehicles[i]);
        if (!world.vehicles[i].inside_infrastructure) road.push_back(i);
    }
    std::sort(road.begin(), road.end(), [&](std::size_t a, std::size_t b) {
        if (pos[a] != pos[b]) return pos[a] < pos[b];
        return a < b;
    });

    std::vector<LightState> lights;
    lights.reserve(map.intersections().size());
    for (const auto& inter : map.intersections()) lights.push_back(light_phase(inter, world.time));

    for (std::size_t k = 0; k < road.size(); ++k) {
        const std::size_t i = road[k];
        const VehicleState& cur = world.vehicles[i];
        VehicleState& out = next.vehicles[i];
        const double p = pos[i];

        double target = std::min(cur.desired_speed, map.speed_limit_at(p));
        if (map.congestion_zone_at(p)) target = std::min(target, map.congestion_speed());
        double advance = target * dt;

        bool held_at_red = false;
        for (std::size_t j = 0; j < lights.size(); ++j) {
            if (lights[j].light != Light::Red) continue;
            const double d = map.ahead_distance(p, map.intersections()[j].position);
            if (d <= advance + kEps) {
                advance = d;
                held_at_red = true;
            }
        }

        if (road.size() > 1) {
            const std::size_t leader = road[(k + 1) % road.size()];
            const double gap = map.ahead_distance(p, pos[leader]);
            const double allowed = std::max(0.0, gap - world.params.min_gap);
            if (allowed < advance) {
                advance = allowed;
                held_at_red = false;
            }
        }

        if (advance < kEps) advance = 0.0;
        const double new_pos = map.wrap(p + advance);
        const auto [seg, off] = map.locate(new_pos);
        out.segment = seg;
        out.offset = off;
        out.speed = held_at_red ? 0.0 : advance / dt;
        if (out.speed == 0.0) {
            out.stopped_for = cur.speed == 0.0 ? cur.stopped_for + dt : 0.0;
        } else {
            out.stopped_for = 0.0;
        }
    }

    for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
        if (world.vehicles[i].inside_infrastructure) {
            next.vehicles[i].speed = 0.0;
            next.vehicles[i].stopped_for = world.vehicles[i].stopped_for + dt;
        }
    }
    return next;
}

TopologyContext detect_context(const VehicleState& vehicle, const WorldState& world) {
    const RoadMap& map = *world.map;
    (void)world.vehicle(vehicle.true_id);  // lookup error for foreign vehicles

    if (vehicle.inside_infrastructure) {
        const int id = vehicle.inside_infrastructure->id;
        return context::RoadsideInfrastructure{id, free_slots(world, id)};
    }
    const double p = world.chain_position(vehicle);

    const Infrastructure* nearest_infra = nullptr;
    double best = world.params.approach_radius + kEps;
    for (const auto& r : map.infrastructures()) {
        const double d = map.ring_distance(p, r.position);
        if (d <= best) {
            best = d;
            nearest_infra = &r;
        }
    }
    if (nearest_infra) return context::RoadsideInfrastructure{nearest_infra->id, free_slots(world, nearest_infra->id)};

    const Intersection* nearest_inter = nullptr;
    best = world.params.detection_radius + kEps;
    for (const auto& inter : map.intersections()) {
        const double d = map.ahead_distance(p, inter.position);
        if (d <= best) {
            best = d;
            nearest_inter = &inter;
        }
    }
    if (nearest_inter) {
        const auto phase = light_phase(*nearest_inter, world.time);
        return context::SignalizedIntersection{nearest_inter->id, phase.light, phase.time_in_phase};
    }

    if (auto zone = map.congestion_zone_at(p); zone && vehicle.speed < world.params.congestion_threshold) {
        return context::CongestedSegment{*zone};
    }
    return context::OpenRoad{};
}

TopologyContext detect_context(VehicleId id, const WorldState& world) {
    return detect_context(world.vehicle(id), world);
}

int occupancy(const WorldState& world, int infrastructure_id) {
    return static_cast<int>(std::count_if(world.vehicles.begin(), world.vehicles.end(), [&](const auto& v) {
        return v.inside_infrastructure && v.inside_infrastructure->id == infrastructure_id;
    }));
}

int free_slots(const WorldState& world, int infrastructure_id) {
    return world.map->infrastructure(infrastructure_id).capacity - occupancy(world, infrastructure_id);
}

bool exit_clear(const WorldState& world, int infrastructure_id) {
    const auto& infra = world.map->infrastructure(infrastructure_id);
    for (const auto& v : world.vehicles) {
        if (v.inside_infrastructure) continue;
        if (world.map->ring_distance(world.chain_position(v), infra.position) < world.params.min_gap) return false;
    }
    return true;
}

void enter_infrastructure(WorldState& world, VehicleId id, int infrastructure_id) {
    const auto& infra = world.map->infrastructure(infrastructure_id);
    VehicleState& v = world.vehicle(id);
    if (v.inside_infrastructure) throw std::logic_error(fmt::format("vehicle {} is already inside", id.value));
    if (free_slots(world, infrastructure_id) <= 0) {
        throw std::logic_error(fmt::format("infrastructure {} is full", infrastructure_id));
    }
    const auto [seg, off] = world.map->locate(infra.position);
    v.segment = seg;
    v.offset = off;
    v.speed = 0.0;
    v.stopped_for = 0.0;
    v.inside_infrastructure = InfrastructureStay{infrastructure_id, world.time + infra.service_time};
}

void exit_infrastructure(WorldState& world, VehicleId id) {
    VehicleState& v = world.vehicle(id);
    if (!v.inside_infrastructure) throw std::logic_error(fmt::format("vehicle {} is not inside", id.value));
    v.inside_infrastructure.reset();
    v.speed = 0.0;
    v.stopped_for = 0.0;
}

}  // namespace sdlp::world
