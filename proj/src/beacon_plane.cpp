#include "sdlp/beacon_plane.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace sdlp::beacon {

namespace {

constexpr double kEps = 1e-9;

std::uint64_t interval_steps(double interval, double dt) {
    return static_cast<std::uint64_t>(std::llround(interval / dt));
}

bool on_road(const world::VehicleState& v) { return !v.inside_infrastructure.has_value(); }

}  // namespace

bool is_multiple_of(double interval, double dt) {
    if (!(interval > 0.0) || !(dt > 0.0)) return false;
    const double ratio = interval / dt;
    return std::llround(ratio) >= 1 && std::abs(ratio - std::round(ratio)) < 1e-6;
}

std::vector<SentCam> broadcast_round(const world::WorldState& world, std::span<const bool> silent,
                                     std::span<const PseudonymId> active, double beacon_interval) {
    if (!is_multiple_of(beacon_interval, world.dt)) {
        throw std::invalid_argument("beacon interval must be a multiple of dt");
    }
    if (silent.size() != world.vehicles.size() || active.size() != world.vehicles.size()) {
        throw std::invalid_argument("silent/active views must cover every vehicle");
    }
    std::vector<SentCam> out;
    if (world.step % interval_steps(beacon_interval, world.dt) != 0) return out;
    out.reserve(world.vehicles.size());
    for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
        const auto& v = world.vehicles[i];
        if (silent[i] || !on_road(v)) continue;
        out.push_back({v.true_id, Cam{active[i], v.segment, v.offset, v.speed, v.heading, world.time}});
    }
    return out;
}

std::vector<Ldm> make_ldms(const world::WorldState& world, double expiry) {
    std::vector<Ldm> ldms;
    ldms.reserve(world.vehicles.size());
    for (const auto& v : world.vehicles) ldms.push_back(Ldm{v.true_id, {}, expiry});
    return ldms;
}

void update_ldms(std::vector<Ldm>& ldms, std::span<const SentCam> cams, const world::WorldState& world,
                 double radio_range) {
    if (!(radio_range > 0.0)) throw std::invalid_argument("radio range must be positive");
    const auto& map = *world.map;
    std::vector<double> sender_pos;
    sender_pos.reserve(cams.size());
    for (const auto& c : cams) sender_pos.push_back(map.chain_position(c.cam.segment, c.cam.offset));

    for (auto& ldm : ldms) {
        const auto& receiver = world.vehicle(ldm.owner);
        const double rp = world.chain_position(receiver);
        for (std::size_t k = 0; k < cams.size(); ++k) {
            const auto& c = cams[k];
            if (c.sender == ldm.owner) continue;
            if (map.ring_distance(rp, sender_pos[k]) > radio_range + kEps) continue;
            ldm.entries[c.cam.pseudonym] = LdmEntry{c.cam.pseudonym, c.cam, c.cam.timestamp};
        }
        std::erase_if(ldm.entries, [&](const auto& kv) { return world.time - kv.second.last_seen > ldm.expiry + kEps; });
    }
}

SafetyStats safety_risk(const world::WorldState& world, std::span<const Ldm> ldms,
                        std::span<const PseudonymId> active, double awareness_range, double t_safe) {
    if (!(t_safe > 0.0)) throw std::invalid_argument("t_safe must be positive");
    SafetyStats stats;
    const auto& map = *world.map;
    const auto& vs = world.vehicles;
    for (std::size_t d = 0; d < vs.size(); ++d) {
        if (!vs[d].dangerous || !on_road(vs[d])) continue;
        const double dp = world.chain_position(vs[d]);
        for (std::size_t n = 0; n < vs.size(); ++n) {
            if (n == d || !on_road(vs[n])) continue;
            if (map.ring_distance(dp, world.chain_position(vs[n])) > awareness_range + kEps) continue;
            ++stats.pairs;
            const auto& entries = ldms[n].entries;
            auto it = entries.find(active[d]);
            const bool fresh = it != entries.end() && world.time - it->second.last_seen < t_safe - kEps;
            if (!fresh) ++stats.stale;
        }
    }
    return stats;
}

LdmAnomalies ldm_anomalies(const world::WorldState& world, std::span<const Ldm> ldms,
                           std::span<const PseudonymId> active,
                           const std::unordered_map<PseudonymId, VehicleId>& owner_of, double awareness_range,
                           double t_safe) {
    LdmAnomalies out;
    const auto& map = *world.map;
    const auto& vs = world.vehicles;

    std::vector<std::unordered_set<std::uint32_t>> fresh_owners(vs.size());
    for (std::size_t n = 0; n < vs.size(); ++n) {
        for (const auto& [p, entry] : ldms[n].entries) {
            auto owner = owner_of.find(p);
            if (owner == owner_of.end() || active[owner->second.value] != p) ++out.guest;
            if (owner != owner_of.end() && world.time - entry.last_seen < t_safe - kEps) {
                fresh_owners[n].insert(owner->second.value);
            }
        }
    }

    for (std::size_t v = 0; v < vs.size(); ++v) {
        if (!on_road(vs[v])) continue;
        const double vp = world.chain_position(vs[v]);
        for (std::size_t n = 0; n < vs.size(); ++n) {
            if (n == v || !on_road(vs[n])) continue;
            if (map.ring_distance(vp, world.chain_position(vs[n])) > awareness_range + kEps) continue;
            if (!fresh_owners[n].contains(vs[v].true_id.value)) {
                ++out.missing;
                break;
            }
        }
    }
    return out;
}

}  // namespace sdlp::beacon
