#pragma once

// CAM broadcasting, Local Dynamic Map maintenance and the safety / LDM
// anomaly measurements derived from them. Radio is ideal within range.

#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "sdlp/ids.hpp"
#include "sdlp/road_world.hpp"

namespace sdlp::beacon {

struct Cam {
    PseudonymId pseudonym;
    int segment = 0;
    double offset = 0.0;
    double speed = 0.0;
    Heading heading = Heading::Forward;
    double timestamp = 0.0;
};

struct SentCam {
    VehicleId sender;
    Cam cam;
};

struct LdmEntry {
    PseudonymId pseudonym;
    Cam last_cam;
    double last_seen = 0.0;
};

struct Ldm {
    VehicleId owner;
    std::map<PseudonymId, LdmEntry> entries;
    double expiry = 3.0;
};

struct BeaconParams {
    double beacon_interval = 0.5;
    double radio_range = 300.0;
    double ldm_expiry = 3.0;
    double awareness_range = 150.0;
    double t_safe = 2.0;
};

// True when `interval` is a whole multiple of `dt` (within floating tolerance).
bool is_multiple_of(double interval, double dt);

// One CAM per vehicle that is neither silent nor inside an infrastructure,
// emitted on steps where time is a multiple of the beacon interval.
// `active` is indexed by vehicle id and holds each sender's current pseudonym.
std::vector<SentCam> broadcast_round(const world::WorldState& world, std::span<const bool> silent,
                                     std::span<const PseudonymId> active, double beacon_interval);

std::vector<Ldm> make_ldms(const world::WorldState& world, double expiry);

// Receivers ingest CAMs from senders within radio range, then evict stale entries.
void update_ldms(std::vector<Ldm>& ldms, std::span<const SentCam> cams, const world::WorldState& world,
                 double radio_range);

struct SafetyStats {
    std::size_t pairs = 0;
    std::size_t stale = 0;
    double fraction() const { return pairs == 0 ? 0.0 : static_cast<double>(stale) / static_cast<double>(pairs); }
};

// Pairs (d, n) with d dangerous and n within awareness range of d; a pair is
// stale when n's LDM has no entry for d's active pseudonym younger than t_safe.
SafetyStats safety_risk(const world::WorldState& world, std::span<const Ldm> ldms,
                        std::span<const PseudonymId> active, double awareness_range, double t_safe);

struct LdmAnomalies {
    std::size_t missing = 0;
    std::size_t guest = 0;
};

// `owner_of` maps every pseudonym that has ever been active to its vehicle.
LdmAnomalies ldm_anomalies(const world::WorldState& world, std::span<const Ldm> ldms,
                           std::span<const PseudonymId> active,
                           const std::unordered_map<PseudonymId, VehicleId>& owner_of, double awareness_range,
                           double t_safe);

}  // namespace sdlp::beacon
