#pragma once

/**
 * Passive eavesdropper. Sniffers cover part or all of the ring; tracks are
 * extended by identical pseudonyms and, across a change, by gating the
 * track's extrapolated state against newly heard pseudonyms.
 */

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sdlp/beacon_plane.hpp"
#include "sdlp/protocol.hpp"
#include "sdlp/road_world.hpp"

namespace sdlp::adversary {

struct SegmentSpan {
    int segment = 0;
    double start = 0.0;
    double end = 0.0;
};

struct SnifferDeployment {
    control::Coverage coverage = control::Coverage::Global;
    std::vector<SegmentSpan> local_spans;  // Local
    double fraction = 0.5;                 // MidSized share of the ring
    double cell_length = 100.0;            // MidSized sniffer cell, m
    control::Capability capability = control::Capability::SyntacticAndSemantic;
    control::Power power = control::Power::Simple;
    double gate_radius = 21.0;    // m
    double kernel_sigma = 7.0;    // m
    double speed_sigma = 2.0;     // m/s, Advanced only
    double heading_penalty = 0.1; // weight factor for a heading mismatch, Advanced only
    double miss_mass = 0.0;
    double beacon_interval = 0.5;
    double max_coast = 120.0;     // s a track stays linkable without CAMs
    std::uint64_t seed = 0;
};

// sigma = speed_limit * beacon_interval, gate = 3 sigma.
SnifferDeployment with_default_kernel(SnifferDeployment d, double speed_limit);

void validate(const SnifferDeployment& d);

// Covered chain intervals of a deployment on a map.
class CoverageMask {
public:
    CoverageMask(const world::RoadMap& map, const SnifferDeployment& deployment);

    bool covers(double chain_pos) const;
    bool covers(int segment, double offset) const { return covers(map_->chain_position(segment, offset)); }
    const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }
    double covered_length() const;

private:
    const world::RoadMap* map_;
    bool global_ = false;
    std::vector<std::pair<double, double>> intervals_;
};

// MidSized cell choice: round(fraction * cells) of the ring's cells, seeded shuffle.
std::vector<std::size_t> midsized_cells(std::size_t cells, double fraction, std::uint64_t seed);

std::vector<beacon::Cam> observe_round(std::span<const beacon::SentCam> cams, const CoverageMask& mask);

struct TrackState {
    double position = 0.0;  // chain coordinate
    double speed = 0.0;
    Heading heading = Heading::Forward;
    double last_time = 0.0;
};

struct Track {
    int id = 0;
    std::vector<PseudonymId> chain;
    std::vector<double> first_seen;  // per chain element
    TrackState state;
    bool alive = true;

    PseudonymId current() const { return chain.back(); }
};

struct Distribution {
    std::vector<double> probs;  // per candidate
    double miss = 0.0;
};

// Predicted position: state.position + state.speed * gap.
double predicted_position(const world::RoadMap& map, const TrackState& state, double gap);
bool gates(const world::RoadMap& map, const TrackState& state, const beacon::Cam& cam, double gap,
           const SnifferDeployment& d);

// Probabilities for already gated candidates. Empty input gives an empty distribution.
Distribution assignment_probs(const world::RoadMap& map, const TrackState& state,
                              std::span<const beacon::Cam> candidates, const SnifferDeployment& d, double gap);

// What the adversary believed at the step a track's pseudonym might have been replaced.
struct LinkDecision {
    double time = 0.0;
    PseudonymId from;
    std::vector<PseudonymId> candidates;
    Distribution distribution;
    std::optional<PseudonymId> chosen;
};

class Adversary {
public:
    Adversary(std::shared_ptr<const world::RoadMap> map, SnifferDeployment deployment);

    void set_power(control::Power power) { deployment_.power = power; }
    const SnifferDeployment& deployment() const { return deployment_; }
    const CoverageMask& mask() const { return mask_; }

    void link_step(std::span<const beacon::Cam> observed, double now);

    const std::vector<Track>& tracks() const { return tracks_; }
    // Latest decision taken for the track ending in `from`, if one was taken at `time`.
    const LinkDecision* decision(PseudonymId from, double time) const;
    // Pseudonym the adversary appended after `from`, if any.
    std::optional<PseudonymId> linked_next(PseudonymId from) const;
    int bridged_silences() const { return bridged_; }

    // track_id,pseudonym_chain,timestamps (';'-separated lists)
    void write_tracks_csv(std::ostream& os) const;

private:
    std::shared_ptr<const world::RoadMap> map_;
    SnifferDeployment deployment_;
    CoverageMask mask_;
    std::mt19937_64 rng_;
    std::vector<Track> tracks_;
    std::unordered_map<PseudonymId, std::size_t> owner_;  // pseudonym -> track index
    std::unordered_map<PseudonymId, LinkDecision> decisions_;
    std::unordered_map<PseudonymId, PseudonymId> next_;
    std::vector<std::size_t> alive_;
    int bridged_ = 0;
};

struct GroundTruthPair {
    PseudonymId from;
    PseudonymId to;
};

// Correct consecutive links over ground-truth pairs; 0 with no pairs.
double tracking_success(const Adversary& adversary, std::span<const GroundTruthPair> pairs);

}  // namespace sdlp::adversary
