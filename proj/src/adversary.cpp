#include "sdlp/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

namespace sdlp::adversary {

namespace {

constexpr double kEps = 1e-9;

using control::Capability;
using control::Coverage;
using control::Power;

}  // namespace

SnifferDeployment with_default_kernel(SnifferDeployment d, double speed_limit) {
    d.kernel_sigma = speed_limit * d.beacon_interval;
    d.gate_radius = 3.0 * d.kernel_sigma;
    return d;
}

void validate(const SnifferDeployment& d) {
    if (d.coverage == Coverage::MidSized && !(d.fraction > 0.0 && d.fraction < 1.0)) {
        throw std::invalid_argument("MidSized coverage fraction must lie in (0,1)");
    }
    if (!(d.gate_radius > 0.0)) throw std::invalid_argument("gate_radius must be > 0");
    if (!(d.kernel_sigma > 0.0) || !(d.speed_sigma > 0.0)) throw std::invalid_argument("kernel sigmas must be > 0");
    if (!(d.heading_penalty > 0.0 && d.heading_penalty <= 1.0)) {
        throw std::invalid_argument("heading_penalty must lie in (0,1]");
    }
    if (!(d.miss_mass >= 0.0 && d.miss_mass < 1.0)) throw std::invalid_argument("miss_mass must lie in [0,1)");
    if (!(d.cell_length > 0.0)) throw std::invalid_argument("cell_length must be > 0");
    if (!(d.beacon_interval > 0.0) || !(d.max_coast >= d.beacon_interval)) {
        throw std::invalid_argument("max_coast must be >= beacon_interval > 0");
    }
}

std::vector<std::size_t> midsized_cells(std::size_t cells, double fraction, std::uint64_t seed) {
    std::vector<std::size_t> order(cells);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto keep = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(cells)));
    order.resize(std::min(keep, cells));
    std::sort(order.begin(), order.end());
    return order;
}

CoverageMask::CoverageMask(const world::RoadMap& map, const SnifferDeployment& d) : map_(&map) {
    switch (d.coverage) {
        case Coverage::Global:
            global_ = true;
            intervals_.push_back({0.0, map.length()});
            break;
        case Coverage::Local:
            for (const auto& s : d.local_spans) {
                const auto& seg = map.segment(s.segment);
                if (s.start < 0.0 || s.end > seg.length || !(s.start < s.end)) {
                    throw std::invalid_argument(
                        fmt::format("sniffer span [{}, {}] outside segment {}", s.start, s.end, s.segment));
                }
                const double a = map.chain_position(s.segment, s.start);
                intervals_.push_back({a, a + (s.end - s.start)});
            }
            break;
        case Coverage::MidSized: {
            const auto cells =
                std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(map.length() / d.cell_length)));
            const double len = map.length() / static_cast<double>(cells);
            for (auto c : midsized_cells(cells, d.fraction, d.seed)) {
                intervals_.push_back({static_cast<double>(c) * len, static_cast<double>(c + 1) * len});
            }
            break;
        }
    }
    std::sort(intervals_.begin(), intervals_.end());
}

bool CoverageMask::covers(double chain_pos) const {
    if (global_) return true;
    const double p = map_->wrap(chain_pos);
    return std::any_of(intervals_.begin(), intervals_.end(),
                       [&](const auto& iv) { return p >= iv.first - kEps && p < iv.second - kEps; });
}

double CoverageMask::covered_length() const {
    double total = 0.0;
    for (const auto& [a, b] : intervals_) total += b - a;
    return total;
}

std::vector<beacon::Cam> observe_round(std::span<const beacon::SentCam> cams, const CoverageMask& mask) {
    std::vector<beacon::Cam> out;
    for (const auto& s : cams) {
        if (mask.covers(s.cam.segment, s.cam.offset)) out.push_back(s.cam);
    }
    return out;
}

double predicted_position(const world::RoadMap& map, const TrackState& state, double gap) {
    const double dir = state.heading == Heading::Forward ? 1.0 : -1.0;
    return map.wrap(state.position + dir * state.speed * gap);
}

bool gates(const world::RoadMap& map, const TrackState& state, const beacon::Cam& cam, double gap,
           const SnifferDeployment& d) {
    const double pred = predicted_position(map, state, gap);
    const double pos = map.chain_position(cam.segment, cam.offset);
    return std::abs(map.signed_offset(pred, pos)) <= d.gate_radius + kEps;
}

Distribution assignment_probs(const world::RoadMap& map, const TrackState& state,
                              std::span<const beacon::Cam> candidates, const SnifferDeployment& d, double gap) {
    Distribution out;
    if (candidates.empty()) return out;
    const double pred = predicted_position(map, state, gap);
    // Log weights, shifted by their maximum so the normalization never divides by a subnormal total.
    std::vector<double> w;
    w.reserve(candidates.size());
    for (const auto& c : candidates) {
        double log_w = 0.0;
        if (d.power != Power::Simple) {
            const double r = map.signed_offset(pred, map.chain_position(c.segment, c.offset));
            log_w = -(r * r) / (2.0 * d.kernel_sigma * d.kernel_sigma);
        }
        if (d.power == Power::Advanced) {
            const double dv = c.speed - state.speed;
            log_w -= (dv * dv) / (2.0 * d.speed_sigma * d.speed_sigma);
            if (c.heading != state.heading) log_w += std::log(d.heading_penalty);
        }
        w.push_back(log_w);
    }
    const double top = *std::max_element(w.begin(), w.end());
    for (double& x : w) x = std::exp(x - top);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    out.miss = d.miss_mass;
    for (double x : w) out.probs.push_back((1.0 - d.miss_mass) * x / total);
    return out;
}

Adversary::Adversary(std::shared_ptr<const world::RoadMap> map, SnifferDeployment deployment)
    : map_(std::move(map)), deployment_(std::move(deployment)), mask_(*map_, deployment_), rng_(deployment_.seed) {
    validate(deployment_);
}

void Adversary::link_step(std::span<const beacon::Cam> observed, double now) {
    std::vector<const beacon::Cam*> fresh;
    for (const auto& cam : observed) {
        const auto it = owner_.find(cam.pseudonym);
        if (it != owner_.end() && tracks_[it->second].alive && tracks_[it->second].current() == cam.pseudonym) {
            auto& t = tracks_[it->second];
            t.state = {map_->chain_position(cam.segment, cam.offset), cam.speed, cam.heading, now};
            continue;
        }
        fresh.push_back(&cam);
    }

    const double bridge_limit = deployment_.capability == Capability::SyntacticOnly ? deployment_.beacon_interval
                                                                                    : deployment_.max_coast;
    std::vector<std::size_t> coasting;
    for (auto idx : alive_) {
        const auto& t = tracks_[idx];
        const double gap = now - t.state.last_time;
        if (gap > kEps && gap <= bridge_limit + kEps) coasting.push_back(idx);
    }

    // (probability, tie key, track, fresh cam)
    std::vector<std::tuple<double, std::uint64_t, std::size_t, std::size_t>> edges;
    for (auto idx : coasting) {
        const auto& t = tracks_[idx];
        const double gap = now - t.state.last_time;
        std::vector<beacon::Cam> gated;
        std::vector<std::size_t> which;
        for (std::size_t j = 0; j < fresh.size(); ++j) {
            if (gates(*map_, t.state, *fresh[j], gap, deployment_)) {
                gated.push_back(*fresh[j]);
                which.push_back(j);
            }
        }
        if (gated.empty()) continue;
        LinkDecision dec;
        dec.time = now;
        dec.from = t.current();
        dec.distribution = assignment_probs(*map_, t.state, gated, deployment_, gap);
        for (std::size_t k = 0; k < gated.size(); ++k) {
            dec.candidates.push_back(gated[k].pseudonym);
            edges.emplace_back(dec.distribution.probs[k], rng_(), idx, which[k]);
        }
        decisions_[dec.from] = std::move(dec);
    }

    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::get<1>(a) < std::get<1>(b);
    });

    std::vector<bool> cam_taken(fresh.size(), false);
    std::unordered_set<std::size_t> track_taken;
    for (const auto& [p, key, idx, j] : edges) {
        if (cam_taken[j] || track_taken.count(idx)) continue;
        cam_taken[j] = true;
        track_taken.insert(idx);
        auto& t = tracks_[idx];
        const auto& cam = *fresh[j];
        const double gap = now - t.state.last_time;
        if (gap > deployment_.beacon_interval + kEps) ++bridged_;
        decisions_[t.current()].chosen = cam.pseudonym;
        next_[t.current()] = cam.pseudonym;
        t.chain.push_back(cam.pseudonym);
        t.first_seen.push_back(now);
        t.state = {map_->chain_position(cam.segment, cam.offset), cam.speed, cam.heading, now};
        owner_[cam.pseudonym] = idx;
    }

    for (std::size_t j = 0; j < fresh.size(); ++j) {
        if (cam_taken[j]) continue;
        const auto& cam = *fresh[j];
        Track t;
        t.id = static_cast<int>(tracks_.size());
        t.chain.push_back(cam.pseudonym);
        t.first_seen.push_back(now);
        t.state = {map_->chain_position(cam.segment, cam.offset), cam.speed, cam.heading, now};
        owner_[cam.pseudonym] = tracks_.size();
        alive_.push_back(tracks_.size());
        tracks_.push_back(std::move(t));
    }

    std::erase_if(alive_, [&](std::size_t idx) {
        auto& t = tracks_[idx];
        if (now - t.state.last_time > deployment_.max_coast + kEps) t.alive = false;
        return !t.alive;
    });
}

const LinkDecision* Adversary::decision(PseudonymId from, double time) const {
    const auto it = decisions_.find(from);
    if (it == decisions_.end() || std::abs(it->second.time - time) > kEps) return nullptr;
    return &it->second;
}

std::optional<PseudonymId> Adversary::linked_next(PseudonymId from) const {
    const auto it = next_.find(from);
    if (it == next_.end()) return std::nullopt;
    return it->second;
}

void Adversary::write_tracks_csv(std::ostream& os) const {
    os << "track_id,pseudonym_chain,timestamps\n";
    for (const auto& t : tracks_) {
        std::string chain;
        std::string times;
        for (std::size_t i = 0; i < t.chain.size(); ++i) {
            if (i > 0) {
                chain += ';';
                times += ';';
            }
            chain += std::to_string(t.chain[i].value);
            times += fmt::format("{}", t.first_seen[i]);
        }
        os << t.id << ',' << chain << ',' << times << '\n';
    }
}

double tracking_success(const Adversary& adversary, std::span<const GroundTruthPair> pairs) {
    if (pairs.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& p : pairs) {
        const auto next = adversary.linked_next(p.from);
        if (next && *next == p.to) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

}  // namespace sdlp::adversary
