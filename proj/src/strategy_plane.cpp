#include "sdlp/strategy_plane.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sdlp/protocol.hpp"

namespace sdlp::strategy {

namespace {

constexpr double kEps = 1e-9;

using world::Light;

const world::context::SignalizedIntersection* as_intersection(const world::TopologyContext& ctx) {
    return std::get_if<world::context::SignalizedIntersection>(&ctx);
}

bool stopped(const world::VehicleState& v) { return v.speed <= kEps && !v.inside_infrastructure; }

TickResult hold() { return {{action::Hold{}}, std::nullopt, false}; }

// A silent UPCS vehicle leaves silence once its light is green or it is no
// longer at the intersection.
bool upcs_release(const TickInput& in) {
    const auto* sig = as_intersection(in.context);
    return in.state.silent && (sig == nullptr || sig->light == Light::Green);
}

bool socialspots_trigger(const TickInput& in) {
    const auto* sig = as_intersection(in.context);
    return sig != nullptr && sig->light == Light::Green && sig->time_in_phase < in.dt - kEps &&
           stopped(in.vehicle) && in.group_size >= in.settings.min_group_size;
}

bool tapcs_silence_over(const TickInput& in) {
    return in.state.silent && in.now - in.state.silence_start >= in.state.silence_duration - kEps;
}

bool privanet_candidate(const TickInput& in) {
    if (in.vehicle.inside_infrastructure) return false;
    const auto* ri = std::get_if<world::context::RoadsideInfrastructure>(&in.context);
    if (ri == nullptr || in.state.infra_done == ri->id) return false;
    return in.privacy_level < in.settings.privacy_threshold && ri->free_slots > 0;
}

// Closing step of a silence: change when allowed, exit in any case.
TickResult close_silence(const TickInput& in, bool want_change) {
    if (!want_change) return {{action::ExitSilence{}}, std::nullopt, false};
    if (!in.cooperative) return {{action::ExitSilence{}}, std::nullopt, true};
    if (in.pool_view) return {{action::ExitSilence{}}, in.pool_view, false};
    return {{action::ChangePseudonym{}, action::ExitSilence{}}, std::nullopt, false};
}

}  // namespace

std::string to_string(StrategyId id) {
    switch (id) {
        case StrategyId::UPCS: return "UPCS";
        case StrategyId::SocialSpots: return "SocialSpots";
        case StrategyId::TAPCS: return "TAPCS";
        case StrategyId::PRIVANET: return "PRIVANET";
    }
    return "UPCS";
}

StrategyId strategy_from_string(const std::string& name) {
    for (auto id : kAllStrategies) {
        if (to_string(id) == name) return id;
    }
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

void validate(const StrategySettings& s) {
    if (!(s.silence_duration >= 0.0)) throw std::invalid_argument("silence_duration must be >= 0");
    if (!(s.max_silence > 0.0)) throw std::invalid_argument("max_silence must be > 0");
    if (!(s.red_light_duration > 0.0)) throw std::invalid_argument("red_light_duration must be > 0");
    if (!(s.speed_threshold > 0.0)) throw std::invalid_argument("speed_threshold must be > 0");
    if (s.min_group_size < 1) throw std::invalid_argument("min_group_size must be >= 1");
    if (s.ri_capacity < 1) throw std::invalid_argument("ri_capacity must be >= 1");
    if (!(s.privacy_threshold >= 0.0)) throw std::invalid_argument("privacy_threshold must be >= 0");
}

std::string to_string(const PcsAction& a) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, action::EnterSilence>) return fmt::format("EnterSilence({})", x.duration);
            if constexpr (std::is_same_v<T, action::ExitSilence>) return "ExitSilence";
            if constexpr (std::is_same_v<T, action::ChangePseudonym>) return "ChangePseudonym";
            if constexpr (std::is_same_v<T, action::Hold>) return "Hold";
            if constexpr (std::is_same_v<T, action::EnterInfrastructure>)
                return fmt::format("EnterInfrastructure({})", x.id);
            if constexpr (std::is_same_v<T, action::ExitInfrastructure>) return "ExitInfrastructure";
        },
        a);
}

std::vector<StrategyRule> rules_for(StrategyId id, const StrategySettings& settings, double validity) {
    using world::ContextKind;
    switch (id) {
        case StrategyId::UPCS:
            return {{ContextKind::SignalizedIntersection, action::EnterSilence{settings.red_light_duration}, validity}};
        case StrategyId::SocialSpots:
            return {{ContextKind::SignalizedIntersection, action::ChangePseudonym{}, validity}};
        case StrategyId::TAPCS:
            return {{ContextKind::CongestedSegment, action::EnterSilence{tapcs_silence(settings)}, validity}};
        case StrategyId::PRIVANET:
            // -1: whichever infrastructure the vehicle is approaching
            return {{ContextKind::RoadsideInfrastructure, action::EnterInfrastructure{-1}, validity}};
    }
    return {};
}

IngestResult inspector_ingest(LocalStore store, const control::ControlDirective& d, VehicleId self, double now) {
    auto reject = [&](std::string why) { return IngestResult{store, false, std::move(why)}; };
    try {
        validate(d.settings);
    } catch (const std::invalid_argument& e) {
        return reject(e.what());
    }
    for (const auto& r : d.rules) {
        if (!(r.validity > 0.0)) return reject("rule validity must be > 0");
        if (const auto* s = std::get_if<action::EnterSilence>(&r.action); s && !(s->duration >= 0.0)) {
            return reject("rule silence duration must be >= 0");
        }
    }
    for (const auto& l : d.locks) {
        if (l.priority != 0 && l.priority != 1) return reject(fmt::format("lock priority {} not in {{0,1}}", l.priority));
        if (!(l.duration > 0.0)) return reject("lock duration must be > 0");
    }
    for (const auto& i : d.incentives) {
        if (!(i.credits >= 0.0)) return reject("incentive credits must be >= 0");
        if (!(i.cooperative_prob >= 0.0 && i.cooperative_prob <= 1.0)) return reject("cooperative_prob outside [0,1]");
    }
    for (const auto& p : d.pseudonym_policy) {
        try {
            pseudonym::validate(p.policy);
        } catch (const std::invalid_argument& e) {
            return reject(e.what());
        }
    }
    if (!(d.sensitivity_alpha >= 0.0)) return reject("sensitivity_alpha must be >= 0");

    LocalStore next = std::move(store);
    purge_rules(next, now);
    for (const auto& r : d.rules) {
        std::erase_if(next.rules,
                      [&](const StoredRule& s) { return s.rule.context_predicate == r.context_predicate; });
    }
    for (const auto& r : d.rules) next.rules.push_back({r, now + r.validity});
    next.settings[d.selected] = d.settings;
    next.selected = d.selected;
    for (const auto& l : d.locks) {
        if (l.true_id == self) next.lock = pseudonym::apply_lock(next.lock, now, l.duration, l.priority);
    }
    for (const auto& i : d.incentives) {
        if (i.true_id != self) continue;
        next.credits += i.credits;
        next.cooperative_prob = i.cooperative_prob;
    }
    for (const auto& p : d.pseudonym_policy) {
        if (p.true_id == self) next.policy = p.policy;
    }
    return {std::move(next), true, {}};
}

void purge_rules(LocalStore& store, double now) {
    std::erase_if(store.rules, [&](const StoredRule& r) { return r.expires_at <= now; });
}

bool rule_matches(const LocalStore& store, world::ContextKind kind, double now) {
    return std::any_of(store.rules.begin(), store.rules.end(), [&](const StoredRule& r) {
        return r.rule.context_predicate == kind && r.expires_at > now;
    });
}

double tapcs_silence(const StrategySettings& settings) {
    const double cap = settings.lock_enabled ? kSafeSilenceCap : settings.max_silence;
    return std::min(settings.silence_duration, cap);
}

TickResult upcs_tick(const TickInput& in) {
    if (in.state.silent) {
        if (!upcs_release(in)) return hold();
        return close_silence(in, in.group_size >= in.settings.min_group_size);
    }
    const auto* sig = as_intersection(in.context);
    // Wait one beacon so the last CAM before silence shows the vehicle stopped.
    if (sig && sig->light == Light::Red && stopped(in.vehicle) && in.vehicle.stopped_for >= in.beacon_interval - kEps) {
        const double remaining = std::max(in.dt, in.settings.red_light_duration - sig->time_in_phase);
        return {{action::EnterSilence{remaining}}, std::nullopt, false};
    }
    return hold();
}

TickResult socialspots_tick(const TickInput& in) {
    if (!socialspots_trigger(in)) return hold();
    if (!in.cooperative) return {{action::Hold{}}, std::nullopt, true};
    if (in.pool_view) return {{action::Hold{}}, in.pool_view, false};
    return {{action::ChangePseudonym{}}, std::nullopt, false};
}

TickResult tapcs_tick(const TickInput& in) {
    if (in.state.silent) {
        if (!tapcs_silence_over(in)) return hold();
        return close_silence(in, true);
    }
    const auto* zone = std::get_if<world::context::CongestedSegment>(&in.context);
    if (zone == nullptr || in.state.zone_done == zone->zone) return hold();
    if (!(in.vehicle.speed < in.settings.speed_threshold) || in.group_size < in.settings.min_group_size) return hold();
    // No point going silent if the pool would refuse the change at the end.
    if (in.pool_view) return {{action::Hold{}}, in.pool_view, false};
    return {{action::EnterSilence{tapcs_silence(in.settings)}}, std::nullopt, false};
}

TickResult privanet_tick(const TickInput& in) {
    if (const auto& stay = in.vehicle.inside_infrastructure) {
        if (in.now < stay->exit_time - kEps || !in.exit_clear) return hold();
        if (in.pool_view) return {{action::ExitInfrastructure{}}, in.pool_view, false};
        return {{action::ChangePseudonym{}, action::ExitInfrastructure{}}, std::nullopt, false};
    }
    if (!privanet_candidate(in)) return hold();
    if (!in.cooperative) return {{action::Hold{}}, std::nullopt, true};
    if (in.pool_view) return {{action::Hold{}}, in.pool_view, false};
    const auto& ri = std::get<world::context::RoadsideInfrastructure>(in.context);
    return {{action::EnterInfrastructure{ri.id}}, std::nullopt, false};
}

bool at_mix_opportunity(StrategyId id, const TickInput& in) {
    switch (id) {
        case StrategyId::UPCS: return upcs_release(in) && in.group_size >= in.settings.min_group_size;
        case StrategyId::SocialSpots: return socialspots_trigger(in);
        case StrategyId::TAPCS: return tapcs_silence_over(in);
        case StrategyId::PRIVANET: return privanet_candidate(in);
    }
    return false;
}

TickResult engine_dispatch(StrategyId selected, const LocalStore& store, TickInput in) {
    const auto it = store.settings.find(selected);
    if (it == store.settings.end()) throw EngineNotConfigured("no settings stored for " + to_string(selected));
    in.settings = it->second;

    const bool idle = !in.state.silent && !in.vehicle.inside_infrastructure;
    if (idle && !rule_matches(store, world::kind_of(in.context), in.now)) return hold();

    TickResult r;
    switch (selected) {
        case StrategyId::UPCS: r = upcs_tick(in); break;
        case StrategyId::SocialSpots: r = socialspots_tick(in); break;
        case StrategyId::TAPCS: r = tapcs_tick(in); break;
        case StrategyId::PRIVANET: r = privanet_tick(in); break;
    }

    if (!store.lock.locked_at(in.now)) return r;

    const bool wanted_change = contains<action::ChangePseudonym>(r.actions);
    std::erase_if(r.actions, [](const PcsAction& a) {
        return std::holds_alternative<action::EnterSilence>(a) || std::holds_alternative<action::ChangePseudonym>(a) ||
               std::holds_alternative<action::EnterInfrastructure>(a) || std::holds_alternative<action::Hold>(a);
    });
    if (in.state.silent && !contains<action::ExitSilence>(r.actions)) r.actions.push_back(action::ExitSilence{});
    if (r.actions.empty()) r.actions.push_back(action::Hold{});
    if (wanted_change) r.refused = pseudonym::RefusalReason::Locked;
    return r;
}

PcsState advance_state(PcsState state, const ActionList& actions, const world::TopologyContext& ctx, double now,
                       bool selfish) {
    const auto* zone = std::get_if<world::context::CongestedSegment>(&ctx);
    const auto* ri = std::get_if<world::context::RoadsideInfrastructure>(&ctx);

    for (const auto& a : actions) {
        if (const auto* s = std::get_if<action::EnterSilence>(&a)) {
            state.silent = true;
            state.silence_start = now;
            state.silence_duration = s->duration;
            if (zone) state.zone_done = zone->zone;
        } else if (std::holds_alternative<action::ExitSilence>(a)) {
            state.silent = false;
        } else if (const auto* e = std::get_if<action::EnterInfrastructure>(&a)) {
            state.infra_done = e->id;
        }
    }
    if (selfish && ri) state.infra_done = ri->id;

    if (!state.silent && zone == nullptr) state.zone_done.reset();
    if (ri == nullptr) state.infra_done.reset();
    return state;
}

}  // namespace sdlp::strategy
