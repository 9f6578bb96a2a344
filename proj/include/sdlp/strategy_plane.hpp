#pragma once

/**
 * Data-plane strategy execution.
 *
 * The Strategy Inspector copies controller directives into the vehicle's
 * local rule and settings stores; the Strategy Engine reads only those stores
 * and runs the selected pseudonym-changing strategy once per step. Each
 * strategy is a small per-vehicle state machine returning the actions for the
 * current step.
 */

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sdlp/ids.hpp"
#include "sdlp/pseudonym_store.hpp"
#include "sdlp/road_world.hpp"

namespace sdlp::control {
struct ControlDirective;
}

namespace sdlp::strategy {

enum class StrategyId { UPCS, SocialSpots, TAPCS, PRIVANET };

inline constexpr StrategyId kAllStrategies[] = {StrategyId::UPCS, StrategyId::SocialSpots, StrategyId::TAPCS,
                                                StrategyId::PRIVANET};

std::string to_string(StrategyId id);
StrategyId strategy_from_string(const std::string& name);

// Silence cap applied to TAPCS when the controller has not lifted it.
inline constexpr double kSafeSilenceCap = 2.0;

struct StrategySettings {
    double silence_duration = 2.0;
    double max_silence = kSafeSilenceCap;
    double red_light_duration = 30.0;
    double speed_threshold = 5.0;
    int min_group_size = 3;
    int ri_capacity = 4;
    double privacy_threshold = 3.0;
    bool lock_enabled = false;

    bool operator==(const StrategySettings&) const = default;
};

// Throws std::invalid_argument on a violated invariant.
void validate(const StrategySettings& settings);

namespace action {
struct EnterSilence {
    double duration = 0.0;
    bool operator==(const EnterSilence&) const = default;
};
struct ExitSilence {
    bool operator==(const ExitSilence&) const = default;
};
struct ChangePseudonym {
    bool operator==(const ChangePseudonym&) const = default;
};
struct Hold {
    bool operator==(const Hold&) const = default;
};
struct EnterInfrastructure {
    int id = 0;
    bool operator==(const EnterInfrastructure&) const = default;
};
struct ExitInfrastructure {
    bool operator==(const ExitInfrastructure&) const = default;
};
}  // namespace action

using PcsAction = std::variant<action::EnterSilence, action::ExitSilence, action::ChangePseudonym, action::Hold,
                               action::EnterInfrastructure, action::ExitInfrastructure>;
using ActionList = std::vector<PcsAction>;

std::string to_string(const PcsAction& a);

template <typename A>
bool contains(const ActionList& actions) {
    for (const auto& a : actions) {
        if (std::holds_alternative<A>(a)) return true;
    }
    return false;
}

struct StrategyRule {
    world::ContextKind context_predicate = world::ContextKind::OpenRoad;
    PcsAction action = action::Hold{};
    double validity = 0.0;  // s

    bool operator==(const StrategyRule&) const = default;
};

// Rules a controller installs for a strategy: where it may act and what it starts with.
std::vector<StrategyRule> rules_for(StrategyId id, const StrategySettings& settings, double validity);

struct StoredRule {
    StrategyRule rule;
    double expires_at = 0.0;
};

struct LocalStore {
    std::vector<StoredRule> rules;
    std::map<StrategyId, StrategySettings> settings;
    std::optional<StrategyId> selected;
    pseudonym::LockState lock;
    std::optional<pseudonym::PseudonymPolicy> policy;
    double credits = 0.0;
    std::optional<double> cooperative_prob;  // set by incentive directives
};

struct IngestResult {
    LocalStore store;
    bool accepted = true;
    std::string error;
};

// Writes the directive's rules and settings into the store; per-vehicle parts
// (locks, incentives, policy) are applied only when addressed to `self`.
// A malformed directive leaves the store unchanged.
IngestResult inspector_ingest(LocalStore store, const control::ControlDirective& directive, VehicleId self,
                              double now);

// Drops expired rules.
void purge_rules(LocalStore& store, double now);
bool rule_matches(const LocalStore& store, world::ContextKind kind, double now);

// Per-vehicle progress of a strategy across steps.
struct PcsState {
    bool silent = false;
    double silence_start = 0.0;
    double silence_duration = 0.0;
    std::optional<int> zone_done;     // congestion zone already used for a change
    std::optional<int> infra_done;    // infrastructure visited or declined on this pass

    bool operator==(const PcsState&) const = default;
};

struct TickInput {
    world::VehicleState vehicle;
    world::TopologyContext context = world::context::OpenRoad{};
    StrategySettings settings;
    pseudonym::ChangeVerdict pool_view;  // can_change at now, mix override applied
    PcsState state;
    double now = 0.0;
    double dt = 0.5;
    double beacon_interval = 0.5;
    // UPCS: silent vehicles at the intersection; SocialSpots: stopped vehicles
    // at the intersection; TAPCS: other slow vehicles in the zone.
    int group_size = 0;
    bool cooperative = true;
    double privacy_level = 0.0;
    bool exit_clear = true;
};

struct TickResult {
    ActionList actions;
    std::optional<pseudonym::RefusalReason> refused;
    bool selfish = false;
};

TickResult upcs_tick(const TickInput& in);
TickResult socialspots_tick(const TickInput& in);
TickResult tapcs_tick(const TickInput& in);
TickResult privanet_tick(const TickInput& in);

// Silence span TAPCS actually applies under the settings' cap.
double tapcs_silence(const StrategySettings& settings);

// True when the strategy will consult the vehicle's cooperation draw this step.
bool at_mix_opportunity(StrategyId id, const TickInput& in);

class EngineNotConfigured : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Runs the selected strategy from the local stores, then applies the lock
// override: a locked vehicle neither starts silence, changes pseudonym nor
// enters an infrastructure, and an ongoing silence is ended.
TickResult engine_dispatch(StrategyId selected, const LocalStore& store, TickInput in);

// State transition implied by a step's actions.
PcsState advance_state(PcsState state, const ActionList& actions, const world::TopologyContext& ctx,
                       double now, bool selfish);

}  // namespace sdlp::strategy
