#include "doctest.h"
#include "fixtures.hpp"
#include "sdlp/protocol.hpp"
#include "sdlp/strategy_plane.hpp"

using namespace sdlp;
using namespace sdlp::strategy;
using world::Light;
namespace ctx = sdlp::world::context;

namespace {

control::ControlDirective directive_for(StrategyId id, StrategySettings s = {}, double validity = 10.0) {
    control::ControlDirective d;
    d.selected = id;
    d.settings = s;
    d.rules = rules_for(id, s, validity);
    return d;
}

LocalStore store_for(StrategyId id, StrategySettings s = {}) {
    auto r = inspector_ingest({}, directive_for(id, s, 1e9), VehicleId{0}, 0.0);
    REQUIRE(r.accepted);
    return r.store;
}

TickInput input(world::TopologyContext c, double speed = 0.0) {
    TickInput in;
    in.vehicle = fixtures::vehicle(0, 100.0, speed, 14.0);
    in.vehicle.stopped_for = speed == 0.0 ? 5.0 : 0.0;
    in.context = c;
    in.group_size = 5;
    return in;
}

bool is(const ActionList& a, const ActionList& b) { return a == b; }

}  // namespace

TEST_CASE("inspector stores settings and overrides per key") {
    StrategySettings s;
    s.speed_threshold = 5.0;
    auto r1 = inspector_ingest({}, directive_for(StrategyId::TAPCS, s), VehicleId{0}, 0.0);
    REQUIRE(r1.accepted);
    CHECK(r1.store.settings.at(StrategyId::TAPCS).speed_threshold == 5.0);

    s.silence_duration = 2.0;
    auto r2 = inspector_ingest(r1.store, directive_for(StrategyId::TAPCS, s), VehicleId{0}, 1.0);
    s.silence_duration = 1.0;
    auto r3 = inspector_ingest(r2.store, directive_for(StrategyId::TAPCS, s), VehicleId{0}, 2.0);
    CHECK(r3.store.settings.at(StrategyId::TAPCS).silence_duration == 1.0);
    // One stored rule per context predicate after repeated directives.
    CHECK(r3.store.rules.size() == 1);
    CHECK(r3.store.rules[0].expires_at == doctest::Approx(12.0));
}

TEST_CASE("inspector rejects malformed directives and keeps the store") {
    auto store = store_for(StrategyId::TAPCS);
    const auto before_rules = store.rules.size();

    auto bad = directive_for(StrategyId::TAPCS);
    bad.settings.silence_duration = -1.0;
    auto r = inspector_ingest(store, bad, VehicleId{0}, 1.0);
    CHECK_FALSE(r.accepted);
    CHECK(r.store.settings.at(StrategyId::TAPCS) == store.settings.at(StrategyId::TAPCS));
    CHECK(r.store.rules.size() == before_rules);

    auto bad_rule = directive_for(StrategyId::UPCS);
    bad_rule.rules[0].action = action::EnterSilence{-3.0};
    CHECK_FALSE(inspector_ingest(store, bad_rule, VehicleId{0}, 1.0).accepted);

    auto bad_lock = directive_for(StrategyId::UPCS);
    bad_lock.locks.push_back({VehicleId{0}, 10.0, 2});
    auto rl = inspector_ingest(store, bad_lock, VehicleId{0}, 1.0);
    CHECK_FALSE(rl.accepted);
    CHECK_FALSE(rl.store.selected == StrategyId::UPCS);
}

TEST_CASE("inspector applies only the locks, incentives and policy addressed to self") {
    auto d = directive_for(StrategyId::SocialSpots);
    d.locks.push_back({VehicleId{1}, 300.0, 0});
    d.incentives.push_back({VehicleId{1}, 1.0, 0.7});
    pseudonym::PseudonymPolicy p;
    p.min_usage_duration = 120.0;
    d.pseudonym_policy.push_back({VehicleId{1}, p});
    auto mine = inspector_ingest({}, d, VehicleId{1}, 10.0).store;
    auto other = inspector_ingest({}, d, VehicleId{2}, 10.0).store;
    CHECK(mine.lock.locked_until == 265.0);
    CHECK(mine.cooperative_prob == 0.7);
    CHECK(mine.credits == 1.0);
    CHECK(mine.policy->min_usage_duration == 120.0);
    CHECK_FALSE(other.lock.locked_until.has_value());
    CHECK_FALSE(other.cooperative_prob.has_value());
    CHECK_FALSE(other.policy.has_value());
}

TEST_CASE("expired rules are purged and stop gating the engine") {
    auto store = inspector_ingest({}, directive_for(StrategyId::UPCS, {}, 10.0), VehicleId{0}, 0.0).store;
    CHECK(rule_matches(store, world::ContextKind::SignalizedIntersection, 5.0));
    CHECK_FALSE(rule_matches(store, world::ContextKind::SignalizedIntersection, 10.0));
    purge_rules(store, 11.0);
    CHECK(store.rules.empty());
    auto in = input(ctx::SignalizedIntersection{1, Light::Red, 5.0});
    in.now = 11.0;
    CHECK(is(engine_dispatch(StrategyId::UPCS, store, in).actions, {action::Hold{}}));
}

TEST_CASE("UPCS: silence at red, change then exit at green, hold on open road") {
    StrategySettings s;
    s.red_light_duration = 30.0;
    auto in = input(ctx::SignalizedIntersection{1, Light::Red, 10.0});
    auto r = upcs_tick(in);
    REQUIRE(r.actions.size() == 1);
    CHECK(std::get<action::EnterSilence>(r.actions[0]).duration == doctest::Approx(20.0));

    CHECK(is(upcs_tick(input(ctx::OpenRoad{}, 14.0)).actions, {action::Hold{}}));
    CHECK(is(upcs_tick(input(ctx::SignalizedIntersection{1, Light::Green, 3.0}, 14.0)).actions, {action::Hold{}}));

    auto green = input(ctx::SignalizedIntersection{1, Light::Green, 0.0});
    green.state.silent = true;
    CHECK(is(upcs_tick(green).actions, {action::ChangePseudonym{}, action::ExitSilence{}}));
    green.group_size = 2;
    CHECK(is(upcs_tick(green).actions, {action::ExitSilence{}}));

    // Locked at the Red->Green transition: no change.
    auto store = store_for(StrategyId::UPCS);
    store.lock = pseudonym::apply_lock({}, 0.0, 100.0, 0);
    green.group_size = 5;
    green.now = 30.0;
    const auto locked = engine_dispatch(StrategyId::UPCS, store, green);
    CHECK_FALSE(contains<action::ChangePseudonym>(locked.actions));
    CHECK(locked.refused == pseudonym::RefusalReason::Locked);
}

TEST_CASE("SocialSpots: simultaneous change at green onset, never silence") {
    auto onset = input(ctx::SignalizedIntersection{1, Light::Green, 0.0});
    int changes = 0;
    for (int v = 0; v < 4; ++v) changes += contains<action::ChangePseudonym>(socialspots_tick(onset).actions);
    CHECK(changes == 4);

    auto selfish = onset;
    selfish.cooperative = false;
    auto r = socialspots_tick(selfish);
    CHECK(is(r.actions, {action::Hold{}}));
    CHECK(r.selfish);

    CHECK(is(socialspots_tick(input(ctx::SignalizedIntersection{1, Light::Green, 0.0}, 10.0)).actions,
             {action::Hold{}}));
    CHECK(is(socialspots_tick(input(ctx::SignalizedIntersection{1, Light::Red, 3.0})).actions, {action::Hold{}}));
}

TEST_CASE("TAPCS five-step fixture: slow -> silence -> change + exit") {
    // dt 0.5, silence 2 s. Hand trace:
    //  t=0.0 slow in zone        -> EnterSilence(2)
    //  t=0.5, 1.0, 1.5 silent    -> Hold
    //  t=2.0 elapsed 2 >= 2      -> ChangePseudonym, ExitSilence
    StrategySettings s;
    s.silence_duration = 2.0;
    s.speed_threshold = 5.0;
    auto store = store_for(StrategyId::TAPCS, s);
    PcsState state;
    const world::TopologyContext zone = ctx::CongestedSegment{0};
    const std::vector<ActionList> expected = {{action::EnterSilence{2.0}},
                                              {action::Hold{}},
                                              {action::Hold{}},
                                              {action::Hold{}},
                                              {action::ChangePseudonym{}, action::ExitSilence{}}};
    for (int k = 0; k < 5; ++k) {
        auto in = input(zone, 2.0);
        in.now = 0.5 * k;
        in.state = state;
        const auto r = engine_dispatch(StrategyId::TAPCS, store, in);
        CHECK(r.actions == expected[k]);
        state = advance_state(state, r.actions, zone, in.now, r.selfish);
    }
    CHECK_FALSE(state.silent);
    // Same zone visit: no second silence.
    auto again = input(zone, 2.0);
    again.now = 2.5;
    again.state = state;
    CHECK(is(engine_dispatch(StrategyId::TAPCS, store, again).actions, {action::Hold{}}));

    auto fast = input(zone, 10.0);
    CHECK(is(tapcs_tick(fast).actions, {action::Hold{}}));
}

TEST_CASE("TAPCS silence is capped at 2 s unless the cap was lifted without locks") {
    StrategySettings s;
    s.silence_duration = 5.0;
    s.max_silence = 2.0;
    CHECK(tapcs_silence(s) == 2.0);
    s.max_silence = 5.0;
    CHECK(tapcs_silence(s) == 5.0);
    s.lock_enabled = true;
    CHECK(tapcs_silence(s) == 2.0);
}

TEST_CASE("PRIVANET: enter below threshold, hold when full or private enough, change on exit") {
    StrategySettings s;
    s.privacy_threshold = 3.0;
    auto in = input(ctx::RoadsideInfrastructure{4, 1}, 3.0);
    in.settings = s;
    in.privacy_level = 1.0;
    CHECK(is(privanet_tick(in).actions, {action::EnterInfrastructure{4}}));
    in.privacy_level = 5.0;
    CHECK(is(privanet_tick(in).actions, {action::Hold{}}));
    in.privacy_level = 1.0;
    in.context = ctx::RoadsideInfrastructure{4, 0};
    CHECK(is(privanet_tick(in).actions, {action::Hold{}}));

    auto inside = input(ctx::RoadsideInfrastructure{4, 0});
    inside.vehicle.inside_infrastructure = world::InfrastructureStay{4, 20.0};
    inside.now = 19.5;
    CHECK(is(privanet_tick(inside).actions, {action::Hold{}}));
    inside.now = 20.0;
    CHECK(is(privanet_tick(inside).actions, {action::ChangePseudonym{}, action::ExitInfrastructure{}}));
    inside.exit_clear = false;
    CHECK(is(privanet_tick(inside).actions, {action::Hold{}}));
}

TEST_CASE("engine dispatch: delegation, lock override, missing settings") {
    auto store = store_for(StrategyId::UPCS);
    auto red = input(ctx::SignalizedIntersection{1, Light::Red, 10.0});
    red.now = 10.0;
    CHECK(engine_dispatch(StrategyId::UPCS, store, red).actions == upcs_tick(red).actions);

    store.lock = pseudonym::apply_lock({}, 0.0, 100.0, 0);
    CHECK(is(engine_dispatch(StrategyId::UPCS, store, red).actions, {action::Hold{}}));
    auto silent = red;
    silent.state.silent = true;
    CHECK(is(engine_dispatch(StrategyId::UPCS, store, silent).actions, {action::ExitSilence{}}));

    CHECK_THROWS_AS(engine_dispatch(StrategyId::TAPCS, store, red), EngineNotConfigured);
}

TEST_CASE("rules per strategy name their context") {
    StrategySettings s;
    CHECK(rules_for(StrategyId::UPCS, s, 1)[0].context_predicate == world::ContextKind::SignalizedIntersection);
    CHECK(rules_for(StrategyId::SocialSpots, s, 1)[0].context_predicate ==
          world::ContextKind::SignalizedIntersection);
    CHECK(rules_for(StrategyId::TAPCS, s, 1)[0].context_predicate == world::ContextKind::CongestedSegment);
    CHECK(rules_for(StrategyId::PRIVANET, s, 1)[0].context_predicate == world::ContextKind::RoadsideInfrastructure);
    for (auto id : kAllStrategies) CHECK(strategy_from_string(to_string(id)) == id);
    CHECK_THROWS_AS(strategy_from_string("SAE"), std::invalid_argument);
}

TEST_CASE("property: lock override never lets a change or silence start through") {
    fixtures::Gen g(17);
    for (int k = 0; k < 2000; ++k) {
        const auto id = kAllStrategies[g.integer(0, 3)];
        auto store = store_for(id);
        store.lock = pseudonym::apply_lock({}, 0.0, 100.0, g.integer(0, 1));
        world::TopologyContext c;
        switch (g.integer(0, 3)) {
            case 0: c = ctx::SignalizedIntersection{1, g.coin() ? Light::Red : Light::Green, g.real(0, 1)}; break;
            case 1: c = ctx::CongestedSegment{0}; break;
            case 2: c = ctx::RoadsideInfrastructure{1, g.integer(0, 3)}; break;
            default: c = ctx::OpenRoad{};
        }
        auto in = input(c, g.coin() ? 0.0 : g.real(0, 14));
        in.now = g.real(0, 99);
        in.state.silent = g.coin(0.3);
        in.state.silence_duration = 2.0;
        in.cooperative = g.coin(0.8);
        in.privacy_level = g.real(0, 6);
        in.group_size = g.integer(0, 8);
        const auto r = engine_dispatch(id, store, in);
        CHECK_FALSE(contains<action::ChangePseudonym>(r.actions));
        CHECK_FALSE(contains<action::EnterSilence>(r.actions));
        CHECK_FALSE(contains<action::EnterInfrastructure>(r.actions));
        if (in.state.silent) CHECK(contains<action::ExitSilence>(r.actions));
    }
}
