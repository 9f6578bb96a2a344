#include "doctest.h"
#include "sdlp/protocol.hpp"

using namespace sdlp;
using namespace sdlp::control;

TEST_CASE("directive JSON round-trips") {
    ControlDirective d;
    d.issued_at = 15.0;
    d.selected = strategy::StrategyId::TAPCS;
    d.settings.silence_duration = 1.5;
    d.settings.lock_enabled = true;
    d.rules = strategy::rules_for(d.selected, d.settings, 10.0);
    d.metric = PrivacyMetric::SizeOfAnonymitySet;
    d.locks = {{VehicleId{3}, 255.0, 0}, {VehicleId{9}, 10.0, 1}};
    d.incentives = {{VehicleId{4}, 1.0, 0.7}};
    pseudonym::PseudonymPolicy p;
    p.min_usage_duration = 120.0;
    p.mix_override_allowed = false;
    d.pseudonym_policy = {{VehicleId{5}, p}};
    d.sensitivity_alpha = 0.2;

    const auto j = to_json(d);
    CHECK(j.at("kind") == "ControlDirective");
    CHECK(j.at("metric") == "SizeOfAnonymitySet");
    CHECK(j.at("locks").size() == 2);
    const auto back = directive_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.issued_at == d.issued_at);
    CHECK(back.selected == d.selected);
    CHECK(back.settings == d.settings);
    CHECK(back.rules == d.rules);
    CHECK(back.metric == d.metric);
    REQUIRE(back.locks.size() == 2);
    CHECK(back.locks[1].true_id == VehicleId{9});
    CHECK(back.locks[1].priority == 1);
    REQUIRE(back.incentives.size() == 1);
    CHECK(back.incentives[0].cooperative_prob == 0.7);
    REQUIRE(back.pseudonym_policy.size() == 1);
    CHECK(back.pseudonym_policy[0].policy == p);
    CHECK(back.sensitivity_alpha == 0.2);
}

TEST_CASE("report JSON carries the safety stats and optional feeds") {
    ContextReport r;
    r.time = 5.0;
    r.vehicles = {{VehicleId{0}, world::ContextKind::CongestedSegment, "zone:0", 2.0, 3.5, true},
                  {VehicleId{1}, world::ContextKind::OpenRoad, "open", 14.0, 6.0, false}};
    r.dangerous = {VehicleId{0}};
    r.stale_pairs = 2;
    r.total_pairs = 8;
    CHECK(r.dangerous_fraction() == 0.5);
    auto j = to_json(r);
    CHECK(j.at("kind") == "ContextReport");
    CHECK(j.at("safety_events").at("stale_pairs") == 2);
    CHECK(j.at("observed_linkage_ratio").is_null());
    CHECK_FALSE(j.contains("observed_power"));
    r.observed_linkage_ratio = 0.4;
    r.observed_power = Power::Medium;
    j = to_json(r);
    CHECK(j.at("observed_linkage_ratio") == 0.4);
    CHECK(j.at("observed_power") == "Medium");
}

TEST_CASE("enum names round-trip") {
    for (auto c : {Coverage::Local, Coverage::MidSized, Coverage::Global}) CHECK(coverage_from_string(to_string(c)) == c);
    for (auto c : {Capability::SyntacticOnly, Capability::SyntacticAndSemantic}) {
        CHECK(capability_from_string(to_string(c)) == c);
    }
    for (auto p : {Power::Simple, Power::Medium, Power::Advanced}) CHECK(power_from_string(to_string(p)) == p);
    for (auto m : {PrivacyMetric::SizeOfAnonymitySet, PrivacyMetric::EntropyOfAnonymitySet}) {
        CHECK(metric_from_string(to_string(m)) == m);
        CHECK(metric_from_string(short_name(m)) == m);
    }
    CHECK_THROWS(power_from_string("Huge"));
}
