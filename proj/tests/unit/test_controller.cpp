#include <cmath>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "sdlp/controller.hpp"

using namespace sdlp;
using namespace sdlp::control;
using strategy::StrategyId;
using world::ContextKind;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("sdlp_unit_" + name);
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

ContextReport report_with(std::size_t n, std::size_t dangerous, ContextKind kind = ContextKind::OpenRoad) {
    ContextReport r;
    for (std::uint32_t i = 0; i < n; ++i) {
        r.vehicles.push_back({VehicleId{i}, kind, "", 10.0, 1.0, i < dangerous});
        if (i < dangerous) r.dangerous.push_back(VehicleId{i});
    }
    return r;
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("strategy selection table over the full context x capability x previous product") {
    for (auto ctx : {ContextKind::SignalizedIntersection, ContextKind::CongestedSegment,
                     ContextKind::RoadsideInfrastructure, ContextKind::OpenRoad}) {
        for (auto cap : {Capability::SyntacticOnly, Capability::SyntacticAndSemantic}) {
            for (auto power : {Power::Simple, Power::Medium, Power::Advanced}) {
                for (auto prev : strategy::kAllStrategies) {
                    AttackerModelEstimate a;
                    a.capability = cap;
                    a.power = power;
                    StrategyId expected = prev;
                    if (ctx == ContextKind::SignalizedIntersection) {
                        expected = cap == Capability::SyntacticAndSemantic ? StrategyId::UPCS : StrategyId::SocialSpots;
                    } else if (ctx == ContextKind::CongestedSegment) {
                        expected = StrategyId::TAPCS;
                    } else if (ctx == ContextKind::RoadsideInfrastructure) {
                        expected = StrategyId::PRIVANET;
                    }
                    CHECK(select_strategy(ctx, a, prev) == expected);
                }
            }
        }
    }
}

TEST_CASE("privacy metric by attacker power") {
    CHECK(select_privacy_metric(Power::Simple) == PrivacyMetric::SizeOfAnonymitySet);
    CHECK(select_privacy_metric(Power::Medium) == PrivacyMetric::EntropyOfAnonymitySet);
    CHECK(select_privacy_metric(Power::Advanced) == PrivacyMetric::EntropyOfAnonymitySet);
}

TEST_CASE("dominant context ignores open road") {
    auto r = report_with(10, 0);
    CHECK(dominant_context(r) == ContextKind::OpenRoad);
    r.vehicles[0].context = ContextKind::CongestedSegment;
    r.vehicles[1].context = ContextKind::CongestedSegment;
    r.vehicles[2].context = ContextKind::SignalizedIntersection;
    CHECK(dominant_context(r) == ContextKind::CongestedSegment);
}

TEST_CASE("compute_settings: red duration passthrough, TAPCS silence cap, locks when dangerous") {
    strategy::StrategySettings base;
    base.red_light_duration = 30.0;
    base.silence_duration = 5.0;
    base.max_silence = 5.0;
    base.privacy_threshold = 3.0;
    base.ri_capacity = 4;
    auto r = report_with(10, 0);
    CHECK(compute_settings(StrategyId::UPCS, base, r, {}).red_light_duration == 30.0);
    CHECK_FALSE(compute_settings(StrategyId::UPCS, base, r, {}).lock_enabled);
    r.stale_pairs = 3;
    r.total_pairs = 10;
    const auto t = compute_settings(StrategyId::TAPCS, base, r, {});
    CHECK(t.silence_duration <= 2.0);
    CHECK(strategy::tapcs_silence(t) <= 2.0);
    const auto p = compute_settings(StrategyId::PRIVANET, base, r, {});
    CHECK(p.privacy_threshold == 3.0);
    CHECK(p.ri_capacity == 4);
    CHECK(compute_settings(StrategyId::UPCS, base, report_with(10, 1), {}).lock_enabled);
}

TEST_CASE("privacy update: decay examples exact") {
    auto l = make_ledger(1, 5.0);
    l.cap = 10.0;
    l.level = {5.0};
    CHECK(std::abs(privacy_update(l, {}, 0.1, 10.0, 10.0).level[0] - 4.0) <= 1e-12);
    l.level = {0.5};
    CHECK(privacy_update(l, {}, 0.1, 10.0, 10.0).level[0] == 0.0);
    l.level = {3.0};
    CHECK(privacy_update(l, {}, 0.0, 10.0, 10.0).level[0] == 3.0);
}

TEST_CASE("privacy update: uniform four-way mix gains two bits, capped at log2 N") {
    auto l = make_ledger(16, 0.0);
    CHECK(l.cap == 4.0);
    const std::vector<double> uniform(4, 0.25);
    double h = 0.0;
    for (double p : uniform) h -= p * std::log2(p);
    const std::vector<PrivacyGain> gains{{VehicleId{3}, h}};
    auto next = privacy_update(l, gains, 0.0, 0.5, 7.0);
    CHECK(next.level[3] == doctest::Approx(2.0));
    CHECK(next.last_change[3] == 7.0);
    const std::vector<PrivacyGain> big{{VehicleId{3}, 9.0}};
    CHECK(privacy_update(next, big, 0.0, 0.5, 8.0).level[3] == 4.0);
}

TEST_CASE("property: privacy stays in [0, cap], is monotone in alpha, and never drops at alpha 0") {
    fixtures::Gen g(23);
    for (int run = 0; run < 50; ++run) {
        const std::size_t n = static_cast<std::size_t>(g.integer(2, 60));
        const double a_lo = g.real(0, 0.3);
        const double a_hi = a_lo + g.real(0, 0.3);
        auto lo = make_ledger(n, g.real(0, 8));
        auto hi = lo;
        auto zero = lo;
        for (int step = 0; step < 300; ++step) {
            std::vector<PrivacyGain> gains;
            for (std::size_t v = 0; v < n; ++v) {
                if (g.coin(0.05)) gains.push_back({VehicleId{static_cast<std::uint32_t>(v)}, g.real(0, 4)});
            }
            const auto prev_zero = zero.level;
            lo = privacy_update(lo, gains, a_lo, 0.5, step * 0.5);
            hi = privacy_update(hi, gains, a_hi, 0.5, step * 0.5);
            zero = privacy_update(zero, gains, 0.0, 0.5, step * 0.5);
            for (std::size_t v = 0; v < n; ++v) {
                CHECK(lo.level[v] >= 0.0);
                CHECK(lo.level[v] <= lo.cap);
                CHECK(hi.level[v] <= lo.level[v]);
                CHECK(zero.level[v] >= prev_zero[v]);
            }
        }
    }
}

TEST_CASE("safety monitor: one priority-0 lock per dangerous vehicle, span clamped") {
    auto r = report_with(100, 10);
    const auto locks = safety_monitor(r, 100.0);
    CHECK(locks.size() == 10);
    for (const auto& l : locks) {
        CHECK(l.priority == 0);
        CHECK(l.duration == 100.0);
    }
    CHECK(safety_monitor(report_with(100, 0), 100.0).empty());
    CHECK(safety_monitor(r, 300.0).front().duration == 255.0);
}

TEST_CASE("learning update thresholds") {
    LearningParams p;
    AttackerModelEstimate a;
    a.capability = Capability::SyntacticOnly;
    ContextReport r;
    CHECK(learning_update(a, r, p) == a);
    for (double rho : {0.0, 0.1, 0.29, 0.3, 0.45, 0.59, 0.6, 0.9, 1.0}) {
        r.observed_linkage_ratio = rho;
        const auto u = learning_update(a, r, p);
        const Power expected = rho < 0.3 ? Power::Simple : rho < 0.6 ? Power::Medium : Power::Advanced;
        CHECK(u.power == expected);
        CHECK(u.sensitivity_alpha == doctest::Approx(0.3 * rho));
        CHECK(u.capability == Capability::SyntacticOnly);
    }
    r.bridged_silences = 1;
    CHECK(learning_update(a, r, p).capability == Capability::SyntacticAndSemantic);

    ContextReport disclosed;
    disclosed.observed_power = Power::Advanced;
    disclosed.observed_alpha = 0.2;
    const auto d = attacker_model_update(a, disclosed, p);
    CHECK(d.power == Power::Advanced);
    CHECK(d.sensitivity_alpha == 0.2);
}

TEST_CASE("incentives: none for UPCS/TAPCS, arithmetic for the others, identity at zero credits") {
    const std::vector<VehicleId> selfish{VehicleId{4}};
    const std::map<VehicleId, double> current{{VehicleId{4}, 0.5}};
    IncentiveParams p{1.0, 0.2};
    CHECK(incentive_apply(StrategyId::UPCS, selfish, p, current).empty());
    CHECK(incentive_apply(StrategyId::TAPCS, selfish, p, current).empty());
    const auto s = incentive_apply(StrategyId::SocialSpots, selfish, p, current);
    REQUIRE(s.size() == 1);
    CHECK(s[0].cooperative_prob == doctest::Approx(0.5 + 0.2 * 1.0));
    CHECK(incentive_apply(StrategyId::PRIVANET, selfish, {1.0, 0.9}, current)[0].cooperative_prob == 1.0);
    CHECK(incentive_apply(StrategyId::SocialSpots, selfish, {0.0, 0.2}, current).empty());
}

TEST_CASE("pseudonym rules plan doubles min usage for alerted vehicles only") {
    pseudonym::PseudonymPolicy base;
    base.min_usage_duration = 60.0;
    base.reuse_allowed = false;
    CHECK(pseudonym_rules_plan(base, {}).empty());
    const std::vector<SybilAlert> alerts{{VehicleId{2}, "x"}, {VehicleId{2}, "y"}};
    const auto plan = pseudonym_rules_plan(base, alerts);
    REQUIRE(plan.size() == 1);
    CHECK(plan[0].true_id == VehicleId{2});
    CHECK(plan[0].policy.min_usage_duration == 120.0);
    CHECK_FALSE(plan[0].policy.reuse_allowed);
}

TEST_CASE("Sybil exchange: outbound passthrough, missing file, alerts, malformed lines") {
    const auto dir = fresh_dir("sybil");
    SybilAgent agent(dir);
    const std::vector<ChangeRecord> changes{{1.0, VehicleId{1}, PseudonymId{10}, PseudonymId{11}, "zone:0"},
                                            {2.0, VehicleId{2}, PseudonymId{20}, PseudonymId{21}, "zone:0"},
                                            {3.0, VehicleId{3}, PseudonymId{30}, PseudonymId{31}, "zone:0"}};
    CHECK(agent.exchange(changes).empty());  // no alert file yet
    CHECK(lines_of(agent.outbound_path()).size() == 3);
    CHECK(agent.records_written() == 3);
    const auto first = nlohmann::json::parse(lines_of(agent.outbound_path())[0]);
    CHECK(first.at("old") == 10);
    CHECK(first.at("new") == 11);
    CHECK_FALSE(first.contains("true_id"));

    {
        std::ofstream a(agent.alerts_path());
        a << R"({"pseudonym": 21, "reason": "parallel use"})" << '\n';
        a << "not json\n";
    }
    const auto alerts = agent.exchange({});
    REQUIRE(alerts.size() == 1);
    CHECK(alerts[0].true_id == VehicleId{2});
    CHECK(alerts[0].reason == "parallel use");
    // Already consumed lines are not reported twice.
    CHECK(agent.exchange({}).empty());
    {
        std::ofstream a(agent.alerts_path(), std::ios::app);
        a << R"({"true_id": 7})" << '\n';
    }
    const auto more = agent.exchange({});
    REQUIRE(more.size() == 1);
    CHECK(more[0].true_id == VehicleId{7});
}

TEST_CASE("static controller issues exactly one directive") {
    ControllerConfig c;
    c.sdn = false;
    c.strategy = StrategyId::PRIVANET;
    c.alpha = 0.3;
    SdlpController ctl(c);
    const auto d = ctl.start(report_with(10, 2));
    CHECK(d.selected == StrategyId::PRIVANET);
    CHECK(d.locks.empty());
    CHECK(d.sensitivity_alpha == 0.3);
    for (int k = 1; k < 20; ++k) {
        auto r = report_with(10, 2, ContextKind::CongestedSegment);
        r.time = 5.0 * k;
        CHECK_FALSE(ctl.on_report(r).has_value());
    }
    CHECK(ctl.directives_issued() == 1);
    CHECK_THROWS(ctl.start(report_with(10, 2)));
}

TEST_CASE("sdn controller locks dangerous vehicles and switches metric with disclosed power") {
    ControllerConfig c;
    c.sdn = true;
    c.strategy = StrategyId::TAPCS;
    c.lock_span = 300.0;
    SdlpController ctl(c);
    auto r0 = report_with(100, 10, ContextKind::CongestedSegment);
    r0.observed_power = Power::Simple;
    const auto d0 = ctl.start(r0);
    CHECK(d0.locks.size() == 10);
    for (const auto& l : d0.locks) {
        CHECK(l.duration <= 255.0);
        CHECK((l.priority == 0 || l.priority == 1));
    }
    CHECK(d0.metric == PrivacyMetric::SizeOfAnonymitySet);
    for (auto p : {Power::Simple, Power::Medium, Power::Medium, Power::Advanced, Power::Advanced}) {
        auto r = r0;
        r.observed_power = p;
        (void)ctl.on_report(r);
    }
    CHECK(ctl.metric_summary() == "Size;Entropy;Entropy");
    CHECK(ctl.directives_issued() == 6);
}
