#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "sdlp/artifacts.hpp"
#include "sdlp/compare.hpp"
#include "sdlp/simulation.hpp"

using namespace sdlp;

namespace {

config::ScenarioConfig short_run(const char* name, double duration = 120.0, std::uint64_t seed = 1) {
    auto c = fixtures::scenario(name);
    c.duration = duration;
    c.seed = seed;
    return c;
}

// Run-level invariants that hold for every strategy and mode.
void check_run_invariants(const config::ScenarioConfig& cfg, const sim::RunResult& r) {
    const auto steps = static_cast<std::size_t>(std::llround(cfg.duration / cfg.world.dt));
    REQUIRE(r.trace.size() == steps * cfg.vehicles);
    CHECK(r.summary.changes == r.changes.size());
    CHECK(r.summary.avg_safety_risk >= 0.0);
    CHECK(r.summary.avg_safety_risk <= 1.0);
    CHECK(r.summary.tracking_success >= 0.0);
    CHECK(r.summary.tracking_success <= 1.0);

    const double cap = std::log2(static_cast<double>(cfg.vehicles));
    std::map<double, std::set<std::uint64_t>> active_at;
    std::map<double, std::size_t> rows_at;
    std::map<std::uint32_t, std::uint64_t> last_pseudonym;
    for (const auto& row : r.trace) {
        CHECK(row.privacy_bits >= 0.0);
        CHECK(row.privacy_bits <= cap + 1e-12);
        // No pseudonym is active on two vehicles at once.
        CHECK(active_at[row.time].insert(row.active_pseudonym.value).second);
        ++rows_at[row.time];
    }
    for (const auto& [t, n] : rows_at) CHECK(n == cfg.vehicles);

    // Without reuse every pseudonym has a single lifetime.
    if (!cfg.policy.reuse_allowed) {
        std::set<std::uint64_t> seen;
        for (const auto& c : r.changes) CHECK(seen.insert(c.new_id.value).second);
    }
    // No change inside a lock span.
    for (const auto& c : r.changes) {
        for (const auto& l : r.locks) {
            if (l.true_id == c.true_id) CHECK_FALSE((c.time >= l.from && c.time < l.until));
        }
    }
    for (const auto& l : r.locks) {
        CHECK(l.until - l.from <= 255.0);
        CHECK((l.priority == 0 || l.priority == 1));
    }
}

}  // namespace

TEST_CASE("scenario runs satisfy the run-level invariants") {
    for (const char* name : {"scenario1.yaml", "scenario2.yaml", "scenario3.yaml", "socialspots.yaml"}) {
        for (bool sdn : {false, true}) {
            CAPTURE(name);
            CAPTURE(sdn);
            auto cfg = short_run(name);
            cfg.sdn = sdn;
            const auto r = sim::run_scenario(cfg);
            check_run_invariants(cfg, r);
            CHECK(r.summary.mode == (sdn ? "sdn" : "static"));
            if (!sdn) CHECK(r.directives.size() == 1);
        }
    }
}

TEST_CASE("SocialSpots never silences and still mixes") {
    const auto cfg = short_run("socialspots.yaml", 300.0);
    const auto r = sim::run_scenario(cfg);
    CHECK(r.silence_steps == 0);
    CHECK(r.summary.changes > 0);
    for (const auto& row : r.trace) CHECK_FALSE(row.in_silence);
}

TEST_CASE("PRIVANET occupancy never exceeds capacity") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto r = sim::run_scenario(short_run("scenario3.yaml", 300.0, seed));
        CHECK(r.max_infrastructure_overflow == 0);
        CHECK(r.summary.changes > 0);
    }
}

TEST_CASE("sdn scenario 1 locks exactly the dangerous vehicles") {
    const auto cfg = short_run("scenario1.yaml", 30.0);
    const auto r = sim::run_scenario(cfg);
    std::set<std::uint32_t> locked;
    for (const auto& l : r.locks) locked.insert(l.true_id.value);
    CHECK(locked.size() == static_cast<std::size_t>(std::llround(cfg.dangerous_fraction * cfg.vehicles)));
    REQUIRE_FALSE(r.directives.empty());
    CHECK(r.directives.front().locks.size() == locked.size());
}

TEST_CASE("protocol recording produces one JSON line per message") {
    auto cfg = short_run("scenario2.yaml", 30.0);
    sim::RunOptions o;
    o.record_protocol = true;
    const auto r = sim::run_scenario(cfg, o);
    // Reports at 0, 5, ..., 25 and one directive answering each.
    CHECK(r.protocol.size() == 12);
    std::size_t reports = 0;
    for (const auto& line : r.protocol) {
        const auto j = nlohmann::json::parse(line);
        reports += j.at("kind") == "ContextReport";
    }
    CHECK(reports == 6);
}

TEST_CASE("artifacts directory is complete and comparable") {
    const auto dir = std::filesystem::temp_directory_path() / "sdlp_unit_artifacts";
    std::filesystem::remove_all(dir);
    auto cfg = short_run("scenario1.yaml", 60.0);
    for (bool sdn : {false, true}) {
        cfg.sdn = sdn;
        io::write_artifacts(dir / cfg.mode_name(), cfg, sim::run_scenario(cfg));
    }
    for (const char* f : {"summary.csv", "trace.csv", "changes.csv", "actions.csv", "mix_events.csv", "locks.csv",
                          "tracks.csv", "config.yaml"}) {
        CAPTURE(f);
        CHECK(std::filesystem::exists(dir / "sdn" / f));
    }
    const auto a = compare::load_run(dir / "static");
    const auto b = compare::load_run(dir / "sdn");
    CHECK(a.summary.mode == "static");
    const auto c = compare::compare_runs(a, b);
    CHECK(c.verdicts.size() == 3);
    CHECK(c.verdicts[0].statement == "sdn safety_risk < static safety_risk");
    std::ostringstream csv;
    compare::write_comparison_csv(csv, c);
    CHECK(csv.str().rfind("metric,a,b,delta\n", 0) == 0);

    auto other = a;
    other.summary.scenario = 2;
    CHECK_THROWS_AS(compare::compare_runs(a, other), std::invalid_argument);
    auto hi = b;
    hi.alpha = 0.3;
    hi.summary.avg_privacy = b.summary.avg_privacy - 0.5;
    const auto alpha_cmp = compare::compare_runs(b, hi);
    REQUIRE(alpha_cmp.verdicts.size() == 1);
    CHECK(alpha_cmp.verdicts[0].holds);
}

TEST_CASE("recorded CAM traces replay to the run's own tracking success") {
    auto cfg = short_run("scenario2.yaml", 120.0);
    cfg.attacker.power_schedule.clear();
    sim::RunOptions o;
    o.keep_cams = true;
    const auto r = sim::run_scenario(cfg, o);
    REQUIRE(r.cam_trace.has_value());
    const auto map = config::build_map(cfg);
    CHECK(sim::replay_tracking_success(map, *r.cam_trace, sim::run_deployment(cfg, *map)) ==
          r.summary.tracking_success);
}
