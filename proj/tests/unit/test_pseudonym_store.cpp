#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "sdlp/pseudonym_store.hpp"

using namespace sdlp;
using namespace sdlp::pseudonym;

namespace {

PseudonymPool pool_of(int size, double min_usage = 0.0, bool reuse = false) {
    PseudonymIssuer issuer;
    PseudonymPolicy p;
    p.pool_size = size;
    p.min_usage_duration = min_usage;
    p.reuse_allowed = reuse;
    return make_pool(VehicleId{0}, p, issuer, 0.0);
}

}  // namespace

TEST_CASE("can_change reports Locked, TooSoon and Exhausted") {
    auto pool = pool_of(3, 5.0);
    LockState lock;
    lock.locked_until = 20.0;
    CHECK(can_change(pool, lock, 10.0) == RefusalReason::Locked);

    // active first_used at 0, now 1, min usage 5
    CHECK(can_change(pool, {}, 1.0) == RefusalReason::TooSoon);
    CHECK(can_change(pool, {}, 1.0, true) == std::nullopt);
    pool.policy.mix_override_allowed = false;
    CHECK(can_change(pool, {}, 1.0, true) == RefusalReason::TooSoon);

    auto single = pool_of(1);
    CHECK(can_change(single, {}, 100.0) == RefusalReason::Exhausted);
}

TEST_CASE("change takes the next available pseudonym in order") {
    auto pool = pool_of(3);
    const auto p1 = pool.active.id;
    const auto p2 = pool.available[0].id;
    auto r = change_pseudonym(pool, {}, 7.0);
    CHECK(r.new_id == p2);
    CHECK(r.pool.active.id == p2);
    REQUIRE(r.pool.retired.size() == 1);
    CHECK(r.pool.retired[0].id == p1);
    CHECK(r.pool.retired[0].last_used == 7.0);
    CHECK(r.pool.active.first_used == 7.0);
}

TEST_CASE("reuse recycles the oldest retired pseudonym and counts the use") {
    auto pool = pool_of(2, 0.0, true);
    const auto p1 = pool.active.id;
    pool = change_pseudonym(pool, {}, 1.0).pool;  // available now empty, retired [P1]
    REQUIRE(pool.available.empty());
    CHECK(can_change(pool, {}, 2.0) == std::nullopt);
    auto r = change_pseudonym(pool, {}, 2.0);
    CHECK(r.new_id == p1);
    CHECK(r.pool.active.use_count == 2);
}

TEST_CASE("locked change is refused with the reason") {
    auto pool = pool_of(3);
    const auto lock = apply_lock({}, 0.0, 100.0, 0);
    try {
        (void)change_pseudonym(pool, lock, 50.0);
        FAIL("expected ChangeRefused");
    } catch (const ChangeRefused& e) {
        CHECK(e.reason() == RefusalReason::Locked);
    }
}

TEST_CASE("apply_lock clamps to 255 s and validates the priority") {
    CHECK(apply_lock({}, 10.0, 100.0, 0).locked_until == 110.0);
    CHECK(apply_lock({}, 10.0, 300.0, 1).locked_until == 265.0);
    CHECK_THROWS_AS(apply_lock({}, 10.0, 100.0, 2), InvalidPriority);
    CHECK_THROWS_AS(apply_lock({}, 10.0, 0.0, 0), std::invalid_argument);
}

TEST_CASE("property: without reuse every id has one lifetime and pools never share ids") {
    fixtures::Gen g(5);
    PseudonymIssuer issuer;
    PseudonymPolicy policy;
    policy.pool_size = 12;
    policy.min_usage_duration = 3.0;
    std::vector<PseudonymPool> pools;
    std::vector<LockState> locks(8);
    for (std::uint32_t v = 0; v < 8; ++v) pools.push_back(make_pool(VehicleId{v}, policy, issuer, 0.0));
    std::set<std::uint64_t> used;
    for (const auto& p : pools) used.insert(p.active.id.value);
    std::vector<double> last_change(8, 0.0);
    for (double t = 0.5; t < 200.0; t += 0.5) {
        for (std::size_t v = 0; v < pools.size(); ++v) {
            if (g.coin(0.02)) locks[v] = apply_lock(locks[v], t, g.real(1, 30), g.integer(0, 1));
            if (!g.coin(0.3)) continue;
            const auto before = pools[v].active.id;
            if (can_change(pools[v], locks[v], t)) {
                CHECK_THROWS_AS(change_pseudonym(pools[v], locks[v], t), ChangeRefused);
                CHECK(pools[v].active.id == before);
                continue;
            }
            CHECK(t - last_change[v] >= policy.min_usage_duration);
            last_change[v] = t;
            auto r = change_pseudonym(pools[v], locks[v], t);
            CHECK(used.insert(r.new_id.value).second);
            pools[v] = r.pool;
        }
    }
}
