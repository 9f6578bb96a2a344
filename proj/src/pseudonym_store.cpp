#include "sdlp/pseudonym_store.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace sdlp::pseudonym {

std::string to_string(RefusalReason reason) {
    switch (reason) {
        case RefusalReason::Locked: return "Locked";
        case RefusalReason::TooSoon: return "TooSoon";
        case RefusalReason::Exhausted: return "Exhausted";
    }
    return "Unknown";
}

ChangeRefused::ChangeRefused(RefusalReason reason)
    : std::runtime_error("pseudonym change refused: " + to_string(reason)), reason_(reason) {}

void validate(const PseudonymPolicy& policy) {
    if (policy.min_usage_duration < 0.0) throw std::invalid_argument("min_usage_duration must be >= 0");
    if (policy.max_parallel < 1) throw std::invalid_argument("max_parallel must be >= 1");
    if (policy.pool_size < 1) throw std::invalid_argument("pool_size must be >= 1");
}

PseudonymPool make_pool(VehicleId owner, const PseudonymPolicy& policy, PseudonymIssuer& issuer, double now) {
    validate(policy);
    PseudonymPool pool;
    pool.owner = owner;
    pool.policy = policy;
    pool.active = Pseudonym{issuer.next(), now, now, std::nullopt, 1};
    for (int i = 1; i < policy.pool_size; ++i) pool.available.push_back(Pseudonym{issuer.next(), now, {}, {}, 0});
    return pool;
}

ChangeVerdict can_change(const PseudonymPool& pool, const LockState& lock, double now, bool mix_override) {
    if (lock.locked_at(now)) return RefusalReason::Locked;
    const bool skip_usage = mix_override && pool.policy.mix_override_allowed;
    if (!skip_usage && pool.active.first_used && now - *pool.active.first_used < pool.policy.min_usage_duration) {
        return RefusalReason::TooSoon;
    }
    if (pool.available.empty() && (!pool.policy.reuse_allowed || pool.retired.empty())) {
        return RefusalReason::Exhausted;
    }
    return std::nullopt;
}

ChangeResult change_pseudonym(PseudonymPool pool, const LockState& lock, double now, bool mix_override) {
    if (auto refusal = can_change(pool, lock, now, mix_override)) throw ChangeRefused(*refusal);

    Pseudonym next;
    if (!pool.available.empty()) {
        next = pool.available.front();
        pool.available.pop_front();
    } else {
        next = pool.retired.front();
        pool.retired.erase(pool.retired.begin());
    }
    next.first_used = now;
    next.last_used.reset();
    ++next.use_count;

    Pseudonym old = pool.active;
    old.last_used = now;
    pool.retired.push_back(old);
    pool.active = next;
    return {std::move(pool), next.id};
}

LockState apply_lock(LockState lock, double now, double duration, int priority) {
    if (priority != 0 && priority != 1) throw InvalidPriority(fmt::format("lock priority {} not in {{0,1}}", priority));
    if (!(duration > 0.0)) throw std::invalid_argument("lock duration must be positive");
    lock.locked_until = now + std::min(duration, kMaxLockSpan);
    lock.priority = priority;
    return lock;
}

}  // namespace sdlp::pseudonym
