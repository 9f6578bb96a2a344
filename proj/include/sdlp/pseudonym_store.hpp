#pragma once

// Per-vehicle pseudonym pools with lock, minimum-usage and reuse rules.

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdlp/ids.hpp"

namespace sdlp::pseudonym {

inline constexpr double kMaxLockSpan = 255.0;

struct Pseudonym {
    PseudonymId id;
    double issued_at = 0.0;
    std::optional<double> first_used;
    std::optional<double> last_used;
    int use_count = 0;
};

struct PseudonymPolicy {
    double min_usage_duration = 60.0;
    int max_parallel = 1;
    bool reuse_allowed = false;
    int pool_size = 20;
    // Strategy mix events may ignore min_usage_duration. Cleared for vehicles
    // whose policy was tightened after a misbehaviour alert.
    bool mix_override_allowed = true;

    bool operator==(const PseudonymPolicy&) const = default;
};

void validate(const PseudonymPolicy& policy);

struct PseudonymPool {
    VehicleId owner;
    std::deque<Pseudonym> available;
    Pseudonym active;
    std::vector<Pseudonym> retired;
    PseudonymPolicy policy;
};

struct LockState {
    std::optional<double> locked_until;
    int priority = 0;

    bool locked_at(double now) const { return locked_until && now < *locked_until; }
};

enum class RefusalReason { Locked, TooSoon, Exhausted };

std::string to_string(RefusalReason reason);

// Empty when a change is allowed.
using ChangeVerdict = std::optional<RefusalReason>;

class ChangeRefused : public std::runtime_error {
public:
    explicit ChangeRefused(RefusalReason reason);
    RefusalReason reason() const { return reason_; }

private:
    RefusalReason reason_;
};

class InvalidPriority : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Issues opaque ids from a single counter shared by all pools of a run.
class PseudonymIssuer {
public:
    explicit PseudonymIssuer(std::uint64_t first = 1) : next_(first) {}
    PseudonymId next() { return PseudonymId{next_++}; }

private:
    std::uint64_t next_;
};

// Fills a pool with policy.pool_size fresh pseudonyms and activates the first at `now`.
PseudonymPool make_pool(VehicleId owner, const PseudonymPolicy& policy, PseudonymIssuer& issuer, double now);

// `mix_override` drops the minimum-usage check for strategy-sanctioned mix
// events, when the pool policy permits it.
ChangeVerdict can_change(const PseudonymPool& pool, const LockState& lock, double now, bool mix_override = false);

struct ChangeResult {
    PseudonymPool pool;
    PseudonymId new_id;
};

ChangeResult change_pseudonym(PseudonymPool pool, const LockState& lock, double now, bool mix_override = false);

LockState apply_lock(LockState lock, double now, double duration, int priority);

}  // namespace sdlp::pseudonym
