#pragma once

// Messages exchanged between the data plane and the SDLP controller, plus
// their line-delimited JSON encoding used by --record-protocol.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sdlp/ids.hpp"
#include "sdlp/pseudonym_store.hpp"
#include "sdlp/road_world.hpp"
#include "sdlp/strategy_plane.hpp"

namespace sdlp::control {

enum class Coverage { Local, MidSized, Global };
enum class Capability { SyntacticOnly, SyntacticAndSemantic };
enum class Power { Simple, Medium, Advanced };
enum class PrivacyMetric { SizeOfAnonymitySet, EntropyOfAnonymitySet };

std::string to_string(Coverage c);
std::string to_string(Capability c);
std::string to_string(Power p);
std::string to_string(PrivacyMetric m);
// Short name used in summaries: "Size" or "Entropy".
std::string short_name(PrivacyMetric m);

Coverage coverage_from_string(const std::string& s);
Capability capability_from_string(const std::string& s);
Power power_from_string(const std::string& s);
PrivacyMetric metric_from_string(const std::string& s);

struct AttackerModelEstimate {
    Coverage coverage = Coverage::Global;
    Capability capability = Capability::SyntacticAndSemantic;
    Power power = Power::Simple;
    double sensitivity_alpha = 0.3;  // bits/s

    bool operator==(const AttackerModelEstimate&) const = default;
};

struct VehicleReport {
    VehicleId true_id;
    world::ContextKind context = world::ContextKind::OpenRoad;
    std::string location;
    double speed = 0.0;
    double privacy = 0.0;
    bool dangerous = false;
};

struct ChangeRecord {
    double time = 0.0;
    VehicleId true_id;
    PseudonymId old_id;
    PseudonymId new_id;
    std::string context;
};

struct ContextReport {
    double time = 0.0;
    std::vector<VehicleReport> vehicles;
    std::vector<VehicleId> dangerous;
    std::size_t stale_pairs = 0;  // accumulated over the reporting epoch
    std::size_t total_pairs = 0;
    std::vector<VehicleId> selfish;
    std::optional<double> observed_linkage_ratio;
    int bridged_silences = 0;
    std::vector<ChangeRecord> changes;
    // Attacker context disclosed by the evaluation harness, when enabled.
    std::optional<Power> observed_power;
    std::optional<double> observed_alpha;

    double dangerous_fraction() const;
};

struct LockDirective {
    VehicleId true_id;
    double duration = 0.0;
    int priority = 0;
};

struct IncentiveDirective {
    VehicleId true_id;
    double credits = 0.0;
    double cooperative_prob = 1.0;  // probability after the credit is applied
};

struct PolicyUpdate {
    VehicleId true_id;
    pseudonym::PseudonymPolicy policy;
};

struct ControlDirective {
    double issued_at = 0.0;
    strategy::StrategyId selected = strategy::StrategyId::UPCS;
    strategy::StrategySettings settings;
    std::vector<strategy::StrategyRule> rules;
    PrivacyMetric metric = PrivacyMetric::EntropyOfAnonymitySet;
    std::vector<LockDirective> locks;
    std::vector<IncentiveDirective> incentives;
    std::vector<PolicyUpdate> pseudonym_policy;
    double sensitivity_alpha = 0.3;
};

nlohmann::json to_json(const ContextReport& report);
nlohmann::json to_json(const ControlDirective& directive);
ControlDirective directive_from_json(const nlohmann::json& j);

}  // namespace sdlp::control
