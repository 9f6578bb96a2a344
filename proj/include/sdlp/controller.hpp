#pragma once

// Control plane: strategy and metric selection, parameter settings, privacy
// model, safety monitoring, learning, incentives, pseudonym planning and the
// misbehaviour-detection file exchange.

#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sdlp/protocol.hpp"

namespace sdlp::control {

// Decision table. OpenRoad keeps `previous`.
strategy::StrategyId select_strategy(world::ContextKind dominant, const AttackerModelEstimate& attacker,
                                     strategy::StrategyId previous);

PrivacyMetric select_privacy_metric(Power power);

// Metric each strategy evaluates itself with when no controller adapts it.
PrivacyMetric table_metric(strategy::StrategyId id);

// Most frequent non-OpenRoad context among reported vehicles; OpenRoad if none.
// Ties go to the earlier ContextKind.
world::ContextKind dominant_context(const ContextReport& report);

strategy::StrategySettings compute_settings(strategy::StrategyId selected, const strategy::StrategySettings& base,
                                            const ContextReport& report, const AttackerModelEstimate& attacker);

struct PrivacyLedger {
    std::vector<double> level;        // bits, indexed by vehicle id
    std::vector<double> last_change;  // s
    double cap = 0.0;                 // log2(vehicle count)
};

// Every level starts at min(initial, cap).
PrivacyLedger make_ledger(std::size_t vehicles, double initial);

struct PrivacyGain {
    VehicleId vehicle;
    double bits = 0.0;
};

// Decay by alpha*dt (floored at 0), then add the gains (capped).
PrivacyLedger privacy_update(PrivacyLedger ledger, std::span<const PrivacyGain> gains, double alpha, double dt,
                             double now);

std::vector<LockDirective> safety_monitor(const ContextReport& report, double lock_span);

struct LearningParams {
    double medium_threshold = 0.3;
    double advanced_threshold = 0.6;
    double alpha_scale = 0.3;
};

AttackerModelEstimate learning_update(AttackerModelEstimate attacker, const ContextReport& report,
                                      const LearningParams& params);

// Uses disclosed attacker context from the report when present, learning otherwise.
AttackerModelEstimate attacker_model_update(AttackerModelEstimate attacker, const ContextReport& report,
                                            const LearningParams& params);

struct IncentiveParams {
    double credits_per_event = 1.0;
    double delta = 0.2;  // cooperation gained per credit
};

// `current` maps vehicles to their present cooperation probability; vehicles
// absent from it are taken as fully cooperative.
std::vector<IncentiveDirective> incentive_apply(strategy::StrategyId selected, std::span<const VehicleId> selfish,
                                                const IncentiveParams& params,
                                                const std::map<VehicleId, double>& current);

struct SybilAlert {
    VehicleId true_id;
    std::string reason;
};

// Alerted vehicles get doubled min_usage_duration and lose the mix override.
std::vector<PolicyUpdate> pseudonym_rules_plan(const pseudonym::PseudonymPolicy& base,
                                               std::span<const SybilAlert> alerts);

// File-based stand-in for the external misbehaviour-detection controller.
// Writes one line per pseudonym change to sybil_out.jsonl and reads alert
// lines appended to sybil_alerts.jsonl since the previous exchange.
class SybilAgent {
public:
    explicit SybilAgent(std::filesystem::path dir);

    std::vector<SybilAlert> exchange(std::span<const ChangeRecord> changes);

    std::size_t records_written() const { return written_; }
    const std::filesystem::path& outbound_path() const { return out_path_; }
    const std::filesystem::path& alerts_path() const { return alerts_path_; }

private:
    std::filesystem::path out_path_;
    std::filesystem::path alerts_path_;
    std::size_t written_ = 0;
    std::size_t consumed_lines_ = 0;
    std::map<PseudonymId, VehicleId> owner_;
};

// Ordered, lossless in-process queue between the two planes.
template <typename T>
class Channel {
public:
    void send(T msg) { queue_.push_back(std::move(msg)); }
    std::optional<T> receive() {
        if (queue_.empty()) return std::nullopt;
        T msg = std::move(queue_.front());
        queue_.pop_front();
        return msg;
    }
    bool empty() const { return queue_.empty(); }

private:
    std::deque<T> queue_;
};

struct ControllerConfig {
    bool sdn = true;
    strategy::StrategyId strategy = strategy::StrategyId::UPCS;
    bool auto_select = true;  // sdn only; otherwise `strategy` stays selected
    strategy::StrategySettings settings;
    AttackerModelEstimate attacker;
    LearningParams learning;
    IncentiveParams incentives;
    pseudonym::PseudonymPolicy policy;
    double lock_span = pseudonym::kMaxLockSpan;
    double reporting_epoch = 5.0;
    double alpha = 0.3;  // sensitivity used when the privacy model does not adapt it
    double cooperative_prob = 1.0;
    std::optional<std::filesystem::path> sybil_dir;
};

struct MetricStep {
    double time = 0.0;
    Power power = Power::Simple;
    PrivacyMetric metric = PrivacyMetric::SizeOfAnonymitySet;
};

class SdlpController {
public:
    explicit SdlpController(ControllerConfig config);

    // Directive in force from t = 0. Both modes issue it.
    ControlDirective start(const ContextReport& report);
    // Static mode never answers; sdn answers every report.
    std::optional<ControlDirective> on_report(const ContextReport& report);

    const AttackerModelEstimate& attacker() const { return attacker_; }
    strategy::StrategyId selected() const { return selected_; }
    const std::vector<MetricStep>& metric_trace() const { return metric_trace_; }
    std::size_t directives_issued() const { return issued_; }

    // Metrics in force over successive attacker-power phases, e.g. "Size;Entropy;Entropy".
    std::string metric_summary() const;

private:
    ControlDirective adapt(const ContextReport& report);
    void record_metric(double time, PrivacyMetric metric);

    ControllerConfig config_;
    AttackerModelEstimate attacker_;
    strategy::StrategyId selected_;
    std::map<VehicleId, double> cooperation_;
    std::optional<SybilAgent> sybil_;
    std::vector<MetricStep> metric_trace_;
    std::size_t issued_ = 0;
    bool started_ = false;
};

}  // namespace sdlp::control
