#include "sdlp/controller.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include <spdlog/spdlog.h>

namespace sdlp::control {

using strategy::StrategyId;
using world::ContextKind;

StrategyId select_strategy(ContextKind dominant, const AttackerModelEstimate& attacker, StrategyId previous) {
    switch (dominant) {
        case ContextKind::SignalizedIntersection:
            return attacker.capability == Capability::SyntacticAndSemantic ? StrategyId::UPCS
                                                                           : StrategyId::SocialSpots;
        case ContextKind::CongestedSegment: return StrategyId::TAPCS;
        case ContextKind::RoadsideInfrastructure: return StrategyId::PRIVANET;
        case ContextKind::OpenRoad: return previous;
    }
    return previous;
}

PrivacyMetric select_privacy_metric(Power power) {
    return power == Power::Simple ? PrivacyMetric::SizeOfAnonymitySet : PrivacyMetric::EntropyOfAnonymitySet;
}

PrivacyMetric table_metric(StrategyId id) {
    switch (id) {
        case StrategyId::UPCS:
        case StrategyId::TAPCS: return PrivacyMetric::EntropyOfAnonymitySet;
        case StrategyId::SocialSpots:
        case StrategyId::PRIVANET: return PrivacyMetric::SizeOfAnonymitySet;
    }
    return PrivacyMetric::EntropyOfAnonymitySet;
}

ContextKind dominant_context(const ContextReport& report) {
    std::array<std::size_t, 3> counts{};
    for (const auto& v : report.vehicles) {
        if (v.context != ContextKind::OpenRoad) ++counts[static_cast<std::size_t>(v.context)];
    }
    const auto best = std::max_element(counts.begin(), counts.end());
    if (*best == 0) return ContextKind::OpenRoad;
    return static_cast<ContextKind>(best - counts.begin());
}

strategy::StrategySettings compute_settings(StrategyId selected, const strategy::StrategySettings& base,
                                            const ContextReport& report, const AttackerModelEstimate&) {
    auto s = base;
    if (selected == StrategyId::TAPCS && report.stale_pairs > 0) {
        s.silence_duration = std::min(s.silence_duration, strategy::kSafeSilenceCap);
        s.max_silence = std::min(s.max_silence, strategy::kSafeSilenceCap);
    }
    s.lock_enabled = report.dangerous_fraction() > 0.0;
    return s;
}

PrivacyLedger make_ledger(std::size_t vehicles, double initial) {
    PrivacyLedger ledger;
    ledger.cap = vehicles > 0 ? std::log2(static_cast<double>(vehicles)) : 0.0;
    ledger.level.assign(vehicles, std::clamp(initial, 0.0, ledger.cap));
    ledger.last_change.assign(vehicles, 0.0);
    return ledger;
}

PrivacyLedger privacy_update(PrivacyLedger ledger, std::span<const PrivacyGain> gains, double alpha, double dt,
                             double now) {
    for (auto& level : ledger.level) level = std::max(0.0, level - alpha * dt);
    for (const auto& g : gains) {
        auto& level = ledger.level.at(g.vehicle.value);
        level = std::min(ledger.cap, level + g.bits);
        ledger.last_change.at(g.vehicle.value) = now;
    }
    return ledger;
}

std::vector<LockDirective> safety_monitor(const ContextReport& report, double lock_span) {
    std::vector<LockDirective> locks;
    const double span = std::min(lock_span, pseudonym::kMaxLockSpan);
    for (auto id : report.dangerous) locks.push_back({id, span, 0});
    return locks;
}

AttackerModelEstimate learning_update(AttackerModelEstimate attacker, const ContextReport& report,
                                      const LearningParams& params) {
    if (!report.observed_linkage_ratio) return attacker;
    const double rho = std::clamp(*report.observed_linkage_ratio, 0.0, 1.0);
    if (rho < params.medium_threshold) {
        attacker.power = Power::Simple;
    } else if (rho < params.advanced_threshold) {
        attacker.power = Power::Medium;
    } else {
        attacker.power = Power::Advanced;
    }
    attacker.sensitivity_alpha = params.alpha_scale * rho;
    if (report.bridged_silences > 0) attacker.capability = Capability::SyntacticAndSemantic;
    return attacker;
}

AttackerModelEstimate attacker_model_update(AttackerModelEstimate attacker, const ContextReport& report,
                                            const LearningParams& params) {
    if (!report.observed_power && !report.observed_alpha) return learning_update(attacker, report, params);
    if (report.observed_power) attacker.power = *report.observed_power;
    if (report.observed_alpha) attacker.sensitivity_alpha = *report.observed_alpha;
    if (report.bridged_silences > 0) attacker.capability = Capability::SyntacticAndSemantic;
    return attacker;
}

std::vector<IncentiveDirective> incentive_apply(StrategyId selected, std::span<const VehicleId> selfish,
                                                const IncentiveParams& params,
                                                const std::map<VehicleId, double>& current) {
    std::vector<IncentiveDirective> out;
    if (selected == StrategyId::UPCS || selected == StrategyId::TAPCS) return out;
    if (params.credits_per_event <= 0.0) return out;
    for (auto id : selfish) {
        const auto it = current.find(id);
        const double p = it == current.end() ? 1.0 : it->second;
        out.push_back({id, params.credits_per_event, std::min(1.0, p + params.delta * params.credits_per_event)});
    }
    return out;
}

std::vector<PolicyUpdate> pseudonym_rules_plan(const pseudonym::PseudonymPolicy& base,
                                               std::span<const SybilAlert> alerts) {
    std::vector<PolicyUpdate> out;
    std::set<VehicleId> seen;
    for (const auto& a : alerts) {
        if (!seen.insert(a.true_id).second) continue;
        auto p = base;
        p.min_usage_duration = 2.0 * base.min_usage_duration;
        p.mix_override_allowed = false;
        out.push_back({a.true_id, p});
    }
    return out;
}

SybilAgent::SybilAgent(std::filesystem::path dir)
    : out_path_(dir / "sybil_out.jsonl"), alerts_path_(dir / "sybil_alerts.jsonl") {
    std::ofstream truncate(out_path_, std::ios::trunc);
}

std::vector<SybilAlert> SybilAgent::exchange(std::span<const ChangeRecord> changes) {
    if (!changes.empty()) {
        std::ofstream out(out_path_, std::ios::app);
        for (const auto& c : changes) {
            owner_[c.old_id] = c.true_id;
            owner_[c.new_id] = c.true_id;
            nlohmann::json j{{"time", c.time}, {"old", c.old_id.value}, {"new", c.new_id.value},
                             {"context", c.context}};
            out << j.dump() << '\n';
            ++written_;
        }
    }

    std::vector<SybilAlert> alerts;
    std::ifstream in(alerts_path_);
    if (!in) return alerts;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (n++ < consumed_lines_) continue;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            SybilAlert a;
            a.reason = j.value("reason", std::string{});
            if (j.contains("true_id")) {
                a.true_id = VehicleId{j.at("true_id").get<std::uint32_t>()};
            } else {
                const PseudonymId p{j.at("pseudonym").get<std::uint64_t>()};
                const auto it = owner_.find(p);
                if (it == owner_.end()) {
                    spdlog::warn("sybil alert for unknown pseudonym {}", p.value);
                    continue;
                }
                a.true_id = it->second;
            }
            alerts.push_back(std::move(a));
        } catch (const nlohmann::json::exception& e) {
            spdlog::warn("skipping malformed sybil alert line {}: {}", n, e.what());
        }
    }
    consumed_lines_ = n;
    return alerts;
}

SdlpController::SdlpController(ControllerConfig config)
    : config_(std::move(config)), attacker_(config_.attacker), selected_(config_.strategy) {
    if (config_.sdn && config_.sybil_dir) sybil_.emplace(*config_.sybil_dir);
}

void SdlpController::record_metric(double time, PrivacyMetric metric) {
    metric_trace_.push_back({time, attacker_.power, metric});
}

std::string SdlpController::metric_summary() const {
    std::string out;
    const MetricStep* prev = nullptr;
    for (const auto& m : metric_trace_) {
        if (prev && prev->power == m.power && prev->metric == m.metric) continue;
        if (!out.empty()) out += ';';
        out += short_name(m.metric);
        prev = &m;
    }
    return out;
}

ControlDirective SdlpController::start(const ContextReport& report) {
    if (started_) throw std::logic_error("controller already started");
    started_ = true;
    if (config_.sdn) return adapt(report);

    ControlDirective d;
    d.issued_at = report.time;
    d.selected = selected_;
    d.settings = config_.settings;
    d.settings.lock_enabled = false;
    // Static rules never lapse within a run.
    d.rules = strategy::rules_for(selected_, d.settings, 1e9);
    d.metric = table_metric(selected_);
    d.sensitivity_alpha = config_.alpha;
    record_metric(report.time, d.metric);
    ++issued_;
    return d;
}

std::optional<ControlDirective> SdlpController::on_report(const ContextReport& report) {
    if (!config_.sdn) return std::nullopt;
    return adapt(report);
}

ControlDirective SdlpController::adapt(const ContextReport& report) {
    attacker_ = attacker_model_update(attacker_, report, config_.learning);
    if (config_.auto_select) selected_ = select_strategy(dominant_context(report), attacker_, selected_);

    ControlDirective d;
    d.issued_at = report.time;
    d.selected = selected_;
    d.metric = select_privacy_metric(attacker_.power);
    d.settings = compute_settings(selected_, config_.settings, report, attacker_);
    d.rules = strategy::rules_for(selected_, d.settings, 2.0 * config_.reporting_epoch);
    if (d.settings.lock_enabled) d.locks = safety_monitor(report, config_.lock_span);

    for (auto id : report.selfish) cooperation_.try_emplace(id, config_.cooperative_prob);
    d.incentives = incentive_apply(selected_, report.selfish, config_.incentives, cooperation_);
    for (const auto& inc : d.incentives) cooperation_[inc.true_id] = inc.cooperative_prob;

    if (sybil_) d.pseudonym_policy = pseudonym_rules_plan(config_.policy, sybil_->exchange(report.changes));

    // Only the infrastructure strategy runs the adaptive privacy model.
    d.sensitivity_alpha = selected_ == StrategyId::PRIVANET ? attacker_.sensitivity_alpha : config_.alpha;
    record_metric(report.time, d.metric);
    ++issued_;
    return d;
}

}  // namespace sdlp::control
