#include "sdlp/protocol.hpp"

#include <stdexcept>

namespace sdlp::control {

using nlohmann::json;

std::string to_string(Coverage c) {
    switch (c) {
        case Coverage::Local: return "Local";
        case Coverage::MidSized: return "MidSized";
        case Coverage::Global: return "Global";
    }
    return "Global";
}

std::string to_string(Capability c) {
    return c == Capability::SyntacticOnly ? "SyntacticOnly" : "SyntacticAndSemantic";
}

std::string to_string(Power p) {
    switch (p) {
        case Power::Simple: return "Simple";
        case Power::Medium: return "Medium";
        case Power::Advanced: return "Advanced";
    }
    return "Simple";
}

std::string to_string(PrivacyMetric m) {
    return m == PrivacyMetric::SizeOfAnonymitySet ? "SizeOfAnonymitySet" : "EntropyOfAnonymitySet";
}

std::string short_name(PrivacyMetric m) { return m == PrivacyMetric::SizeOfAnonymitySet ? "Size" : "Entropy"; }

Coverage coverage_from_string(const std::string& s) {
    if (s == "Local") return Coverage::Local;
    if (s == "MidSized") return Coverage::MidSized;
    if (s == "Global") return Coverage::Global;
    throw std::invalid_argument("unknown coverage '" + s + "'");
}

Capability capability_from_string(const std::string& s) {
    if (s == "SyntacticOnly") return Capability::SyntacticOnly;
    if (s == "SyntacticAndSemantic") return Capability::SyntacticAndSemantic;
    throw std::invalid_argument("unknown capability '" + s + "'");
}

Power power_from_string(const std::string& s) {
    if (s == "Simple") return Power::Simple;
    if (s == "Medium") return Power::Medium;
    if (s == "Advanced") return Power::Advanced;
    throw std::invalid_argument("unknown attacker power '" + s + "'");
}

PrivacyMetric metric_from_string(const std::string& s) {
    if (s == "SizeOfAnonymitySet" || s == "Size") return PrivacyMetric::SizeOfAnonymitySet;
    if (s == "EntropyOfAnonymitySet" || s == "Entropy") return PrivacyMetric::EntropyOfAnonymitySet;
    throw std::invalid_argument("unknown privacy metric '" + s + "'");
}

double ContextReport::dangerous_fraction() const {
    if (vehicles.empty()) return 0.0;
    return static_cast<double>(dangerous.size()) / static_cast<double>(vehicles.size());
}

namespace {

json action_to_json(const strategy::PcsAction& a) {
    using namespace strategy::action;
    json j;
    j["type"] = strategy::to_string(a);
    if (const auto* s = std::get_if<EnterSilence>(&a)) j["duration"] = s->duration;
    if (const auto* e = std::get_if<EnterInfrastructure>(&a)) j["id"] = e->id;
    return j;
}

strategy::PcsAction action_from_json(const json& j) {
    using namespace strategy::action;
    const auto type = j.at("type").get<std::string>();
    if (type.starts_with("EnterSilence")) return EnterSilence{j.at("duration").get<double>()};
    if (type == "ExitSilence") return ExitSilence{};
    if (type == "ChangePseudonym") return ChangePseudonym{};
    if (type == "Hold") return Hold{};
    if (type.starts_with("EnterInfrastructure")) return EnterInfrastructure{j.at("id").get<int>()};
    if (type == "ExitInfrastructure") return ExitInfrastructure{};
    throw std::invalid_argument("unknown action '" + type + "'");
}

world::ContextKind kind_from_string(const std::string& s) {
    for (auto k : {world::ContextKind::SignalizedIntersection, world::ContextKind::CongestedSegment,
                   world::ContextKind::RoadsideInfrastructure, world::ContextKind::OpenRoad}) {
        if (world::to_string(k) == s) return k;
    }
    throw std::invalid_argument("unknown context '" + s + "'");
}

json ids_to_json(const std::vector<VehicleId>& ids) {
    json arr = json::array();
    for (auto id : ids) arr.push_back(id.value);
    return arr;
}

}  // namespace

json to_json(const ContextReport& report) {
    json j;
    j["kind"] = "ContextReport";
    j["time"] = report.time;
    json vehicles = json::array();
    for (const auto& v : report.vehicles) {
        vehicles.push_back({{"true_id", v.true_id.value},
                            {"context", world::to_string(v.context)},
                            {"location", v.location},
                            {"speed", v.speed},
                            {"privacy", v.privacy},
                            {"dangerous", v.dangerous}});
    }
    j["vehicles"] = std::move(vehicles);
    j["safety_events"] = {{"dangerous", ids_to_json(report.dangerous)},
                          {"stale_pairs", report.stale_pairs},
                          {"total_pairs", report.total_pairs}};
    j["selfish"] = ids_to_json(report.selfish);
    j["observed_linkage_ratio"] =
        report.observed_linkage_ratio ? json(*report.observed_linkage_ratio) : json(nullptr);
    j["bridged_silences"] = report.bridged_silences;
    json changes = json::array();
    for (const auto& c : report.changes) {
        changes.push_back({{"time", c.time},
                           {"true_id", c.true_id.value},
                           {"old", c.old_id.value},
                           {"new", c.new_id.value},
                           {"context", c.context}});
    }
    j["changes"] = std::move(changes);
    if (report.observed_power) j["observed_power"] = to_string(*report.observed_power);
    if (report.observed_alpha) j["observed_alpha"] = *report.observed_alpha;
    return j;
}

json to_json(const ControlDirective& d) {
    json j;
    j["kind"] = "ControlDirective";
    j["issued_at"] = d.issued_at;
    j["selected"] = strategy::to_string(d.selected);
    const auto& s = d.settings;
    j["settings"] = {{"silence_duration", s.silence_duration},   {"max_silence", s.max_silence},
                     {"red_light_duration", s.red_light_duration}, {"speed_threshold", s.speed_threshold},
                     {"min_group_size", s.min_group_size},         {"ri_capacity", s.ri_capacity},
                     {"privacy_threshold", s.privacy_threshold},   {"lock_enabled", s.lock_enabled}};
    json rules = json::array();
    for (const auto& r : d.rules) {
        rules.push_back({{"context_predicate", world::to_string(r.context_predicate)},
                         {"action", action_to_json(r.action)},
                         {"validity", r.validity}});
    }
    j["rules"] = std::move(rules);
    j["metric"] = to_string(d.metric);
    json locks = json::array();
    for (const auto& l : d.locks) {
        locks.push_back({{"true_id", l.true_id.value}, {"duration", l.duration}, {"priority", l.priority}});
    }
    j["locks"] = std::move(locks);
    json incentives = json::array();
    for (const auto& i : d.incentives) {
        incentives.push_back(
            {{"true_id", i.true_id.value}, {"credits", i.credits}, {"cooperative_prob", i.cooperative_prob}});
    }
    j["incentives"] = std::move(incentives);
    json policies = json::array();
    for (const auto& p : d.pseudonym_policy) {
        policies.push_back({{"true_id", p.true_id.value},
                            {"min_usage_duration", p.policy.min_usage_duration},
                            {"max_parallel", p.policy.max_parallel},
                            {"reuse_allowed", p.policy.reuse_allowed},
                            {"pool_size", p.policy.pool_size},
                            {"mix_override_allowed", p.policy.mix_override_allowed}});
    }
    j["pseudonym_policy"] = std::move(policies);
    j["sensitivity_alpha"] = d.sensitivity_alpha;
    return j;
}

ControlDirective directive_from_json(const json& j) {
    ControlDirective d;
    d.issued_at = j.at("issued_at").get<double>();
    d.selected = strategy::strategy_from_string(j.at("selected").get<std::string>());
    const auto& s = j.at("settings");
    d.settings.silence_duration = s.at("silence_duration").get<double>();
    d.settings.max_silence = s.at("max_silence").get<double>();
    d.settings.red_light_duration = s.at("red_light_duration").get<double>();
    d.settings.speed_threshold = s.at("speed_threshold").get<double>();
    d.settings.min_group_size = s.at("min_group_size").get<int>();
    d.settings.ri_capacity = s.at("ri_capacity").get<int>();
    d.settings.privacy_threshold = s.at("privacy_threshold").get<double>();
    d.settings.lock_enabled = s.at("lock_enabled").get<bool>();
    for (const auto& r : j.at("rules")) {
        d.rules.push_back({kind_from_string(r.at("context_predicate").get<std::string>()),
                           action_from_json(r.at("action")), r.at("validity").get<double>()});
    }
    d.metric = metric_from_string(j.at("metric").get<std::string>());
    for (const auto& l : j.at("locks")) {
        d.locks.push_back({VehicleId{l.at("true_id").get<std::uint32_t>()}, l.at("duration").get<double>(),
                           l.at("priority").get<int>()});
    }
    for (const auto& i : j.at("incentives")) {
        d.incentives.push_back({VehicleId{i.at("true_id").get<std::uint32_t>()}, i.at("credits").get<double>(),
                                i.at("cooperative_prob").get<double>()});
    }
    for (const auto& p : j.at("pseudonym_policy")) {
        PolicyUpdate u;
        u.true_id = VehicleId{p.at("true_id").get<std::uint32_t>()};
        u.policy.min_usage_duration = p.at("min_usage_duration").get<double>();
        u.policy.max_parallel = p.at("max_parallel").get<int>();
        u.policy.reuse_allowed = p.at("reuse_allowed").get<bool>();
        u.policy.pool_size = p.at("pool_size").get<int>();
        u.policy.mix_override_allowed = p.at("mix_override_allowed").get<bool>();
        d.pseudonym_policy.push_back(u);
    }
    d.sensitivity_alpha = j.at("sensitivity_alpha").get<double>();
    return d;
}

}  // namespace sdlp::control
