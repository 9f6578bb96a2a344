#include "sdlp/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <array>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace sdlp::config {

namespace {

using Keys = std::initializer_list<const char*>;

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
        const auto m = at.Mark();
        if (m.is_null()) throw ConfigError(fmt::format("{}: {}", source_, msg));
        throw ConfigError(fmt::format("{}:{}:{}: {}", source_, m.line + 1, m.column + 1, msg));
    }

    void require_map(const YAML::Node& n, const std::string& what) const {
        if (!n.IsMap()) fail(n, what + " must be a mapping");
    }

    void check_keys(const YAML::Node& n, Keys allowed, const std::string& where) const {
        require_map(n, where);
        std::set<std::string> ok;
        for (const char* k : allowed) ok.insert(k);
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            if (!ok.count(key)) fail(kv.first, fmt::format("unknown key '{}' in {}", key, where));
        }
    }

    template <typename T>
    T get(const YAML::Node& n, const char* key, T fallback) const {
        const YAML::Node v = n[key];
        if (!v) return fallback;
        try {
            return v.as<T>();
        } catch (const YAML::BadConversion&) {
            fail(v, fmt::format("bad value for '{}'", key));
        }
    }

    template <typename T>
    T required(const YAML::Node& n, const char* key, const std::string& where) const {
        const YAML::Node v = n[key];
        if (!v) fail(n, fmt::format("missing '{}' in {}", key, where));
        return get<T>(n, key, T{});
    }

    template <typename Fn>
    auto convert(const YAML::Node& at, Fn&& fn) const {
        try {
            return fn();
        } catch (const std::invalid_argument& e) {
            fail(at, e.what());
        }
    }

private:
    std::string source_;
};

MapSpec read_map(const Reader& r, const YAML::Node& n) {
    r.check_keys(n, {"segments", "intersections", "congestion_zones", "infrastructures", "congestion_speed"}, "map");
    MapSpec m;
    m.congestion_speed = r.get(n, "congestion_speed", m.congestion_speed);
    const YAML::Node segs = n["segments"];
    if (!segs || !segs.IsSequence() || segs.size() == 0) r.fail(n, "map.segments must be a non-empty list");
    for (const auto& s : segs) {
        r.check_keys(s, {"id", "length", "speed_limit"}, "map.segments");
        m.segments.push_back({r.required<int>(s, "id", "segment"), r.required<double>(s, "length", "segment"),
                              r.required<double>(s, "speed_limit", "segment")});
    }
    if (const YAML::Node xs = n["intersections"]) {
        for (const auto& x : xs) {
            r.check_keys(x, {"id", "position", "red", "green", "offset"}, "map.intersections");
            world::Intersection i;
            i.id = r.required<int>(x, "id", "intersection");
            i.position = r.required<double>(x, "position", "intersection");
            i.red_duration = r.get(x, "red", i.red_duration);
            i.green_duration = r.get(x, "green", i.green_duration);
            i.phase_offset = r.get(x, "offset", i.phase_offset);
            m.intersections.push_back(i);
        }
    }
    if (const YAML::Node zs = n["congestion_zones"]) {
        for (const auto& z : zs) {
            r.check_keys(z, {"segment", "start", "end"}, "map.congestion_zones");
            m.congestion_zones.push_back({r.required<int>(z, "segment", "zone"), r.required<double>(z, "start", "zone"),
                                          r.required<double>(z, "end", "zone")});
        }
    }
    if (const YAML::Node is = n["infrastructures"]) {
        for (const auto& x : is) {
            r.check_keys(x, {"id", "position", "capacity", "service_time"}, "map.infrastructures");
            world::Infrastructure i;
            i.id = r.required<int>(x, "id", "infrastructure");
            i.position = r.required<double>(x, "position", "infrastructure");
            i.capacity = r.get(x, "capacity", i.capacity);
            i.service_time = r.get(x, "service_time", i.service_time);
            m.infrastructures.push_back(i);
        }
    }
    return m;
}

void read_attacker(const Reader& r, const YAML::Node& n, AttackerSection& a) {
    r.check_keys(n,
                 {"coverage", "fraction", "cell_length", "spans", "capability", "power", "power_schedule",
                  "gate_radius", "kernel_sigma", "speed_sigma", "heading_penalty", "miss_mass", "max_coast"},
                 "attacker");
    auto& d = a.deployment;
    if (n["coverage"]) d.coverage = r.convert(n["coverage"], [&] { return control::coverage_from_string(n["coverage"].as<std::string>()); });
    if (n["capability"]) d.capability = r.convert(n["capability"], [&] { return control::capability_from_string(n["capability"].as<std::string>()); });
    if (n["power"]) d.power = r.convert(n["power"], [&] { return control::power_from_string(n["power"].as<std::string>()); });
    d.fraction = r.get(n, "fraction", d.fraction);
    d.cell_length = r.get(n, "cell_length", d.cell_length);
    d.speed_sigma = r.get(n, "speed_sigma", d.speed_sigma);
    d.heading_penalty = r.get(n, "heading_penalty", d.heading_penalty);
    d.miss_mass = r.get(n, "miss_mass", d.miss_mass);
    d.max_coast = r.get(n, "max_coast", d.max_coast);
    if (n["gate_radius"] || n["kernel_sigma"]) {
        if (!n["gate_radius"] || !n["kernel_sigma"]) r.fail(n, "gate_radius and kernel_sigma go together");
        a.default_kernel = false;
        d.gate_radius = r.get(n, "gate_radius", d.gate_radius);
        d.kernel_sigma = r.get(n, "kernel_sigma", d.kernel_sigma);
    }
    if (const YAML::Node spans = n["spans"]) {
        for (const auto& s : spans) {
            r.check_keys(s, {"segment", "start", "end"}, "attacker.spans");
            d.local_spans.push_back({r.required<int>(s, "segment", "span"), r.required<double>(s, "start", "span"),
                                     r.required<double>(s, "end", "span")});
        }
    }
    if (const YAML::Node sched = n["power_schedule"]) {
        for (const auto& p : sched) {
            a.power_schedule.push_back(r.convert(p, [&] { return control::power_from_string(p.as<std::string>()); }));
        }
    }
}

std::string num(double x) { return fmt::format("{}", x); }

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
    const Reader r(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(fmt::format("{}:{}:{}: {}", source, e.mark.line + 1, e.mark.column + 1, e.msg));
    }
    r.check_keys(root,
                 {"scenario", "mode", "seed", "duration", "vehicles", "strategy", "dangerous_fraction", "alpha",
                  "initial_privacy", "cooperative_prob", "reporting_epoch", "map", "world", "beacon",
                  "strategy_settings", "pseudonyms", "controller", "attacker", "output"},
                 "config");

    ScenarioConfig c;
    c.scenario = r.get(root, "scenario", c.scenario);
    const auto mode = r.get<std::string>(root, "mode", "sdn");
    if (mode != "static" && mode != "sdn") r.fail(root["mode"], "mode must be 'static' or 'sdn'");
    c.sdn = mode == "sdn";
    c.seed = r.get<std::uint64_t>(root, "seed", c.seed);
    c.duration = r.get(root, "duration", c.duration);
    c.vehicles = r.get<std::size_t>(root, "vehicles", c.vehicles);
    if (root["strategy"]) {
        c.strategy = r.convert(root["strategy"], [&] {
            return strategy::strategy_from_string(root["strategy"].as<std::string>());
        });
    }
    c.dangerous_fraction = r.get(root, "dangerous_fraction", c.dangerous_fraction);
    c.alpha = r.get(root, "alpha", c.alpha);
    if (root["initial_privacy"]) c.initial_privacy = r.get(root, "initial_privacy", 0.0);
    c.cooperative_prob = r.get(root, "cooperative_prob", c.cooperative_prob);
    c.reporting_epoch = r.get(root, "reporting_epoch", c.reporting_epoch);

    if (!root["map"]) r.fail(root, "missing 'map'");
    c.map = read_map(r, root["map"]);

    if (const YAML::Node w = root["world"]) {
        r.check_keys(w,
                     {"dt", "min_gap", "detection_radius", "approach_radius", "congestion_threshold",
                      "desired_speed_min_factor", "position_jitter"},
                     "world");
        c.world.dt = r.get(w, "dt", c.world.dt);
        c.world.min_gap = r.get(w, "min_gap", c.world.min_gap);
        c.world.detection_radius = r.get(w, "detection_radius", c.world.detection_radius);
        c.world.approach_radius = r.get(w, "approach_radius", c.world.approach_radius);
        c.world.congestion_threshold = r.get(w, "congestion_threshold", c.world.congestion_threshold);
        c.desired_speed_min_factor = r.get(w, "desired_speed_min_factor", c.desired_speed_min_factor);
        c.position_jitter = r.get(w, "position_jitter", c.position_jitter);
    }
    if (const YAML::Node b = root["beacon"]) {
        r.check_keys(b, {"interval", "radio_range", "ldm_expiry", "awareness_range", "t_safe"}, "beacon");
        c.beacon.beacon_interval = r.get(b, "interval", c.beacon.beacon_interval);
        c.beacon.radio_range = r.get(b, "radio_range", c.beacon.radio_range);
        c.beacon.ldm_expiry = r.get(b, "ldm_expiry", c.beacon.ldm_expiry);
        c.beacon.awareness_range = r.get(b, "awareness_range", c.beacon.awareness_range);
        c.beacon.t_safe = r.get(b, "t_safe", c.beacon.t_safe);
    }

    // Map-derived defaults, overridable below.
    if (!c.map.intersections.empty()) c.settings.red_light_duration = c.map.intersections.front().red_duration;
    if (!c.map.infrastructures.empty()) c.settings.ri_capacity = c.map.infrastructures.front().capacity;
    c.settings.speed_threshold = c.world.congestion_threshold;
    if (const YAML::Node s = root["strategy_settings"]) {
        r.check_keys(s,
                     {"silence_duration", "max_silence", "red_light_duration", "speed_threshold", "min_group_size",
                      "ri_capacity", "privacy_threshold"},
                     "strategy_settings");
        auto& st = c.settings;
        st.silence_duration = r.get(s, "silence_duration", st.silence_duration);
        st.max_silence = r.get(s, "max_silence", st.max_silence);
        st.red_light_duration = r.get(s, "red_light_duration", st.red_light_duration);
        st.speed_threshold = r.get(s, "speed_threshold", st.speed_threshold);
        st.min_group_size = r.get(s, "min_group_size", st.min_group_size);
        st.ri_capacity = r.get(s, "ri_capacity", st.ri_capacity);
        st.privacy_threshold = r.get(s, "privacy_threshold", st.privacy_threshold);
    }
    if (const YAML::Node p = root["pseudonyms"]) {
        r.check_keys(p, {"min_usage", "max_parallel", "reuse_allowed", "pool_size", "mix_override_allowed"},
                     "pseudonyms");
        c.policy.min_usage_duration = r.get(p, "min_usage", c.policy.min_usage_duration);
        c.policy.max_parallel = r.get(p, "max_parallel", c.policy.max_parallel);
        c.policy.reuse_allowed = r.get(p, "reuse_allowed", c.policy.reuse_allowed);
        c.policy.pool_size = r.get(p, "pool_size", c.policy.pool_size);
        c.policy.mix_override_allowed = r.get(p, "mix_override_allowed", c.policy.mix_override_allowed);
    }
    if (const YAML::Node k = root["controller"]) {
        r.check_keys(k,
                     {"lock_span", "credits_per_event", "incentive_delta", "medium_threshold", "advanced_threshold",
                      "alpha_scale", "auto_select", "disclose_attacker", "linkage_noise"},
                     "controller");
        auto& cs = c.controller;
        cs.lock_span = r.get(k, "lock_span", cs.lock_span);
        cs.credits_per_event = r.get(k, "credits_per_event", cs.credits_per_event);
        cs.incentive_delta = r.get(k, "incentive_delta", cs.incentive_delta);
        cs.medium_threshold = r.get(k, "medium_threshold", cs.medium_threshold);
        cs.advanced_threshold = r.get(k, "advanced_threshold", cs.advanced_threshold);
        cs.alpha_scale = r.get(k, "alpha_scale", cs.alpha_scale);
        cs.auto_select = r.get(k, "auto_select", cs.auto_select);
        cs.disclose_attacker = r.get(k, "disclose_attacker", cs.disclose_attacker);
        cs.linkage_noise = r.get(k, "linkage_noise", cs.linkage_noise);
    }
    if (const YAML::Node a = root["attacker"]) read_attacker(r, a, c.attacker);
    if (const YAML::Node o = root["output"]) {
        r.check_keys(o, {"cam_log"}, "output");
        c.cam_log = r.get(o, "cam_log", c.cam_log);
    }

    try {
        validate(c);
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", source, e.what()));
    }
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("{}: cannot open", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

std::shared_ptr<const world::RoadMap> build_map(const ScenarioConfig& cfg) {
    return std::make_shared<const world::RoadMap>(cfg.map.segments, cfg.map.intersections, cfg.map.congestion_zones,
                                                  cfg.map.infrastructures, cfg.map.congestion_speed);
}

void validate(const ScenarioConfig& c) {
    auto check = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    check(c.scenario >= 1 && c.scenario <= 3, "scenario must be 1, 2 or 3");
    check(c.duration > 0.0, "duration must be > 0");
    check(c.vehicles >= 1, "vehicles must be >= 1");
    check(c.dangerous_fraction >= 0.0 && c.dangerous_fraction <= 1.0, "dangerous_fraction must lie in [0,1]");
    check(c.alpha >= 0.0, "alpha must be >= 0");
    check(!c.initial_privacy || *c.initial_privacy >= 0.0, "initial_privacy must be >= 0");
    check(c.cooperative_prob >= 0.0 && c.cooperative_prob <= 1.0, "cooperative_prob must lie in [0,1]");
    check(c.world.dt > 0.0, "world.dt must be > 0");
    check(c.world.min_gap >= 0.0, "world.min_gap must be >= 0");
    check(beacon::is_multiple_of(c.beacon.beacon_interval, c.world.dt), "beacon.interval must be a multiple of dt");
    check(beacon::is_multiple_of(c.reporting_epoch, c.world.dt), "reporting_epoch must be a multiple of dt");
    check(c.beacon.t_safe > 0.0 && c.beacon.ldm_expiry > 0.0, "beacon.t_safe and ldm_expiry must be > 0");
    check(c.controller.lock_span > 0.0, "controller.lock_span must be > 0");
    check(c.controller.credits_per_event >= 0.0, "controller.credits_per_event must be >= 0");
    check(c.controller.medium_threshold <= c.controller.advanced_threshold,
          "controller thresholds must be ordered");
    check(c.controller.linkage_noise >= 0.0, "controller.linkage_noise must be >= 0");
    try {
        strategy::validate(c.settings);
        pseudonym::validate(c.policy);
        const auto map = build_map(c);
        const double min_length = c.world.min_gap * static_cast<double>(c.vehicles);
        check(map->length() > min_length, "ring too short for the vehicle count");
        auto d = c.attacker.deployment;
        if (c.attacker.default_kernel) d = adversary::with_default_kernel(d, map->segments().front().speed_limit);
        d.beacon_interval = c.beacon.beacon_interval;
        adversary::validate(d);
        adversary::CoverageMask mask(*map, d);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const LookupError& e) {
        throw ConfigError(e.what());
    }
    using strategy::StrategyId;
    switch (c.strategy) {
        case StrategyId::UPCS:
        case StrategyId::SocialSpots:
            check(!c.map.intersections.empty(), "strategy needs at least one intersection");
            break;
        case StrategyId::TAPCS: check(!c.map.congestion_zones.empty(), "TAPCS needs a congestion zone"); break;
        case StrategyId::PRIVANET: check(!c.map.infrastructures.empty(), "PRIVANET needs an infrastructure"); break;
    }
}

std::string dump_config(const ScenarioConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "scenario" << YAML::Value << c.scenario;
    out << YAML::Key << "mode" << YAML::Value << c.mode_name();
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "duration" << YAML::Value << num(c.duration);
    out << YAML::Key << "vehicles" << YAML::Value << c.vehicles;
    out << YAML::Key << "strategy" << YAML::Value << strategy::to_string(c.strategy);
    out << YAML::Key << "dangerous_fraction" << YAML::Value << num(c.dangerous_fraction);
    out << YAML::Key << "alpha" << YAML::Value << num(c.alpha);
    if (c.initial_privacy) out << YAML::Key << "initial_privacy" << YAML::Value << num(*c.initial_privacy);
    out << YAML::Key << "cooperative_prob" << YAML::Value << num(c.cooperative_prob);
    out << YAML::Key << "reporting_epoch" << YAML::Value << num(c.reporting_epoch);

    out << YAML::Key << "map" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "congestion_speed" << YAML::Value << num(c.map.congestion_speed);
    out << YAML::Key << "segments" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : c.map.segments) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << s.id << YAML::Key << "length"
            << YAML::Value << num(s.length) << YAML::Key << "speed_limit" << YAML::Value << num(s.speed_limit)
            << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "intersections" << YAML::Value << YAML::BeginSeq;
    for (const auto& i : c.map.intersections) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << i.id << YAML::Key << "position"
            << YAML::Value << num(i.position) << YAML::Key << "red" << YAML::Value << num(i.red_duration)
            << YAML::Key << "green" << YAML::Value << num(i.green_duration) << YAML::Key << "offset" << YAML::Value
            << num(i.phase_offset) << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "congestion_zones" << YAML::Value << YAML::BeginSeq;
    for (const auto& z : c.map.congestion_zones) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "segment" << YAML::Value << z.segment << YAML::Key
            << "start" << YAML::Value << num(z.start) << YAML::Key << "end" << YAML::Value << num(z.end)
            << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "infrastructures" << YAML::Value << YAML::BeginSeq;
    for (const auto& i : c.map.infrastructures) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << i.id << YAML::Key << "position"
            << YAML::Value << num(i.position) << YAML::Key << "capacity" << YAML::Value << i.capacity << YAML::Key
            << "service_time" << YAML::Value << num(i.service_time) << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;

    out << YAML::Key << "world" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dt" << YAML::Value << num(c.world.dt);
    out << YAML::Key << "min_gap" << YAML::Value << num(c.world.min_gap);
    out << YAML::Key << "detection_radius" << YAML::Value << num(c.world.detection_radius);
    out << YAML::Key << "approach_radius" << YAML::Value << num(c.world.approach_radius);
    out << YAML::Key << "congestion_threshold" << YAML::Value << num(c.world.congestion_threshold);
    out << YAML::Key << "desired_speed_min_factor" << YAML::Value << num(c.desired_speed_min_factor);
    out << YAML::Key << "position_jitter" << YAML::Value << num(c.position_jitter);
    out << YAML::EndMap;

    out << YAML::Key << "beacon" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "interval" << YAML::Value << num(c.beacon.beacon_interval);
    out << YAML::Key << "radio_range" << YAML::Value << num(c.beacon.radio_range);
    out << YAML::Key << "ldm_expiry" << YAML::Value << num(c.beacon.ldm_expiry);
    out << YAML::Key << "awareness_range" << YAML::Value << num(c.beacon.awareness_range);
    out << YAML::Key << "t_safe" << YAML::Value << num(c.beacon.t_safe);
    out << YAML::EndMap;

    const auto& st = c.settings;
    out << YAML::Key << "strategy_settings" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "silence_duration" << YAML::Value << num(st.silence_duration);
    out << YAML::Key << "max_silence" << YAML::Value << num(st.max_silence);
    out << YAML::Key << "red_light_duration" << YAML::Value << num(st.red_light_duration);
    out << YAML::Key << "speed_threshold" << YAML::Value << num(st.speed_threshold);
    out << YAML::Key << "min_group_size" << YAML::Value << st.min_group_size;
    out << YAML::Key << "ri_capacity" << YAML::Value << st.ri_capacity;
    out << YAML::Key << "privacy_threshold" << YAML::Value << num(st.privacy_threshold);
    out << YAML::EndMap;

    out << YAML::Key << "pseudonyms" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "min_usage" << YAML::Value << num(c.policy.min_usage_duration);
    out << YAML::Key << "max_parallel" << YAML::Value << c.policy.max_parallel;
    out << YAML::Key << "reuse_allowed" << YAML::Value << c.policy.reuse_allowed;
    out << YAML::Key << "pool_size" << YAML::Value << c.policy.pool_size;
    out << YAML::Key << "mix_override_allowed" << YAML::Value << c.policy.mix_override_allowed;
    out << YAML::EndMap;

    const auto& cs = c.controller;
    out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "lock_span" << YAML::Value << num(cs.lock_span);
    out << YAML::Key << "credits_per_event" << YAML::Value << num(cs.credits_per_event);
    out << YAML::Key << "incentive_delta" << YAML::Value << num(cs.incentive_delta);
    out << YAML::Key << "medium_threshold" << YAML::Value << num(cs.medium_threshold);
    out << YAML::Key << "advanced_threshold" << YAML::Value << num(cs.advanced_threshold);
    out << YAML::Key << "alpha_scale" << YAML::Value << num(cs.alpha_scale);
    out << YAML::Key << "auto_select" << YAML::Value << cs.auto_select;
    out << YAML::Key << "disclose_attacker" << YAML::Value << cs.disclose_attacker;
    out << YAML::Key << "linkage_noise" << YAML::Value << num(cs.linkage_noise);
    out << YAML::EndMap;

    const auto& d = c.attacker.deployment;
    out << YAML::Key << "attacker" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "coverage" << YAML::Value << control::to_string(d.coverage);
    out << YAML::Key << "fraction" << YAML::Value << num(d.fraction);
    out << YAML::Key << "cell_length" << YAML::Value << num(d.cell_length);
    out << YAML::Key << "spans" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : d.local_spans) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "segment" << YAML::Value << s.segment << YAML::Key
            << "start" << YAML::Value << num(s.start) << YAML::Key << "end" << YAML::Value << num(s.end)
            << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "capability" << YAML::Value << control::to_string(d.capability);
    out << YAML::Key << "power" << YAML::Value << control::to_string(d.power);
    out << YAML::Key << "power_schedule" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (auto p : c.attacker.power_schedule) out << control::to_string(p);
    out << YAML::EndSeq;
    if (!c.attacker.default_kernel) {
        out << YAML::Key << "gate_radius" << YAML::Value << num(d.gate_radius);
        out << YAML::Key << "kernel_sigma" << YAML::Value << num(d.kernel_sigma);
    }
    out << YAML::Key << "speed_sigma" << YAML::Value << num(d.speed_sigma);
    out << YAML::Key << "heading_penalty" << YAML::Value << num(d.heading_penalty);
    out << YAML::Key << "miss_mass" << YAML::Value << num(d.miss_mass);
    out << YAML::Key << "max_coast" << YAML::Value << num(d.max_coast);
    out << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "cam_log" << YAML::Value << c.cam_log;
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

double effective_alpha(const ScenarioConfig& cfg) {
    if (cfg.scenario == 3 && !cfg.sdn) return kStaticScenario3Alpha;
    return cfg.alpha;
}

control::ControllerConfig controller_config(const ScenarioConfig& cfg,
                                            std::optional<std::filesystem::path> sybil_dir) {
    control::ControllerConfig k;
    k.sdn = cfg.sdn;
    k.strategy = cfg.strategy;
    k.auto_select = cfg.controller.auto_select;
    k.settings = cfg.settings;
    k.attacker.coverage = cfg.attacker.deployment.coverage;
    k.attacker.capability = cfg.attacker.deployment.capability;
    k.attacker.power = cfg.attacker.power_schedule.empty() ? cfg.attacker.deployment.power
                                                           : cfg.attacker.power_schedule.front();
    k.attacker.sensitivity_alpha = effective_alpha(cfg);
    k.learning = {cfg.controller.medium_threshold, cfg.controller.advanced_threshold, cfg.controller.alpha_scale};
    k.incentives = {cfg.controller.credits_per_event, cfg.controller.incentive_delta};
    k.policy = cfg.policy;
    k.lock_span = cfg.controller.lock_span;
    k.reporting_epoch = cfg.reporting_epoch;
    k.alpha = effective_alpha(cfg);
    k.cooperative_prob = cfg.cooperative_prob;
    k.sybil_dir = std::move(sybil_dir);
    return k;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace sdlp::config
