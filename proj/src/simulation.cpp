#include "sdlp/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "sdlp/beacon_plane.hpp"
#include "sdlp/controller.hpp"
#include "sdlp/pseudonym_store.hpp"
#include "sdlp/road_world.hpp"
#include "sdlp/strategy_plane.hpp"

namespace sdlp::sim {

namespace {

constexpr std::uint64_t kWorldStream = 1;
constexpr std::uint64_t kCooperationStream = 2;
constexpr std::uint64_t kAdversaryStream = 3;
constexpr std::uint64_t kNoiseStream = 4;

using strategy::StrategyId;

struct PendingGain {
    PseudonymId from;
    PseudonymId to;
    double changed_at = 0.0;
    std::string location;
};

control::Power scheduled_power(const config::ScenarioConfig& cfg, double t) {
    const auto& sched = cfg.attacker.power_schedule;
    if (sched.empty()) return cfg.attacker.deployment.power;
    const auto k = sched.size();
    auto idx = static_cast<std::size_t>(std::floor(t * static_cast<double>(k) / cfg.duration + 1e-9));
    return sched[std::min(idx, k - 1)];
}

// Vehicles sharing a mixing context with the ticking vehicle, as each strategy counts them.
std::vector<int> group_sizes(StrategyId selected, const world::WorldState& world,
                             const std::vector<world::TopologyContext>& ctx,
                             const std::vector<strategy::PcsState>& states, double speed_threshold) {
    const auto n = world.vehicles.size();
    std::vector<int> out(n, 0);
    std::map<int, int> per_place;
    auto place = [&](std::size_t i) -> std::optional<int> {
        if (const auto* s = std::get_if<world::context::SignalizedIntersection>(&ctx[i])) return s->id;
        if (const auto* z = std::get_if<world::context::CongestedSegment>(&ctx[i])) return z->zone;
        return std::nullopt;
    };
    auto counts = [&](std::size_t i) {
        const auto& v = world.vehicles[i];
        switch (selected) {
            case StrategyId::UPCS: return states[i].silent && ctx[i].index() == 0;
            case StrategyId::SocialSpots: return ctx[i].index() == 0 && v.speed <= 1e-9 && !v.inside_infrastructure;
            case StrategyId::TAPCS: return ctx[i].index() == 1 && v.speed < speed_threshold;
            case StrategyId::PRIVANET: return false;
        }
        return false;
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (counts(i)) ++per_place[*place(i)];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = place(i);
        if (!p) continue;
        const auto it = per_place.find(*p);
        int g = it == per_place.end() ? 0 : it->second;
        // TAPCS counts the other slow vehicles; the intersection strategies count the whole group.
        if (selected == StrategyId::TAPCS && counts(i)) --g;
        out[i] = g;
    }
    return out;
}

}  // namespace

adversary::SnifferDeployment run_deployment(const config::ScenarioConfig& cfg, const world::RoadMap& map) {
    auto d = cfg.attacker.deployment;
    d.beacon_interval = cfg.beacon.beacon_interval;
    if (cfg.attacker.default_kernel) d = adversary::with_default_kernel(d, map.segments().front().speed_limit);
    d.seed = config::derive_seed(cfg.seed, kAdversaryStream);
    d.power = scheduled_power(cfg, 0.0);
    return d;
}

RunResult run_scenario(const config::ScenarioConfig& cfg, const RunOptions& options) {
    config::validate(cfg);
    const auto map = config::build_map(cfg);
    const double dt = cfg.world.dt;
    const auto n_steps = static_cast<std::uint64_t>(std::llround(cfg.duration / dt));
    const auto epoch_steps = static_cast<std::uint64_t>(std::llround(cfg.reporting_epoch / dt));

    world::PopulationSpec pop;
    pop.count = cfg.vehicles;
    pop.desired_speed_min_factor = cfg.desired_speed_min_factor;
    pop.position_jitter = cfg.position_jitter;
    pop.dangerous_fraction = cfg.dangerous_fraction;
    pop.cooperative_prob = cfg.cooperative_prob;
    auto world = world::make_world(map, cfg.world, pop, config::derive_seed(cfg.seed, kWorldStream));
    const auto n = world.vehicles.size();

    pseudonym::PseudonymIssuer issuer;
    std::vector<pseudonym::PseudonymPool> pools;
    std::unordered_map<PseudonymId, VehicleId> owner_of;
    for (const auto& v : world.vehicles) {
        pools.push_back(pseudonym::make_pool(v.true_id, cfg.policy, issuer, 0.0));
        owner_of[pools.back().active.id] = v.true_id;
    }
    std::vector<strategy::LocalStore> stores(n);
    std::vector<strategy::PcsState> states(n);
    auto ldms = beacon::make_ldms(world, cfg.beacon.ldm_expiry);

    const double cap = std::log2(static_cast<double>(n));
    auto ledger = control::make_ledger(n, cfg.initial_privacy.value_or(cap));

    const auto deployment = run_deployment(cfg, *map);
    adversary::Adversary adv(map, deployment);

    control::SdlpController controller(config::controller_config(cfg, options.exchange_dir));
    control::Channel<control::ContextReport> uplink;
    control::Channel<control::ControlDirective> downlink;

    std::mt19937_64 coop_rng(config::derive_seed(cfg.seed, kCooperationStream));
    std::mt19937_64 noise_rng(config::derive_seed(cfg.seed, kNoiseStream));

    RunResult result;
    if (options.keep_cams) result.cam_trace.emplace();
    std::vector<adversary::GroundTruthPair> pairs;
    std::vector<std::optional<PendingGain>> pending(n);
    std::map<std::pair<double, std::string>, metrics::MixEvent> events;
    std::vector<std::vector<double>> levels;
    levels.reserve(n_steps);
    double alpha = config::effective_alpha(cfg);
    double risk_sum = 0.0;

    // Per-epoch accumulators for the next report.
    std::size_t epoch_stale = 0;
    std::size_t epoch_pairs = 0;
    std::set<VehicleId> epoch_selfish;
    std::vector<control::ChangeRecord> epoch_changes;
    int bridged_seen = 0;

    auto active_ids = [&] {
        std::vector<PseudonymId> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = pools[i].active.id;
        return a;
    };

    auto make_report = [&](double t, const std::vector<world::TopologyContext>& ctx) {
        control::ContextReport r;
        r.time = t;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& v = world.vehicles[i];
            r.vehicles.push_back(
                {v.true_id, world::kind_of(ctx[i]), world::context_label(ctx[i]), v.speed, ledger.level[i], v.dangerous});
            if (v.dangerous) r.dangerous.push_back(v.true_id);
        }
        r.stale_pairs = epoch_stale;
        r.total_pairs = epoch_pairs;
        r.selfish.assign(epoch_selfish.begin(), epoch_selfish.end());
        if (!pairs.empty()) {
            double rho = adversary::tracking_success(adv, pairs);
            if (cfg.controller.linkage_noise > 0.0) {
                std::normal_distribution<double> noise(0.0, cfg.controller.linkage_noise);
                rho += noise(noise_rng);
            }
            r.observed_linkage_ratio = std::clamp(rho, 0.0, 1.0);
        }
        r.bridged_silences = adv.bridged_silences() - bridged_seen;
        bridged_seen = adv.bridged_silences();
        r.changes = epoch_changes;
        if (cfg.controller.disclose_attacker) {
            r.observed_power = adv.deployment().power;
            r.observed_alpha = config::effective_alpha(cfg);
        }
        epoch_stale = 0;
        epoch_pairs = 0;
        epoch_selfish.clear();
        epoch_changes.clear();
        return r;
    };

    auto exchange = [&](const control::ContextReport& report, bool first) {
        uplink.send(report);
        auto msg = uplink.receive();
        if (options.record_protocol) result.protocol.push_back(control::to_json(*msg).dump());
        std::optional<control::ControlDirective> d;
        if (first) {
            d = controller.start(*msg);
        } else {
            d = controller.on_report(*msg);
        }
        if (d) {
            if (options.record_protocol) result.protocol.push_back(control::to_json(*d).dump());
            result.directives.push_back(*d);
            downlink.send(std::move(*d));
        }
    };

    {
        std::vector<world::TopologyContext> ctx0;
        for (const auto& v : world.vehicles) ctx0.push_back(world::detect_context(v, world));
        exchange(make_report(0.0, ctx0), true);
    }

    for (std::uint64_t step = 0; step < n_steps; ++step) {
        const double t = world.time;
        adv.set_power(scheduled_power(cfg, t));

        // 1. Directives that crossed the channel take effect at this step boundary.
        while (auto d = downlink.receive()) {
            alpha = d->sensitivity_alpha;
            for (std::size_t i = 0; i < n; ++i) {
                const auto before = stores[i].lock.locked_until;
                auto ingest = strategy::inspector_ingest(stores[i], *d, world.vehicles[i].true_id, t);
                if (!ingest.accepted) {
                    spdlog::warn("vehicle {} rejected directive issued at {}: {}", i, d->issued_at, ingest.error);
                    continue;
                }
                stores[i] = std::move(ingest.store);
                if (stores[i].lock.locked_until != before && stores[i].lock.locked_until) {
                    result.locks.push_back({world.vehicles[i].true_id, t, *stores[i].lock.locked_until,
                                            stores[i].lock.priority});
                }
                if (stores[i].policy && !(pools[i].policy == *stores[i].policy)) pools[i].policy = *stores[i].policy;
                if (stores[i].cooperative_prob) world.vehicles[i].cooperative_prob = *stores[i].cooperative_prob;
            }
        }

        // 2. Contexts and strategy ticks.
        std::vector<world::TopologyContext> ctx(n);
        for (std::size_t i = 0; i < n; ++i) ctx[i] = world::detect_context(world.vehicles[i], world);

        const auto selected = stores[0].selected;
        std::vector<strategy::TickResult> ticks(n);
        if (selected) {
            const auto settings_it = stores[0].settings.find(*selected);
            const double threshold =
                settings_it == stores[0].settings.end() ? cfg.settings.speed_threshold : settings_it->second.speed_threshold;
            const auto groups = group_sizes(*selected, world, ctx, states, threshold);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& store = stores[i];
                strategy::TickInput in;
                in.vehicle = world.vehicles[i];
                in.context = ctx[i];
                if (auto it = store.settings.find(*selected); it != store.settings.end()) in.settings = it->second;
                in.pool_view = pseudonym::can_change(pools[i], store.lock, t, true);
                in.state = states[i];
                in.now = t;
                in.dt = dt;
                in.beacon_interval = cfg.beacon.beacon_interval;
                in.group_size = groups[i];
                in.privacy_level = ledger.level[i];
                if (const auto& stay = world.vehicles[i].inside_infrastructure) {
                    in.exit_clear = world::exit_clear(world, stay->id);
                }
                if (strategy::at_mix_opportunity(*selected, in)) {
                    std::bernoulli_distribution coop(world.vehicles[i].cooperative_prob);
                    in.cooperative = coop(coop_rng);
                }
                ticks[i] = strategy::engine_dispatch(*selected, store, in);
            }
        } else {
            for (auto& tk : ticks) tk.actions = {strategy::action::Hold{}};
        }

        // 3. Apply actions in id order so capacity checks see earlier entries.
        const std::string strategy_name = selected ? strategy::to_string(*selected) : "none";
        for (std::size_t i = 0; i < n; ++i) {
            auto& tk = ticks[i];
            const VehicleId id = world.vehicles[i].true_id;
            if (tk.refused) {
                ++result.refusals;
                spdlog::debug("t={} vehicle {} change refused: {}", t, i, pseudonym::to_string(*tk.refused));
            }
            if (tk.selfish) epoch_selfish.insert(id);
            for (auto& a : tk.actions) {
                if (auto* e = std::get_if<strategy::action::EnterInfrastructure>(&a)) {
                    if (world::free_slots(world, e->id) <= 0) {
                        a = strategy::action::Hold{};
                        continue;
                    }
                    world::enter_infrastructure(world, id, e->id);
                } else if (std::holds_alternative<strategy::action::ChangePseudonym>(a)) {
                    const PseudonymId old = pools[i].active.id;
                    if (pseudonym::can_change(pools[i], stores[i].lock, t, false) == pseudonym::RefusalReason::TooSoon) {
                        spdlog::debug("t={} vehicle {} uses the mix-event minimum-usage override", t, i);
                    }
                    auto changed = pseudonym::change_pseudonym(std::move(pools[i]), stores[i].lock, t, true);
                    pools[i] = std::move(changed.pool);
                    owner_of[changed.new_id] = id;
                    const auto label = world::context_label(ctx[i]);
                    control::ChangeRecord rec{t, id, old, changed.new_id, label};
                    result.changes.push_back(rec);
                    epoch_changes.push_back(rec);
                    pending[i] = PendingGain{old, changed.new_id, t, label};
                    auto& ev = events[{t, label}];
                    ev.time = t;
                    ev.location = label;
                    ev.participants.push_back(id);
                    ev.changed.push_back(id);
                } else if (std::holds_alternative<strategy::action::ExitInfrastructure>(a)) {
                    world::exit_infrastructure(world, id);
                }
            }
            if (tk.selfish) {
                auto& ev = events[{t, world::context_label(ctx[i])}];
                ev.time = t;
                ev.location = world::context_label(ctx[i]);
                ev.participants.push_back(id);
            }
            std::erase_if(tk.actions,
                          [](const strategy::PcsAction& a) { return std::holds_alternative<strategy::action::Hold>(a); });
            for (const auto& a : tk.actions) result.actions.push_back({t, id, strategy_name, strategy::to_string(a)});
            states[i] = strategy::advance_state(states[i], tk.actions, ctx[i], t, tk.selfish);
        }
        for (const auto& infra : map->infrastructures()) {
            result.max_infrastructure_overflow =
                std::max(result.max_infrastructure_overflow, world::occupancy(world, infra.id) - infra.capacity);
        }

        // 4. Beacons, LDMs and safety.
        std::vector<bool> silent_vec(n);
        for (std::size_t i = 0; i < n; ++i) {
            silent_vec[i] = states[i].silent;
            if (states[i].silent) ++result.silence_steps;
        }
        const std::unique_ptr<bool[]> silent(new bool[n]);
        std::copy(silent_vec.begin(), silent_vec.end(), silent.get());
        const auto active = active_ids();
        const auto cams =
            beacon::broadcast_round(world, std::span<const bool>(silent.get(), n), active, cfg.beacon.beacon_interval);
        beacon::update_ldms(ldms, cams, world, cfg.beacon.radio_range);
        const auto stats = beacon::safety_risk(world, ldms, active, cfg.beacon.awareness_range, cfg.beacon.t_safe);
        const auto anomalies =
            beacon::ldm_anomalies(world, ldms, active, owner_of, cfg.beacon.awareness_range, cfg.beacon.t_safe);
        result.missing_vehicles += anomalies.missing;
        result.guest_vehicles += anomalies.guest;
        epoch_stale += stats.stale;
        epoch_pairs += stats.pairs;
        risk_sum += stats.fraction();
        result.risk_per_step.push_back(stats.fraction());

        // 5. Adversary, then the privacy gains of pseudonyms that just went on air.
        const auto observed = adversary::observe_round(cams, adv.mask());
        adv.link_step(observed, t);
        if (result.cam_trace) result.cam_trace->rounds.push_back({t, cams});

        std::vector<control::PrivacyGain> gains;
        for (const auto& sent : cams) {
            const std::size_t i = sent.sender.value;
            if (!pending[i] || pending[i]->to != sent.cam.pseudonym) continue;
            const auto& pg = *pending[i];
            pairs.push_back({pg.from, pg.to});
            double bits = cap;
            const auto* dec = adv.decision(pg.from, t);
            if (dec && adv.mask().covers(sent.cam.segment, sent.cam.offset)) {
                const auto it = std::find(dec->candidates.begin(), dec->candidates.end(), pg.to);
                if (it != dec->candidates.end()) {
                    std::vector<double> dist = dec->distribution.probs;
                    if (dec->distribution.miss > 0.0) dist.push_back(dec->distribution.miss);
                    bits = metrics::entropy(dist);
                    events[{pg.changed_at, pg.location}].distributions.push_back(std::move(dist));
                }
            }
            gains.push_back({sent.sender, bits});
            pending[i].reset();
        }
        ledger = control::privacy_update(std::move(ledger), gains, alpha, dt, t);
        levels.push_back(ledger.level);
        result.alpha_per_step.push_back(alpha);

        // 6. Trace rows.
        for (std::size_t i = 0; i < n; ++i) {
            result.trace.push_back({t, world.vehicles[i].true_id,
                                    stores[i].selected ? strategy::to_string(*stores[i].selected) : "none",
                                    ledger.level[i], states[i].silent, stores[i].lock.locked_at(t),
                                    world::context_label(ctx[i]), pools[i].active.id});
        }

        // 7. Reporting epoch: the answer is delivered at the next step boundary.
        if (step > 0 && step % epoch_steps == 0) exchange(make_report(t, ctx), false);

        world = world::step_world(world);
    }

    result.summary.scenario = cfg.scenario;
    result.summary.mode = cfg.mode_name();
    result.summary.seed = cfg.seed;
    result.summary.avg_privacy = metrics::avg_privacy(levels);
    result.summary.avg_safety_risk = n_steps > 0 ? risk_sum / static_cast<double>(n_steps) : 0.0;
    result.summary.tracking_success = adversary::tracking_success(adv, pairs);
    result.summary.changes = result.changes.size();
    result.summary.metric_selected = controller.metric_summary();

    for (auto& [key, ev] : events) result.mix_events.push_back(std::move(ev));
    std::ostringstream tracks;
    adv.write_tracks_csv(tracks);
    result.tracks_csv = tracks.str();
    if (result.cam_trace) result.cam_trace->pairs = pairs;
    return result;
}

double replay_tracking_success(std::shared_ptr<const world::RoadMap> map, const CamTrace& trace,
                               adversary::SnifferDeployment deployment) {
    adversary::Adversary adv(map, std::move(deployment));
    for (const auto& round : trace.rounds) adv.link_step(adversary::observe_round(round.cams, adv.mask()), round.time);
    return adversary::tracking_success(adv, trace.pairs);
}

}  // namespace sdlp::sim
