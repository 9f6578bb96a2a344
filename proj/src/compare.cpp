#include "sdlp/compare.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sdlp/artifacts.hpp"
#include "sdlp/simulation.hpp"

namespace sdlp::compare {

namespace {

RunRecord record_of(const config::ScenarioConfig& cfg, const metrics::RunSummary& s) {
    return {s, config::effective_alpha(cfg), strategy::to_string(cfg.strategy), cfg.dangerous_fraction};
}

std::string alpha_label(double a) { return fmt::format("alpha={}", a); }

}  // namespace

RunRecord load_run(const std::filesystem::path& dir) {
    std::ifstream in(dir / "summary.csv");
    if (!in) throw std::runtime_error("missing " + (dir / "summary.csv").string());
    const auto rows = metrics::read_summary_csv(in);
    if (rows.size() != 1) throw std::runtime_error((dir / "summary.csv").string() + ": expected one row");
    const auto cfg = config::load_config(dir / "config.yaml");
    return record_of(cfg, rows.front());
}

double relative_privacy_gap(double static_privacy, double sdn_privacy) {
    if (static_privacy <= 0.0) return 0.0;
    return (static_privacy - sdn_privacy) / static_privacy;
}

Comparison compare_runs(const RunRecord& a, const RunRecord& b) {
    if (a.summary.scenario != b.summary.scenario) {
        throw std::invalid_argument(
            fmt::format("cannot compare scenario {} with scenario {}", a.summary.scenario, b.summary.scenario));
    }
    Comparison c{a, b, {}};
    if (a.summary.mode != b.summary.mode) {
        const auto& st = a.summary.mode == "static" ? a.summary : b.summary;
        const auto& sdn = a.summary.mode == "static" ? b.summary : a.summary;
        c.verdicts.push_back({"sdn safety_risk < static safety_risk", sdn.avg_safety_risk < st.avg_safety_risk});
        c.verdicts.push_back({"static privacy >= sdn privacy", st.avg_privacy >= sdn.avg_privacy});
        const double gap = relative_privacy_gap(st.avg_privacy, sdn.avg_privacy);
        c.verdicts.push_back({fmt::format("relative privacy gap {:.3f} <= {}", gap, kMaxPrivacyGap),
                              gap <= kMaxPrivacyGap});
    } else if (a.alpha != b.alpha) {
        const auto& lo = a.alpha < b.alpha ? a : b;
        const auto& hi = a.alpha < b.alpha ? b : a;
        c.verdicts.push_back({fmt::format("{} privacy > {} privacy", alpha_label(lo.alpha), alpha_label(hi.alpha)),
                              lo.summary.avg_privacy > hi.summary.avg_privacy});
    }
    return c;
}

std::string format_table(const Comparison& c) {
    auto name = [](const RunRecord& r) {
        return fmt::format("{} {} {}", r.summary.mode, r.strategy, alpha_label(r.alpha));
    };
    std::string out;
    out += fmt::format("{:<18}{:>28}{:>28}{:>14}\n", "metric", name(c.a), name(c.b), "delta(b-a)");
    auto row = [&](const char* label, double x, double y) {
        out += fmt::format("{:<18}{:>28.6f}{:>28.6f}{:>14.6f}\n", label, x, y, y - x);
    };
    row("avg_privacy", c.a.summary.avg_privacy, c.b.summary.avg_privacy);
    row("avg_safety_risk", c.a.summary.avg_safety_risk, c.b.summary.avg_safety_risk);
    row("tracking_success", c.a.summary.tracking_success, c.b.summary.tracking_success);
    row("changes", static_cast<double>(c.a.summary.changes), static_cast<double>(c.b.summary.changes));
    for (const auto& v : c.verdicts) out += fmt::format("[{}] {}\n", v.holds ? "holds" : "fails", v.statement);
    return out;
}

void write_comparison_csv(std::ostream& os, const Comparison& c) {
    os << "metric,a,b,delta\n";
    auto row = [&](const char* label, double x, double y) { os << fmt::format("{},{},{},{}\n", label, x, y, y - x); };
    row("avg_privacy", c.a.summary.avg_privacy, c.b.summary.avg_privacy);
    row("avg_safety_risk", c.a.summary.avg_safety_risk, c.b.summary.avg_safety_risk);
    row("tracking_success", c.a.summary.tracking_success, c.b.summary.tracking_success);
    row("changes", static_cast<double>(c.a.summary.changes), static_cast<double>(c.b.summary.changes));
    os << "verdict,holds\n";
    for (const auto& v : c.verdicts) os << fmt::format("\"{}\",{}\n", v.statement, v.holds ? 1 : 0);
}

std::vector<VerdictTally> run_batch(const config::ScenarioConfig& base, int seeds,
                                    const std::optional<std::filesystem::path>& out) {
    if (seeds < 1) throw std::invalid_argument("seeds must be >= 1");
    std::vector<VerdictTally> tallies;
    auto tally = [&](const std::string& statement, bool holds) {
        auto it = std::find_if(tallies.begin(), tallies.end(), [&](const auto& t) { return t.statement == statement; });
        if (it == tallies.end()) {
            tallies.push_back({statement, 0, 0});
            it = std::prev(tallies.end());
        }
        ++it->total;
        if (holds) ++it->passes;
    };

    for (int k = 0; k < seeds; ++k) {
        const std::uint64_t seed = base.seed + static_cast<std::uint64_t>(k);
        std::vector<std::pair<std::string, config::ScenarioConfig>> variants;
        auto variant = [&](std::string name, bool sdn, double alpha) {
            auto c = base;
            c.seed = seed;
            c.sdn = sdn;
            c.alpha = alpha;
            variants.emplace_back(std::move(name), std::move(c));
        };
        if (base.scenario == 3) {
            for (double a : {0.1, 0.2, 0.3}) variant(fmt::format("sdn_alpha_{}", a), true, a);
            variant("static", false, base.alpha);
        } else {
            variant("static", false, base.alpha);
            variant("sdn", true, base.alpha);
        }

        std::map<std::string, std::pair<config::ScenarioConfig, sim::RunResult>> runs;
        for (auto& [name, c] : variants) {
            spdlog::info("batch seed {} variant {}", seed, name);
            auto r = sim::run_scenario(c);
            if (out) io::write_artifacts(*out / fmt::format("seed_{}", seed) / name, c, r);
            runs.emplace(name, std::make_pair(c, std::move(r)));
        }
        auto rec = [&](const std::string& name) {
            const auto& [c, r] = runs.at(name);
            return record_of(c, r.summary);
        };

        switch (base.scenario) {
            case 1:
                for (const auto& v : compare_runs(rec("static"), rec("sdn")).verdicts) {
                    // Strip the per-seed number from the gap statement so tallies aggregate.
                    tally(v.statement.starts_with("relative privacy gap")
                              ? fmt::format("relative privacy gap <= {}", kMaxPrivacyGap)
                              : v.statement,
                          v.holds);
                }
                break;
            case 2:
                tally("sdn metric_selected == Size;Entropy;Entropy",
                      runs.at("sdn").second.summary.metric_selected == "Size;Entropy;Entropy");
                break;
            case 3: {
                const auto p1 = rec("sdn_alpha_0.1").summary.avg_privacy;
                const auto p2 = rec("sdn_alpha_0.2").summary.avg_privacy;
                const auto p3 = rec("sdn_alpha_0.3").summary.avg_privacy;
                tally("alpha=0.1 privacy > alpha=0.2 privacy", p1 > p2);
                tally("alpha=0.2 privacy > alpha=0.3 privacy", p2 > p3);
                const auto& alphas = runs.at("static").second.alpha_per_step;
                tally("static alpha constant at 0.3", std::all_of(alphas.begin(), alphas.end(), [](double a) {
                          return a == config::kStaticScenario3Alpha;
                      }));
                break;
            }
            default: break;
        }
    }

    if (out) {
        std::ofstream f(*out / "batch.csv", std::ios::binary | std::ios::trunc);
        write_batch_csv(f, tallies);
    }
    return tallies;
}

void write_batch_csv(std::ostream& os, const std::vector<VerdictTally>& tallies) {
    os << "verdict,passes,total,fraction\n";
    for (const auto& t : tallies) os << fmt::format("\"{}\",{},{},{}\n", t.statement, t.passes, t.total, t.fraction());
}

}  // namespace sdlp::compare
