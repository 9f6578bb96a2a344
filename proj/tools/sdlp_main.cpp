#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "sdlp/artifacts.hpp"
#include "sdlp/compare.hpp"
#include "sdlp/config.hpp"
#include "sdlp/simulation.hpp"

namespace {

void init_logging() {
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("SDLP_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
    spdlog::set_pattern("[%l] %v");
}

}  // namespace

int main(int argc, char** argv) {
    init_logging();
    CLI::App app{"sdlp: location-privacy simulator for vehicular networks"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool record_protocol = false;
    std::string mode;
    auto* run = app.add_subcommand("run", "Run one scenario and write its artifacts");
    run->add_option("--config", config_path, "Scenario YAML")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--mode", mode, "Override the config mode")->check(CLI::IsMember({"static", "sdn"}));
    run->add_flag("--record-protocol", record_protocol, "Write control/data messages to protocol.jsonl");

    std::string dir_a;
    std::string dir_b;
    std::string csv_path;
    auto* cmp = app.add_subcommand("compare", "Compare two run directories");
    cmp->add_option("dirA", dir_a)->required()->check(CLI::ExistingDirectory);
    cmp->add_option("dirB", dir_b)->required()->check(CLI::ExistingDirectory);
    cmp->add_option("--csv", csv_path, "Also write the comparison as CSV");

    int seeds = 10;
    auto* batch = app.add_subcommand("batch", "Run the scenario's comparison set over consecutive seeds");
    batch->add_option("--config", config_path, "Scenario YAML")->required()->check(CLI::ExistingFile);
    batch->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
    batch->add_option("--out", out_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto cfg = sdlp::config::load_config(config_path);
            if (seed) cfg.seed = *seed;
            if (!mode.empty()) cfg.sdn = mode == "sdn";
            std::filesystem::create_directories(out_dir);
            sdlp::sim::RunOptions opts;
            opts.record_protocol = record_protocol;
            opts.keep_cams = cfg.cam_log;
            opts.exchange_dir = out_dir;
            const auto result = sdlp::sim::run_scenario(cfg, opts);
            sdlp::io::write_artifacts(out_dir, cfg, result);
            const auto& s = result.summary;
            std::cout << fmt::format("scenario {} {} seed {}: privacy {:.4f} risk {:.4f} tracking {:.4f} changes {} metric {}\n",
                                     s.scenario, s.mode, s.seed, s.avg_privacy, s.avg_safety_risk, s.tracking_success,
                                     s.changes, s.metric_selected);
        } else if (*cmp) {
            const auto c = sdlp::compare::compare_runs(sdlp::compare::load_run(dir_a), sdlp::compare::load_run(dir_b));
            std::cout << sdlp::compare::format_table(c);
            if (!csv_path.empty()) {
                std::ofstream f(csv_path);
                sdlp::compare::write_comparison_csv(f, c);
            }
        } else if (*batch) {
            const auto cfg = sdlp::config::load_config(config_path);
            std::filesystem::create_directories(out_dir);
            const auto tallies = sdlp::compare::run_batch(cfg, seeds, std::filesystem::path(out_dir));
            for (const auto& t : tallies) {
                std::cout << fmt::format("{}/{} ({:.2f})  {}\n", t.passes, t.total, t.fraction(), t.statement);
            }
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
