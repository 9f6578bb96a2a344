#include "sdlp/artifacts.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace sdlp::io {

namespace {

std::ofstream open(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

void close(std::ofstream& out, const std::filesystem::path& p) {
    out.close();
    if (!out) throw std::runtime_error("failed writing " + p.string());
}

}  // namespace

void write_trace_csv(std::ostream& os, const sim::RunResult& run) {
    metrics::write_trace_header(os);
    for (const auto& row : run.trace) metrics::write_trace_row(os, row);
}

void write_artifacts(const std::filesystem::path& dir, const config::ScenarioConfig& cfg, const sim::RunResult& run) {
    std::filesystem::create_directories(dir);

    auto write = [&](const char* name, auto&& body) {
        const auto p = dir / name;
        auto out = open(p);
        body(out);
        close(out, p);
    };

    write("summary.csv", [&](std::ostream& os) { metrics::write_summary_csv(os, std::span(&run.summary, 1)); });
    write("trace.csv", [&](std::ostream& os) { write_trace_csv(os, run); });
    write("changes.csv", [&](std::ostream& os) {
        os << "time,true_id,old_id,new_id,context\n";
        for (const auto& c : run.changes) {
            os << fmt::format("{},{},{},{},{}\n", c.time, c.true_id.value, c.old_id.value, c.new_id.value, c.context);
        }
    });
    write("actions.csv", [&](std::ostream& os) {
        os << "time,true_id,strategy,action\n";
        for (const auto& a : run.actions) {
            os << fmt::format("{},{},{},{}\n", a.time, a.true_id.value, a.strategy, a.action);
        }
    });
    write("mix_events.csv", [&](std::ostream& os) {
        os << "time,location,participants,anonymity_set_size,entropy\n";
        for (const auto& e : run.mix_events) {
            os << fmt::format("{},{},{},{},{}\n", e.time, e.location, e.participants.size(),
                              metrics::anonymity_set_size(e), metrics::event_entropy(e));
        }
    });
    write("locks.csv", [&](std::ostream& os) {
        os << "true_id,from,until,priority\n";
        for (const auto& l : run.locks) os << fmt::format("{},{},{},{}\n", l.true_id.value, l.from, l.until, l.priority);
    });
    write("tracks.csv", [&](std::ostream& os) { os << run.tracks_csv; });
    write("config.yaml", [&](std::ostream& os) { os << config::dump_config(cfg); });
    if (!run.protocol.empty()) {
        write("protocol.jsonl", [&](std::ostream& os) {
            for (const auto& line : run.protocol) os << line << '\n';
        });
    }
    if (run.cam_trace) {
        write("cams.csv", [&](std::ostream& os) {
            os << "time,sender,pseudonym,segment,offset,speed\n";
            for (const auto& round : run.cam_trace->rounds) {
                for (const auto& s : round.cams) {
                    os << fmt::format("{},{},{},{},{},{}\n", round.time, s.sender.value, s.cam.pseudonym.value,
                                      s.cam.segment, s.cam.offset, s.cam.speed);
                }
            }
        });
    }
}

}  // namespace sdlp::io
