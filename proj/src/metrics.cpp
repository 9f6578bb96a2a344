#include "sdlp/metrics.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace sdlp::metrics {

std::size_t anonymity_set_size(const MixEvent& event) {
    if (event.participants.empty()) throw std::invalid_argument("mix event without participants");
    return event.changed.size();
}

double entropy(std::span<const double> distribution) {
    double sum = 0.0;
    double h = 0.0;
    for (double p : distribution) {
        if (!(p >= 0.0)) throw std::invalid_argument(fmt::format("negative probability {}", p));
        sum += p;
        if (p > 0.0) h -= p * std::log2(p);
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument(fmt::format("probabilities sum to {}", sum));
    return h;
}

double event_entropy(const MixEvent& event) {
    if (event.distributions.empty()) return 0.0;
    double total = 0.0;
    for (const auto& d : event.distributions) total += entropy(d);
    return total / static_cast<double>(event.distributions.size());
}

double avg_privacy(std::span<const std::vector<double>> levels_per_step) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& step : levels_per_step) {
        for (double x : step) sum += x;
        n += step.size();
    }
    if (n == 0) throw std::invalid_argument("empty privacy trace");
    return sum / static_cast<double>(n);
}

void write_summary_csv(std::ostream& os, std::span<const RunSummary> rows) {
    os << kSummaryHeader << '\n';
    for (const auto& r : rows) {
        os << fmt::format("{},{},{},{},{},{},{},{}\n", r.scenario, r.mode, r.seed, r.avg_privacy, r.avg_safety_risk,
                          r.tracking_success, r.changes, r.metric_selected);
    }
}

void write_trace_header(std::ostream& os) { os << kTraceHeader << '\n'; }

void write_trace_row(std::ostream& os, const TraceRow& r) {
    os << fmt::format("{},{},{},{},{},{},{},{}\n", r.time, r.true_id.value, r.strategy, r.privacy_bits,
                      r.in_silence ? 1 : 0, r.locked ? 1 : 0, r.context, r.active_pseudonym.value);
}

std::vector<RunSummary> read_summary_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kSummaryHeader) {
        throw std::runtime_error("summary.csv: unexpected header '" + line + "'");
    }
    std::vector<RunSummary> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 8) throw std::runtime_error("summary.csv: expected 8 fields in '" + line + "'");
        RunSummary r;
        r.scenario = std::stoi(f[0]);
        r.mode = f[1];
        r.seed = std::stoull(f[2]);
        r.avg_privacy = std::stod(f[3]);
        r.avg_safety_risk = std::stod(f[4]);
        r.tracking_success = std::stod(f[5]);
        r.changes = std::stoull(f[6]);
        r.metric_selected = f[7];
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace sdlp::metrics
