#pragma once

// Privacy and safety measurements and the CSV run outputs.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sdlp/ids.hpp"

namespace sdlp::metrics {

struct MixEvent {
    double time = 0.0;
    std::string location;
    std::vector<VehicleId> participants;
    std::vector<VehicleId> changed;
    // Adversary's assignment distribution for each changed participant.
    std::vector<std::vector<double>> distributions;
};

// Throws std::invalid_argument for an event without participants.
std::size_t anonymity_set_size(const MixEvent& event);

// Shannon entropy in bits. Throws std::invalid_argument unless the
// probabilities are non-negative and sum to 1 within 1e-9.
double entropy(std::span<const double> distribution);

// Mean entropy over the changed participants' distributions; 0 without any.
double event_entropy(const MixEvent& event);

// Mean over steps and vehicles. Throws std::invalid_argument on an empty trace.
double avg_privacy(std::span<const std::vector<double>> levels_per_step);

struct RunSummary {
    int scenario = 1;
    std::string mode;
    std::uint64_t seed = 0;
    double avg_privacy = 0.0;
    double avg_safety_risk = 0.0;
    double tracking_success = 0.0;
    std::size_t changes = 0;
    std::string metric_selected;
};

struct TraceRow {
    double time = 0.0;
    VehicleId true_id;
    std::string strategy;
    double privacy_bits = 0.0;
    bool in_silence = false;
    bool locked = false;
    std::string context;
    PseudonymId active_pseudonym;
};

inline constexpr const char* kSummaryHeader =
    "scenario,mode,seed,avg_privacy,avg_safety_risk,tracking_success,changes,metric_selected";
inline constexpr const char* kTraceHeader =
    "time,true_id,strategy,privacy_bits,in_silence,locked,context,active_pseudonym";

// Doubles are written in shortest round-trip form so reruns are byte-identical.
void write_summary_csv(std::ostream& os, std::span<const RunSummary> rows);
void write_trace_header(std::ostream& os);
void write_trace_row(std::ostream& os, const TraceRow& row);

std::vector<RunSummary> read_summary_csv(std::istream& is);

}  // namespace sdlp::metrics
