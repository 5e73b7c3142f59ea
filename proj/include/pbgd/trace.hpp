#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pbgd/solver.hpp"

namespace pbgd {

// One line of trace.csv. Header is fixed:
//   t,sim_time,objective,grad_norm,dist_to_opt,gamma,responder_ids,round_duration
// responder_ids is semicolon-joined in arrival order, empty on the initial
// row; dist_to_opt is "nan" when the oracle was not computed.
struct TraceRow {
    long long t = 0;
    double sim_time = 0.0;
    double objective = 0.0;
    double grad_norm = 0.0;
    double dist_to_opt = 0.0;
    int gamma = 0;
    std::string responder_ids;
    double round_duration = 0.0;

    bool operator==(const TraceRow&) const = default;
};

inline constexpr const char* kTraceHeader =
    "t,sim_time,objective,grad_norm,dist_to_opt,gamma,responder_ids,round_duration";

// Shortest round-trip decimal form; reading the text back yields the same
// double, which is what makes traces byte-reproducible.
std::string format_double(double v);

TraceRow to_trace_row(const IterationRecord& rec, int gamma);
std::vector<TraceRow> to_trace_rows(const RunResult& result);

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

}  // namespace pbgd
