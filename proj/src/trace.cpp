#include "pbgd/trace.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pbgd/errors.hpp"

namespace pbgd {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

TraceRow to_trace_row(const IterationRecord& rec, int gamma) {
    TraceRow row;
    row.t = rec.t;
    row.sim_time = rec.sim_time;
    row.objective = rec.objective;
    row.grad_norm = rec.grad_norm;
    row.dist_to_opt = rec.dist_to_opt;
    row.gamma = gamma;
    std::string ids;
    for (std::size_t i = 0; i < rec.responders.size(); ++i) {
        if (i > 0) ids += ';';
        ids += std::to_string(rec.responders[i]);
    }
    row.responder_ids = std::move(ids);
    row.round_duration = rec.round_duration;
    return row;
}

std::vector<TraceRow> to_trace_rows(const RunResult& result) {
    std::vector<TraceRow> rows;
    rows.reserve(result.trace.size());
    for (const auto& rec : result.trace) rows.push_back(to_trace_row(rec, result.gamma));
    return rows;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write trace file: " + path.string());
    out << kTraceHeader << '\n';
    for (const TraceRow& r : rows) {
        out << r.t << ',' << format_double(r.sim_time) << ',' << format_double(r.objective)
            << ',' << format_double(r.grad_norm) << ',' << format_double(r.dist_to_opt) << ','
            << r.gamma << ',' << r.responder_ids << ',' << format_double(r.round_duration)
            << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path.string());
}

namespace {

double parse_double_field(const std::string& s, const char* what) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ConfigError(std::string("trace: bad ") + what + " value '" + s + "'");
    return v;
}

}  // namespace

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trace file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty trace file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader) throw ConfigError("unexpected trace header: " + line);

    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t pos = line.find(','); ; pos = line.find(',', start)) {
            if (pos == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (fields.size() != 8)
            throw ConfigError("trace row has " + std::to_string(fields.size()) + " fields, want 8");
        TraceRow r;
        r.t = std::stoll(fields[0]);
        r.sim_time = parse_double_field(fields[1], "sim_time");
        r.objective = parse_double_field(fields[2], "objective");
        r.grad_norm = parse_double_field(fields[3], "grad_norm");
        r.dist_to_opt = parse_double_field(fields[4], "dist_to_opt");
        r.gamma = std::stoi(fields[5]);
        r.responder_ids = fields[6];
        r.round_duration = parse_double_field(fields[7], "round_duration");
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace pbgd
