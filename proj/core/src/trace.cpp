#include "coldrl/trace.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace coldrl {

namespace {

constexpr const char* kHeader = "ts,key,size,ttl,origin_rtt_ms";

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw TraceError("trace csv: line " + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view field, std::size_t line_no, const char* name) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        fail(line_no, std::string("bad ") + name + " '" + std::string(field) + "'");
    return v;
}

std::uint64_t parse_size(std::string_view field, std::size_t line_no) {
    if (!field.empty() && field.front() == '-')
        fail(line_no, "negative size '" + std::string(field) + "'");
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        fail(line_no, "bad size '" + std::string(field) + "'");
    return v;
}

} // namespace

Trace load_trace(std::istream& in) {
    Trace trace;
    trace.meta.generator = "file";

    std::string line;
    if (!std::getline(in, line)) throw TraceError("trace csv: empty stream, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw TraceError("trace csv: line 1: bad header '" + line + "', expected '" + kHeader + "'");

    std::unordered_map<std::string, std::uint64_t> key_sizes;
    double prev_ts = -1.0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::string_view rest = line;
        std::string_view fields[5];
        for (int i = 0; i < 5; ++i) {
            auto comma = rest.find(',');
            if (i < 4) {
                if (comma == std::string_view::npos) fail(line_no, "expected 5 fields");
                fields[i] = rest.substr(0, comma);
                rest.remove_prefix(comma + 1);
            } else {
                if (comma != std::string_view::npos) fail(line_no, "expected 5 fields");
                fields[i] = rest;
            }
        }

        RequestRecord rec;
        rec.ts = parse_double(fields[0], line_no, "ts");
        rec.key = std::string(fields[1]);
        rec.size = parse_size(fields[2], line_no);
        rec.ttl = parse_double(fields[3], line_no, "ttl");
        rec.origin_rtt = parse_double(fields[4], line_no, "origin_rtt_ms");

        if (rec.ts < 0) fail(line_no, "negative ts");
        if (rec.key.empty()) fail(line_no, "empty key");
        if (rec.size < 1) fail(line_no, "size must be >= 1");
        if (rec.ttl <= 0) fail(line_no, "ttl must be > 0");
        if (rec.origin_rtt < 0) fail(line_no, "negative origin_rtt_ms");
        if (rec.ts < prev_ts) fail(line_no, "non-monotonic ts");
        prev_ts = rec.ts;

        auto [it, inserted] = key_sizes.emplace(rec.key, rec.size);
        if (!inserted && it->second != rec.size)
            fail(line_no, "size conflict for key '" + rec.key + "': " +
                          std::to_string(rec.size) + " vs " + std::to_string(it->second));

        trace.records.push_back(std::move(rec));
    }
    return trace;
}

Trace load_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TraceError("cannot open trace file '" + path + "'");
    return load_trace(in);
}

void write_trace(const Trace& trace, std::ostream& out) {
    out << kHeader << '\n';
    char buf[256];
    for (const auto& rec : trace.records) {
        // 6 decimals keep ts/ttl round trips within 1 us.
        int n = std::snprintf(buf, sizeof(buf), "%.6f,%s,%llu,%.6f,%.3f\n",
                              rec.ts, rec.key.c_str(),
                              static_cast<unsigned long long>(rec.size),
                              rec.ttl, rec.origin_rtt);
        out.write(buf, n);
    }
    if (!out) throw TraceError("trace csv: write failure");
}

void write_trace_file(const Trace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TraceError("cannot open output file '" + path + "'");
    write_trace(trace, out);
    out.flush();
    if (!out) throw TraceError("trace csv: write failure on '" + path + "'");
}

std::uint64_t working_set_bytes(const Trace& trace) {
    std::unordered_set<std::string> seen;
    std::uint64_t total = 0;
    for (const auto& rec : trace.records)
        if (seen.insert(rec.key).second) total += rec.size;
    return total;
}

} // namespace coldrl
