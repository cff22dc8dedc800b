#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace coldrl {

struct RequestRecord {
    double ts = 0.0;           // seconds since trace start
    std::string key;
    std::uint64_t size = 0;    // bytes
    double ttl = 0.0;          // seconds
    double origin_rtt = 0.0;   // milliseconds

    bool operator==(const RequestRecord&) const = default;
};

struct TraceMeta {
    std::string generator;                    // "zipf", "trap", "file", ...
    std::uint64_t seed = 0;
    std::map<std::string, std::string> params; // parameter snapshot
};

struct Trace {
    std::vector<RequestRecord> records;  // sorted by ts, non-decreasing
    TraceMeta meta;
};

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// CSV schema: header `ts,key,size,ttl,origin_rtt_ms`, decimal seconds for
// ts/ttl, integer bytes for size, decimal milliseconds for origin_rtt.
// Keys must not contain commas or newlines.
Trace load_trace(std::istream& in);
Trace load_trace_file(const std::string& path);
void write_trace(const Trace& trace, std::ostream& out);
void write_trace_file(const Trace& trace, const std::string& path);

// Sum of sizes over distinct keys.
std::uint64_t working_set_bytes(const Trace& trace);

} // namespace coldrl
