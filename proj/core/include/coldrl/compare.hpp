#pragma once

#include "coldrl/client.hpp"
#include "coldrl/sim.hpp"
#include "coldrl/train.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace coldrl {

struct CompareOptions {
    std::vector<std::string> policies;     // lru|lfu|size|arc|hybrid|coldrl|sidecar
    std::vector<std::uint64_t> capacities; // bytes
    std::optional<DuelingModel> model;     // required for coldrl/sidecar
    ClientConfig client;                   // for the sidecar policy
    std::size_t k = 16;
    AblationMask ablate{};
    bool parallel = true;
};

struct CompareRow {
    std::string policy;
    std::uint64_t capacity = 0;
    SimReport report;
    double fallback_rate = 0.0;
};

struct CompareReport {
    std::vector<CompareRow> rows;  // ordered by (capacity, policy as given)
    // capacity -> (coldrl - best classical) / best classical, on hit_ratio;
    // present only when a learned policy was compared against a classical one.
    std::map<std::uint64_t, double> improvement;
};

CompareReport run_compare(const Trace& trace, const CompareOptions& options);

// All renderings draw from the same pre-formatted numbers.
std::string render_table(const CompareReport& report);
std::string render_json(const CompareReport& report);
std::string render_csv(const CompareReport& report);

std::string sim_report_json(const SimReport& report);
std::string sim_report_table(const SimReport& report);

} // namespace coldrl
