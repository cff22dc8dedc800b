#include "coldrl/compare.hpp"
#include "coldrl/coldrl_policy.hpp"
#include "coldrl/policies.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <future>
#include <set>
#include <sstream>

namespace coldrl {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool is_learned(const std::string& name) { return name == "coldrl" || name == "sidecar"; }

std::unique_ptr<EvictionPolicy> instantiate(const std::string& name,
                                            const CompareOptions& opt) {
    if (name == "coldrl") {
        if (!opt.model) throw std::invalid_argument("policy 'coldrl' requires a model");
        return std::make_unique<ColdRlPolicy>(*opt.model, opt.k, opt.ablate);
    }
    if (name == "sidecar") {
        if (!opt.model) throw std::invalid_argument("policy 'sidecar' requires a model");
        ClientConfig cfg = opt.client;
        cfg.k = opt.k;
        return std::make_unique<SidecarPolicy>(cfg, opt.model->norm, opt.ablate);
    }
    return make_classical_policy(name);
}

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

} // namespace

CompareReport run_compare(const Trace& trace, const CompareOptions& opt) {
    if (opt.policies.empty()) throw std::invalid_argument("compare: no policies");
    if (opt.capacities.empty()) throw std::invalid_argument("compare: no capacities");

    struct Task {
        std::string policy;
        std::uint64_t capacity;
    };
    std::vector<Task> tasks;
    for (auto cap : opt.capacities)
        for (const auto& p : opt.policies) tasks.push_back({p, cap});

    auto run_one = [&](const Task& t) {
        auto policy = instantiate(t.policy, opt);
        CompareRow row;
        row.policy = t.policy;
        row.capacity = t.capacity;
        row.report = replay(trace, t.capacity, *policy);
        if (row.report.eviction_events > 0)
            row.fallback_rate = static_cast<double>(row.report.fallback_events) /
                                static_cast<double>(row.report.eviction_events);
        return row;
    };

    CompareReport report;
    report.rows.resize(tasks.size());
    if (opt.parallel && tasks.size() > 1) {
        std::vector<std::future<CompareRow>> futures;
        futures.reserve(tasks.size());
        for (const auto& t : tasks)
            futures.push_back(std::async(std::launch::async, run_one, t));
        for (std::size_t i = 0; i < tasks.size(); ++i) report.rows[i] = futures[i].get();
    } else {
        for (std::size_t i = 0; i < tasks.size(); ++i) report.rows[i] = run_one(tasks[i]);
    }

    // Improvement of the learned policy over the best classical baseline.
    for (auto cap : opt.capacities) {
        double best_classical = -1.0, learned = -1.0;
        for (const auto& row : report.rows) {
            if (row.capacity != cap) continue;
            if (is_learned(row.policy)) learned = std::max(learned, row.report.hit_ratio);
            else best_classical = std::max(best_classical, row.report.hit_ratio);
        }
        if (learned >= 0.0 && best_classical > 0.0)
            report.improvement[cap] = (learned - best_classical) / best_classical;
    }
    return report;
}

std::string render_table(const CompareReport& report) {
    std::ostringstream out;
    out << "policy    capacity        hit_ratio  byte_hit   evictions  fallback  "
           "p50_us     p95_us     p99_us\n";
    char buf[256];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof(buf),
                      "%-9s %-15llu %-10s %-10s %-10llu %-9s %-10.1f %-10.1f %-10.1f\n",
                      r.policy.c_str(), static_cast<unsigned long long>(r.capacity),
                      fmt(r.report.hit_ratio).c_str(), fmt(r.report.byte_hit_ratio).c_str(),
                      static_cast<unsigned long long>(r.report.evictions),
                      fmt(r.fallback_rate, 4).c_str(),
                      r.report.decision_latency.p50_us, r.report.decision_latency.p95_us,
                      r.report.decision_latency.p99_us);
        out << buf;
    }
    for (const auto& [cap, imp] : report.improvement) {
        std::snprintf(buf, sizeof(buf),
                      "improvement vs best classical @ %llu: %+.1f%%\n",
                      static_cast<unsigned long long>(cap), imp * 100.0);
        out << buf;
    }
    // Context only: the published production results, different hardware and
    // proprietary traces. Never asserted.
    out << "published reference hit ratios: LRU 0.089/0.623/0.916, "
           "ARC 0.144/0.753/0.919, Cold-RL 0.354/0.868/0.918 (high/med/low); "
           "trap: LRU 0.056, Cold-RL 0.421\n";
    return out.str();
}

static nlohmann::ordered_json row_json(const CompareRow& r) {
    ordered_json j;
    j["policy"] = r.policy;
    j["capacity"] = r.capacity;
    j["requests"] = r.report.requests;
    j["hits"] = r.report.hits;
    j["misses"] = r.report.misses;
    j["expired_hits"] = r.report.expired_hits;
    j["hit_ratio"] = fmt(r.report.hit_ratio);
    j["byte_hit_ratio"] = fmt(r.report.byte_hit_ratio);
    j["origin_bytes"] = r.report.origin_bytes;
    j["evictions"] = r.report.evictions;
    j["eviction_events"] = r.report.eviction_events;
    j["fallback_events"] = r.report.fallback_events;
    j["fallback_rate"] = fmt(r.fallback_rate, 4);
    j["decision_latency_us"] = {{"p50", r.report.decision_latency.p50_us},
                                {"p95", r.report.decision_latency.p95_us},
                                {"p99", r.report.decision_latency.p99_us}};
    return j;
}

std::string render_json(const CompareReport& report) {
    ordered_json j;
    j["rows"] = ordered_json::array();
    for (const auto& r : report.rows) j["rows"].push_back(row_json(r));
    j["improvement"] = ordered_json::object();
    for (const auto& [cap, imp] : report.improvement)
        j["improvement"][std::to_string(cap)] = fmt(imp);
    j["published_reference"] = {
        {"note", "published production numbers, different hardware/traces; context only"},
        {"trap_hit_ratio", {{"lru", 0.056}, {"coldrl", 0.421}}},
        {"inference_us", {{"p50", 127}, {"p95", 342}, {"p99", 487}}},
    };
    return j.dump(2) + "\n";
}

std::string render_csv(const CompareReport& report) {
    std::ostringstream out;
    out << "policy,capacity,hit_ratio,byte_hit_ratio,evictions,eviction_events,"
           "fallback_rate,p50_us,p95_us,p99_us\n";
    for (const auto& r : report.rows) {
        out << r.policy << ',' << r.capacity << ',' << fmt(r.report.hit_ratio) << ','
            << fmt(r.report.byte_hit_ratio) << ',' << r.report.evictions << ','
            << r.report.eviction_events << ',' << fmt(r.fallback_rate, 4) << ','
            << r.report.decision_latency.p50_us << ',' << r.report.decision_latency.p95_us
            << ',' << r.report.decision_latency.p99_us << '\n';
    }
    return out.str();
}

std::string sim_report_json(const SimReport& r) {
    ordered_json j;
    j["policy"] = r.policy;
    j["capacity"] = r.capacity;
    j["requests"] = r.requests;
    j["hits"] = r.hits;
    j["misses"] = r.misses;
    j["expired_hits"] = r.expired_hits;
    j["hit_ratio"] = r.hit_ratio;
    j["byte_hit_ratio"] = r.byte_hit_ratio;
    j["hit_bytes"] = r.hit_bytes;
    j["requested_bytes"] = r.requested_bytes;
    j["origin_bytes"] = r.origin_bytes;
    j["evictions"] = r.evictions;
    j["eviction_events"] = r.eviction_events;
    j["fallback_events"] = r.fallback_events;
    j["decision_latency_us"] = {{"p50", r.decision_latency.p50_us},
                                {"p95", r.decision_latency.p95_us},
                                {"p99", r.decision_latency.p99_us}};
    return j.dump(2) + "\n";
}

std::string sim_report_table(const SimReport& r) {
    std::ostringstream out;
    char buf[128];
    auto line = [&](const char* k, const std::string& v) {
        std::snprintf(buf, sizeof(buf), "%-18s %s\n", k, v.c_str());
        out << buf;
    };
    line("policy", r.policy);
    line("capacity", std::to_string(r.capacity));
    line("requests", std::to_string(r.requests));
    line("hits", std::to_string(r.hits));
    line("misses", std::to_string(r.misses));
    line("expired_hits", std::to_string(r.expired_hits));
    line("hit_ratio", fmt(r.hit_ratio));
    line("byte_hit_ratio", fmt(r.byte_hit_ratio));
    line("origin_bytes", std::to_string(r.origin_bytes));
    line("evictions", std::to_string(r.evictions));
    line("eviction_events", std::to_string(r.eviction_events));
    line("fallback_events", std::to_string(r.fallback_events));
    line("latency_p50_us", fmt(r.decision_latency.p50_us, 1));
    line("latency_p95_us", fmt(r.decision_latency.p95_us, 1));
    line("latency_p99_us", fmt(r.decision_latency.p99_us, 1));
    return out.str();
}

} // namespace coldrl
