// coldrl: generate workloads, train eviction policies, serve the inference
// sidecar, replay traces, and compare policies.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 runtime error.

#include "coldrl/client.hpp"
#include "coldrl/compare.hpp"
#include "coldrl/model_io.hpp"
#include "coldrl/server.hpp"
#include "coldrl/train.hpp"
#include "coldrl/workload.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

coldrl::AblationMask parse_ablation(const std::vector<std::string>& names) {
    coldrl::AblationMask mask{};
    for (const auto& name : names) {
        bool found = false;
        for (std::size_t j = 0; j < coldrl::kFeatureCount; ++j) {
            if (name == coldrl::kFeatureNames[j]) {
                mask[j] = true;
                found = true;
            }
        }
        if (!found)
            throw CLI::ValidationError("--ablate", "unknown feature '" + name + "'");
    }
    return mask;
}

volatile std::sig_atomic_t g_stop = 0;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cold-RL cache eviction laboratory"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags (e.g. --seed) may follow the subcommand
    app.set_config("--config", "", "key=value config file; flags override");

    std::uint64_t seed = 42;
    app.add_option("--seed", seed, "global RNG seed")->capture_default_str();

    // --- gen -----------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a synthetic trace");
    std::string gen_kind, gen_out;
    coldrl::ZipfParams zp;
    coldrl::TrapParams tp;
    double trap_duration = 2 * 3600.0;  // two burst windows; keeps gen+train under desk-scale budgets
    gen->add_option("--kind", gen_kind, "zipf|trap")->required();
    gen->add_option("--out", gen_out, "output trace CSV path")->required();
    gen->add_option("--keys", zp.n_keys, "zipf: number of keys")->capture_default_str();
    gen->add_option("--requests", zp.n_requests, "zipf: number of requests")->capture_default_str();
    gen->add_option("--alpha", zp.alpha, "zipf: skew")->capture_default_str();
    gen->add_option("--size-min", zp.size_min, "zipf: min object bytes")->capture_default_str();
    gen->add_option("--size-max", zp.size_max, "zipf: max object bytes")->capture_default_str();
    gen->add_option("--ttl", zp.ttl, "zipf: ttl seconds")->capture_default_str();
    gen->add_option("--duration", trap_duration, "trap: seconds")->capture_default_str();
    gen->add_option("--small-hot", tp.n_small_hot, "trap: small hot keys")->capture_default_str();
    gen->add_option("--large-hot", tp.n_large_hot, "trap: large hot keys")->capture_default_str();
    gen->add_option("--burst-period", tp.burst_period, "trap: seconds between bursts")->capture_default_str();
    gen->add_option("--burst-width", tp.burst_width, "trap: keys per burst")->capture_default_str();
    gen->add_option("--scan-rate", tp.scan_rate, "trap: scan keys/second")->capture_default_str();
    gen->add_option("--base-rate", tp.base_rate, "trap: small-hot requests/second")->capture_default_str();

    // --- train ---------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "train an eviction model offline");
    std::string train_trace, train_out;
    std::uint64_t train_capacity = 25 * 1024 * 1024;
    coldrl::PipelineConfig pipeline;
    std::vector<std::string> ablate_names;
    train_cmd->add_option("--trace", train_trace, "input trace CSV")->required();
    train_cmd->add_option("--capacity", train_capacity, "cache bytes for simulation")
        ->capture_default_str();
    train_cmd->add_option("--out", train_out, "output model path")->required();
    train_cmd->add_option("--iterations", pipeline.iterations, "generate/train rounds")
        ->capture_default_str();
    train_cmd->add_option("--epsilon", pipeline.train.epsilon, "LRU exploration rate")
        ->capture_default_str();
    train_cmd->add_option("--gamma", pipeline.train.gamma, "discount (0 = reward regression)")
        ->capture_default_str();
    train_cmd->add_option("--epochs", pipeline.train.epochs)->capture_default_str();
    train_cmd->add_option("--batch", pipeline.train.batch)->capture_default_str();
    train_cmd->add_option("--lr", pipeline.train.lr)->capture_default_str();
    train_cmd->add_option("--k", pipeline.train.k, "eviction candidates per decision")
        ->capture_default_str();
    train_cmd->add_option("--ablate", ablate_names, "feature names to zero out");

    // --- compare -------------------------------------------------------
    auto* cmp = app.add_subcommand("compare", "replay one trace under several policies");
    std::string cmp_trace, cmp_model, cmp_format = "table", cmp_socket;
    std::vector<std::uint64_t> cmp_capacities;
    std::vector<std::string> cmp_policies{"lru", "lfu", "size", "arc", "hybrid"};
    std::size_t cmp_k = 16;
    double cmp_deadline = 500.0;
    cmp->add_option("--trace", cmp_trace, "input trace CSV")->required();
    cmp->add_option("--capacity", cmp_capacities, "cache bytes (repeatable)")->required();
    cmp->add_option("--policies", cmp_policies, "lru|lfu|size|arc|hybrid|coldrl|sidecar")
        ->delimiter(',')->capture_default_str();
    cmp->add_option("--model", cmp_model, "model file (required for coldrl/sidecar)");
    cmp->add_option("--format", cmp_format, "table|json|csv")->capture_default_str();
    cmp->add_option("--socket", cmp_socket, "sidecar socket path")->envname("COLDRL_SOCKET");
    cmp->add_option("--deadline-us", cmp_deadline, "sidecar deadline")->capture_default_str();
    cmp->add_option("--k", cmp_k, "eviction candidates per decision")->capture_default_str();
    cmp->add_option("--ablate", ablate_names, "feature names to zero out");

    // --- serve ---------------------------------------------------------
    auto* serve = app.add_subcommand("serve", "run the inference sidecar");
    std::string serve_model, serve_socket;
    serve->add_option("--model", serve_model, "model file")->required();
    serve->add_option("--socket", serve_socket, "unix socket path")
        ->envname("COLDRL_SOCKET")->required();

    // --- bench-latency --------------------------------------------------
    auto* bench = app.add_subcommand("bench-latency", "measure decide() latency percentiles");
    std::string bench_socket, bench_model;
    std::size_t bench_k = 8, bench_n = 10000;
    double bench_deadline = 500.0;
    bench->add_option("--socket", bench_socket, "unix socket path")
        ->envname("COLDRL_SOCKET")->required();
    bench->add_option("--model", bench_model, "model file (for normalization constants)");
    bench->add_option("--k", bench_k, "candidates per decision")->capture_default_str();
    bench->add_option("--requests", bench_n, "number of decisions")->capture_default_str();
    bench->add_option("--deadline-us", bench_deadline)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*gen) {
            coldrl::Trace trace;
            if (gen_kind == "zipf") {
                trace = coldrl::gen_zipf(zp, seed);
            } else if (gen_kind == "trap") {
                tp.duration = trap_duration;
                tp.ttl_default = 4 * tp.burst_period;
                trace = coldrl::gen_trap(tp, seed);
            } else {
                std::cerr << "gen: --kind must be zipf or trap\n";
                return kExitUsage;
            }
            coldrl::write_trace_file(trace, gen_out);
            std::cout << "wrote " << trace.records.size() << " records, working set "
                      << coldrl::working_set_bytes(trace) << " bytes -> " << gen_out << "\n";
        } else if (*train_cmd) {
            pipeline.train.seed = seed;
            pipeline.train.ablate = parse_ablation(ablate_names);
            auto trace = coldrl::load_trace_file(train_trace);
            auto result = coldrl::train_pipeline(trace, train_capacity, pipeline);
            coldrl::save_model(result.model, train_out);
            std::printf("trained on %zu decision samples, final loss %.6f -> %s\n",
                        result.decisions, result.final_loss, train_out.c_str());
        } else if (*cmp) {
            coldrl::CompareOptions opt;
            opt.policies = cmp_policies;
            opt.capacities = cmp_capacities;
            opt.k = cmp_k;
            opt.ablate = parse_ablation(ablate_names);
            opt.client.socket_path = cmp_socket;
            opt.client.deadline_us = cmp_deadline;
            for (const auto& p : opt.policies)
                if ((p == "coldrl" || p == "sidecar") && cmp_model.empty()) {
                    std::cerr << "compare: --model is required for policy '" << p << "'\n";
                    return kExitUsage;
                }
            if (!cmp_model.empty()) opt.model = coldrl::load_model(cmp_model);
            auto trace = coldrl::load_trace_file(cmp_trace);
            auto report = coldrl::run_compare(trace, opt);
            if (cmp_format == "table") std::cout << coldrl::render_table(report);
            else if (cmp_format == "json") std::cout << coldrl::render_json(report);
            else if (cmp_format == "csv") std::cout << coldrl::render_csv(report);
            else {
                std::cerr << "compare: --format must be table, json, or csv\n";
                return kExitUsage;
            }
        } else if (*serve) {
            auto model = coldrl::load_model(serve_model);
            coldrl::SidecarServer server(serve_socket, std::move(model));
            std::signal(SIGINT, [](int) { g_stop = 1; });
            std::signal(SIGTERM, [](int) { g_stop = 1; });
            server.start();
            std::cout << "serving on " << serve_socket << " (hot swap: send 'SWAP <path>')\n";
            while (!g_stop) {
                struct timespec ts { 0, 100'000'000 };
                nanosleep(&ts, nullptr);
            }
            server.stop();
        } else if (*bench) {
            coldrl::NormParams norm;
            if (!bench_model.empty()) norm = coldrl::load_model(bench_model).norm;

            coldrl::ClientConfig cfg;
            cfg.socket_path = bench_socket;
            cfg.deadline_us = bench_deadline;
            cfg.k = bench_k;
            coldrl::SidecarClient client(cfg);

            // Synthetic cache state: K+8 unit entries so decide() always has
            // a full candidate list and an LRU fallback set.
            coldrl::CacheState state(1 << 20);
            for (std::size_t i = 0; i < bench_k + 8; ++i) {
                coldrl::CacheEntry e;
                e.key = "bench" + std::to_string(i);
                e.size = 1024;
                e.expires_at = 1e9;
                e.origin_rtt = 50.0;
                state.admit(e);
            }
            auto candidates = coldrl::k_tail_candidates(state, bench_k);

            std::vector<coldrl::Decision> decisions;
            decisions.reserve(bench_n);
            for (std::size_t i = 0; i < bench_n; ++i)
                decisions.push_back(
                    client.decide(state, candidates, 2048, norm));
            auto rep = coldrl::latency_report(decisions);
            std::printf("decisions        %zu\n", rep.decisions);
            std::printf("p50_us           %.1f\np95_us           %.1f\np99_us           %.1f\n",
                        rep.p50_us, rep.p95_us, rep.p99_us);
            std::printf("fallback_rate    %.4f\n", rep.fallback_rate);
            std::printf("published reference inference us: p50 127, p95 342, p99 487; "
                        "fallback 0.02%% -- different hardware, context only\n");
        }
    } catch (const coldrl::TraceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const coldrl::ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const coldrl::WorkloadError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
