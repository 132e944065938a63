// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

// Runs every acceptance criterion and prints one PASS or FAIL line each.
// Optional arguments select criteria by number.

#include "harness.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <set>

using namespace detwasm::acceptance;

int main(int argc, char** argv)
{
    struct Criterion
    {
        int id;
        const char* name;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {1, "cross-mode determinism", cross_mode_determinism},
        {2, "validation limit boundaries", limit_boundaries},
        {3, "checked arithmetic oracle", checked_arithmetic},
        {4, "bounds strategy equivalence", bounds_equivalence},
        {5, "gas conservation", gas_conservation},
        {6, "stack trap analyticity", stack_analyticity},
        {7, "tier performance ordering", tier_performance},
        {8, "lazy latency separation", lazy_latency},
        {9, "hot-switch safety", hot_switch_safety},
        {10, "shutdown hygiene", shutdown_hygiene},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i)
        only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria)
    {
        if (!only.empty() && !only.contains(c.id))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = c.run();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string{"exception: "} + e.what()};
        }
        const auto secs = elapsed_us(t0) / 1e6;
        std::printf("%s %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
            o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
