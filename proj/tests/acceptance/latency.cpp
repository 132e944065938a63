// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

// Time from engine creation to the first returned call on a 50-function
// module whose entry path touches three functions: Lazy against EagerFLAS,
// median of 30 cold starts each.

#include "harness.hpp"

#include <sstream>

namespace detwasm::acceptance
{
namespace
{
struct ColdStart
{
    double us = 0;
    int64_t result = 0;
    size_t compiled = 0;
};

ColdStart cold_start(const std::shared_ptr<const ValidatedModule>& module, ExecMode mode)
{
    const auto hosts = mock_host_registry();
    const auto t0 = std::chrono::steady_clock::now();
    EngineConfig ec;
    ec.mode = mode;
    auto engine = create_engine(module, ec);
    InstanceConfig ic;
    ic.gas_limit = ~0ull;
    auto inst = create_instance(*engine, hosts, ic);
    const Value args[] = {Value::from_i64(7)};
    const auto r = invoke(*inst, "main", args);
    ColdStart out;
    out.us = elapsed_us(t0);
    out.result = r.trap || r.values.empty() ? 0 : static_cast<int64_t>(r.values[0].bits);
    out.compiled = engine->stats().stubs_resolved;
    engine->shutdown();
    return out;
}
}  // namespace

Outcome lazy_latency()
{
    constexpr int kReps = 30;
    const auto module = load_module(read_bytes(bench_dir() / "fifty.wasm"));
    std::vector<double> lazy, eager;
    bool agree = true;
    size_t resolved = 0;
    for (int r = 0; r < kReps; ++r)
    {
        const auto a = cold_start(module, ExecMode::Lazy);
        const auto b = cold_start(module, ExecMode::EagerFLAS);
        lazy.push_back(a.us);
        eager.push_back(b.us);
        agree &= a.result == b.result;
        resolved = a.compiled;
    }
    const double ml = median(lazy), me = median(eager);
    const double ratio = ml / me;
    std::ostringstream d;
    d << module->num_functions() << " functions, " << resolved << " stubs resolved before the first return: Lazy "
      << static_cast<uint64_t>(ml) << "us vs EagerFLAS " << static_cast<uint64_t>(me) << "us (ratio " << ratio
      << ", need <= 0.2)" << (agree ? "" : "; results differ");
    return {agree && ratio <= 0.2, d.str()};
}

}  // namespace detwasm::acceptance
