// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/engine/engine.hpp"
#include "detwasm/frontend/validator.hpp"
#include "detwasm/runtime/mock_host.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <iterator>

namespace detwasm
{
namespace
{
std::shared_ptr<const ValidatedModule> load(const std::string& path)
{
    std::ifstream in{path, std::ios::binary};
    const std::vector<uint8_t> bytes{std::istreambuf_iterator<char>{in}, {}};
    return load_module(bytes);
}

std::shared_ptr<const ValidatedModule> fifty()
{
    return load(std::string{DETWASM_BENCH_DIR} + "/fifty.wasm");
}

std::unique_ptr<Engine> lazy_engine(std::shared_ptr<const ValidatedModule> m, CompilePriority p = {})
{
    EngineConfig ec;
    ec.mode = ExecMode::Lazy;
    ec.workers = 0;
    ec.priority = p;
    return create_engine(std::move(m), ec);
}

int64_t run_main(Engine& engine, int64_t arg)
{
    const auto hosts = mock_host_registry();
    InstanceConfig ic;
    ic.gas_limit = ~0ull;
    auto inst = create_instance(engine, hosts, ic);
    const Value args[] = {Value::from_i64(arg)};
    const auto r = invoke(*inst, "main", args);
    EXPECT_FALSE(r.trap.has_value());
    return r.values.empty() ? 0 : r.values[0].as_i64();
}

TEST(Modes, NamesRoundTrip)
{
    for (auto mode : {ExecMode::Interp, ExecMode::EagerFLAT, ExecMode::EagerFLAS, ExecMode::Lazy})
        EXPECT_EQ(parse_mode(to_string(mode)), mode);
    EXPECT_FALSE(parse_mode("jit").has_value());
}

TEST(Lazy, StartsWithStubsAndResolvesOnlyTheCallPath)
{
    const auto m = fifty();
    auto engine = lazy_engine(m);
    for (uint32_t f = 0; f < m->num_functions(); ++f)
        EXPECT_FALSE(engine->tier(f).has_value());
    EXPECT_TRUE(engine->published().empty());

    run_main(*engine, 7);
    const auto s = engine->stats();
    EXPECT_EQ(s.stubs_resolved, 3u);
    EXPECT_EQ(engine->published().size(), 3u);
    EXPECT_EQ(engine->tier(0), Tier::Tier1_FLAT);
    EXPECT_EQ(engine->tier(2), Tier::Tier1_FLAT);
    EXPECT_FALSE(engine->tier(3).has_value());
    EXPECT_EQ(s.invokes_by_tier[0], 1u);
    EXPECT_TRUE(s.latency_first_invoke_us.has_value());
}

TEST(Lazy, BackgroundUpgradesEverythingAndKeepsResults)
{
    const auto m = fifty();
    auto engine = lazy_engine(m);
    const auto before = run_main(*engine, 11);
    EXPECT_EQ(engine->pump_background(), m->num_functions());
    for (uint32_t f = 0; f < m->num_functions(); ++f)
        EXPECT_EQ(engine->tier(f), Tier::Tier2_FLAS);
    EXPECT_EQ(run_main(*engine, 11), before);
    const auto s = engine->stats();
    EXPECT_EQ(s.background_compiled, m->num_functions());
    EXPECT_EQ(s.switches, m->num_functions());
    EXPECT_EQ(s.invokes_by_tier[2], 1u);

    auto interp_cfg = EngineConfig{};
    interp_cfg.mode = ExecMode::Interp;
    auto interp = create_engine(m, interp_cfg);
    EXPECT_EQ(run_main(*interp, 11), before);
}

TEST(Lazy, HotSwitchIsOneWay)
{
    const auto m = fifty();
    auto engine = lazy_engine(m);
    engine->pump_background();
    auto again = compile_flas(engine->function(5), *m, engine->config().backend);
    EXPECT_FALSE(engine->hot_switch(5, std::move(again)));
}

TEST(Lazy, ResolveStubIsIdempotent)
{
    auto engine = lazy_engine(fifty());
    const auto* a = engine->resolve_stub(4);
    const auto* b = engine->resolve_stub(4);
    EXPECT_EQ(a, b);
    EXPECT_EQ(engine->stats().stubs_resolved, 1u);
}

TEST(Priority, FifoAndSizeDescending)
{
    const auto m = fifty();
    const auto fifo = background_priority(*m, CompilePriority::Fifo);
    ASSERT_EQ(fifo.size(), m->num_functions());
    EXPECT_TRUE(std::is_sorted(fifo.begin(), fifo.end()));

    const auto big = background_priority(*m, CompilePriority::SizeDescending);
    ASSERT_EQ(big.size(), fifo.size());
    const auto size = [&](uint32_t f) {
        const auto& c = m->ast.codes[f - m->num_imported_functions()];
        return c.body_end - c.body_offset;
    };
    for (size_t i = 1; i < big.size(); ++i)
    {
        EXPECT_GE(size(big[i - 1]), size(big[i]));
        if (size(big[i - 1]) == size(big[i]))
        {
            EXPECT_LT(big[i - 1], big[i]);
        }
    }
    auto engine = lazy_engine(m, CompilePriority::SizeDescending);
    EXPECT_EQ(engine->stats().priority_order, big);
}

TEST(Shutdown, IsIdempotentAndStopsUpgrades)
{
    EngineConfig ec;
    ec.mode = ExecMode::Lazy;
    ec.workers = 2;
    auto engine = create_engine(fifty(), ec);
    run_main(*engine, 1);
    engine->shutdown();
    const auto published = engine->published();
    const auto compiled = engine->stats().background_compiled;
    engine->shutdown();
    EXPECT_EQ(engine->pump_background(), 0u);
    EXPECT_EQ(engine->published(), published);
    EXPECT_EQ(engine->stats().background_compiled, compiled);
    run_main(*engine, 1);
}

TEST(Engine, RejectsInstanceWithOtherBoundsStrategy)
{
    EngineConfig ec;
    ec.mode = ExecMode::EagerFLAT;
    ec.backend.bounds = BoundsStrategy::GuardPage;
    auto engine = create_engine(fifty(), ec);
    const auto hosts = mock_host_registry();
    InstanceConfig ic;
    ic.memory_mode = BoundsStrategy::SoftwareCheck;
    EXPECT_THROW(create_instance(*engine, hosts, ic), ApiMisuse);
}

TEST(Engine, FunctionAccessorRejectsUnknownIndex)
{
    const auto m = fifty();
    auto engine = lazy_engine(m);
    EXPECT_NO_THROW(engine->function(0));
    EXPECT_THROW(engine->function(m->num_functions()), std::out_of_range);
}

TEST(Engine, StatsJsonHasCounters)
{
    auto engine = lazy_engine(fifty());
    run_main(*engine, 2);
    const auto json = to_json(engine->stats());
    for (const char* key : {"stubs_resolved", "background_compiled", "switches", "latency_first_invoke_us"})
        EXPECT_NE(json.find(key), std::string::npos) << json;
}

TEST(Engine, MiscompileDoubleFlipsFlasResults)
{
    const auto m = fifty();
    EngineConfig ec;
    ec.mode = ExecMode::EagerFLAS;
    auto good = create_engine(m, ec);
    ec.miscompile_for_testing = true;
    auto bad = create_engine(m, ec);
    EXPECT_EQ(run_main(*good, 3) ^ 1, run_main(*bad, 3));
}

}  // namespace
}  // namespace detwasm
