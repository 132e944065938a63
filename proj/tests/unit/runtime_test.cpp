// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/engine/engine.hpp"
#include "detwasm/frontend/validator.hpp"
#include "detwasm/runtime/memory.hpp"
#include "detwasm/runtime/mock_host.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <iterator>

namespace detwasm
{
namespace
{
std::shared_ptr<const ValidatedModule> fixture(const std::string& name)
{
    std::ifstream in{std::string{DETWASM_TEST_DATA_DIR} + "/fixtures/" + name, std::ios::binary};
    const std::vector<uint8_t> bytes{std::istreambuf_iterator<char>{in}, {}};
    return load_module(bytes);
}

class Memory : public testing::TestWithParam<BoundsStrategy>
{};

TEST_P(Memory, GrowsWithinMaximumAndZeroFills)
{
    LinearMemory mem{GetParam(), 1, 3};
    EXPECT_EQ(mem.size(), kPageSize);
    mem.bytes()[0] = 0xaa;
    EXPECT_EQ(mem.grow(1), 1u);
    EXPECT_EQ(mem.pages(), 2u);
    EXPECT_EQ(mem.bytes()[0], 0xaa);
    EXPECT_EQ(mem.bytes()[kPageSize + 5], 0);
    EXPECT_EQ(mem.grow(2), kGrowFailed);
    EXPECT_EQ(mem.pages(), 2u);
    EXPECT_EQ(mem.grow(0), 2u);
    EXPECT_EQ(mem.grow(1), 2u);
    EXPECT_EQ(mem.size(), 3 * kPageSize);
}

INSTANTIATE_TEST_SUITE_P(Strategies, Memory,
    testing::Values(BoundsStrategy::GuardPage, BoundsStrategy::SoftwareCheck),
    [](const auto& info) { return std::string{to_string(info.param)}; });

TEST(GuardMemory, ReservationCoversEveryEffectiveAddress)
{
    LinearMemory mem{BoundsStrategy::GuardPage, 1, 4};
    const auto* base = mem.base();
    EXPECT_FALSE(mem.is_guard_address(base));
    EXPECT_TRUE(mem.is_guard_address(base + kPageSize));
    // base 0xFFFFFFFF + offset 0xFFFFFFFF + 8-byte access.
    EXPECT_TRUE(mem.is_guard_address(base + 0xffffffffull + 0xffffffffull + 7));
    const auto before = mem.base();
    mem.grow(2);
    EXPECT_EQ(mem.base(), before);
    EXPECT_FALSE(mem.is_guard_address(base + kPageSize));
}

TEST(MemoryHash, IsFnv1a64)
{
    EXPECT_EQ(fnv1a64({}), 0xcbf29ce484222325ull);
    const uint8_t a[] = {'a'};
    EXPECT_EQ(fnv1a64(a), 0xaf63dc4c8601ec8cull);
    const uint8_t foobar[] = {'f', 'o', 'o', 'b', 'a', 'r'};
    EXPECT_EQ(fnv1a64(foobar), 0x85944171f73967e8ull);
}

TEST(Values, FormatAndParse)
{
    EXPECT_EQ(format_value(Value::from_i32(-1)), "-1");
    EXPECT_EQ(format_value(Value::from_i64(-9000000000)), "-9000000000");
    EXPECT_EQ(format_value(Value::from_f32(1.0f)), "f32:0x3f800000");
    EXPECT_EQ(format_value(Value::from_f64(-0.0)), "f64:0x8000000000000000");
    EXPECT_EQ(parse_value_literal("i32:0xff").bits, 255u);
    EXPECT_EQ(parse_value_literal("i32:-1").as_i32(), -1);
    EXPECT_EQ(parse_value_literal("i64:-3").as_i64(), -3);
    EXPECT_EQ(parse_value_literal("f64:1.5").bits, Value::from_f64(1.5).bits);
    EXPECT_THROW(parse_value_literal("x32:1"), std::exception);
}

TEST(MockHosts, ComputeDocumentedResults)
{
    const auto reg = mock_host_registry();
    const auto* mix = reg.find_function("env", "mix");
    const auto* burn = reg.find_function("env", "burn");
    const auto* fail = reg.find_function("env", "fail");
    ASSERT_TRUE(mix && burn && fail);
    EXPECT_EQ(mix->base_gas, 5u);
    EXPECT_EQ(burn->base_gas, 1u);

    EngineConfig ec;
    ec.mode = ExecMode::Interp;
    auto engine = create_engine(fixture("traps.wasm"), ec);
    auto inst = create_instance(*engine, reg, InstanceConfig{});
    HostContext ctx{*inst};
    Value out[1];
    const Value mix_args[] = {Value::from_i64(3), Value::from_i64(80)};
    EXPECT_EQ(mix->callable(ctx, mix_args, out), HostStatus::Ok);
    EXPECT_EQ(out[0].bits, (3ull * 0x9e3779b97f4a7c15ull) ^ (80ull >> 3));
    const Value burn_args[] = {Value::from_i32(70)};
    EXPECT_EQ(burn->callable(ctx, burn_args, out), HostStatus::Ok);
    EXPECT_EQ(out[0].bits, 211u);
    const Value odd[] = {Value::from_i32(3)};
    const Value even[] = {Value::from_i32(4)};
    EXPECT_EQ(fail->callable(ctx, odd, out), HostStatus::Error);
    EXPECT_EQ(fail->callable(ctx, even, out), HostStatus::Ok);
}

TEST(Instance, TraceLinesAndGasAccounting)
{
    EngineConfig ec;
    ec.mode = ExecMode::Interp;
    auto engine = create_engine(fixture("memory.wasm"), ec);
    const auto hosts = mock_host_registry();
    InstanceConfig ic;
    ic.gas_limit = 1'000;
    auto inst = create_instance(*engine, hosts, ic);
    EXPECT_EQ(inst->memory_hash(), fnv1a64(inst->memory()->bytes()));

    const Value store[] = {Value::from_i32(5), Value::from_i32(0x1ff)};
    const auto r = invoke(*inst, "store8", store);
    ASSERT_FALSE(r.trap);
    const auto used = inst->gas_consumed();
    EXPECT_GT(used, 0u);
    EXPECT_EQ(inst->memory()->bytes()[5], 0xff);
    const auto line = trace_line(r, *inst);
    EXPECT_NE(line.find("gas=" + std::to_string(used)), std::string::npos) << line;
    char hash[32];
    std::snprintf(hash, sizeof hash, "memhash=%016llx", static_cast<unsigned long long>(fnv1a64(inst->memory()->bytes())));
    EXPECT_NE(line.find(hash), std::string::npos) << line;

    inst->reset_gas(3);
    const Value far[] = {Value::from_i32(0)};
    const auto exhausted = invoke(*inst, "load_far", far);
    ASSERT_TRUE(exhausted.trap);
    EXPECT_EQ(trace_line(exhausted, *inst).rfind("TRAP ", 0), 0u);
}

TEST(Instance, MemoryPageCapFromConfig)
{
    EngineConfig ec;
    ec.mode = ExecMode::Interp;
    auto engine = create_engine(fixture("memory.wasm"), ec);
    const auto hosts = mock_host_registry();
    InstanceConfig ic;
    ic.gas_limit = 1'000;
    ic.max_memory_pages = 2;
    auto inst = create_instance(*engine, hosts, ic);
    const Value two[] = {Value::from_i32(2)};
    const Value one[] = {Value::from_i32(1)};
    EXPECT_EQ(invoke(*inst, "grow_fail", two).values.at(0).bits, kGrowFailed);
    EXPECT_EQ(invoke(*inst, "grow_fail", one).values.at(0).bits, 1u);
}

TEST(Instance, RejectsMismatchedArguments)
{
    EngineConfig ec;
    ec.mode = ExecMode::Interp;
    auto engine = create_engine(fixture("memory.wasm"), ec);
    const auto hosts = mock_host_registry();
    auto inst = create_instance(*engine, hosts, InstanceConfig{});
    const Value wrong[] = {Value::from_i64(1)};
    EXPECT_THROW(invoke(*inst, "load64", wrong), ApiMisuse);
    EXPECT_THROW(invoke(*inst, "missing", {}), ApiMisuse);
}

}  // namespace
}  // namespace detwasm
