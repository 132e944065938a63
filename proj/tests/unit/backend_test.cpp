// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/backend/backend.hpp"
#include "detwasm/dmir/lower.hpp"
#include "detwasm/engine/engine.hpp"
#include "detwasm/frontend/validator.hpp"
#include "detwasm/runtime/mock_host.hpp"

#include <gtest/gtest.h>

#include <climits>
#include <fstream>
#include <iterator>
#include <tuple>

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

TEST(Compile, BothTiersProduceCode)
{
    const auto m = fixture("programs.wasm");
    const auto fi = m->find_export("fib")->index;
    const auto f = dmir::lower_to_dmir(*m, fi);
    const BackendConfig bc;
    const auto flat = compile_flat(f, *m, bc);
    const auto flas = compile_flas(f, *m, bc);
    EXPECT_EQ(flat->tier, Tier::Tier1_FLAT);
    EXPECT_EQ(flas->tier, Tier::Tier2_FLAS);
    EXPECT_EQ(flat->func_index, fi);
    EXPECT_EQ(flas->func_index, fi);
    EXPECT_NE(flat->entry, nullptr);
    EXPECT_NE(flas->entry, nullptr);
    EXPECT_GT(flat->code_size_bytes, 0u);
    EXPECT_GT(flas->code_size_bytes, 0u);
}

TEST(Compile, CodeSizeLimitRaisesResourceLimit)
{
    const auto m = fixture("programs.wasm");
    const auto f = dmir::lower_to_dmir(*m, m->find_export("sieve")->index);
    BackendConfig bc;
    bc.max_code_bytes = 16;
    EXPECT_THROW(compile_flat(f, *m, bc), ResourceLimit);
    EXPECT_THROW(compile_flas(f, *m, bc), ResourceLimit);
}

struct TrapCase
{
    const char* invoke;
    std::vector<Value> args;
    TrapCode code;
    std::optional<uint64_t> detail;
};

std::vector<TrapCase> trap_cases()
{
    return {
        {"unreachable", {Value::from_i32(1)}, TrapCode::Unreachable, std::nullopt},
        {"oob", {Value::from_i32(65533)}, TrapCode::MemoryAccessOutOfBounds, 65537},
        {"oob", {Value::from_i32(-1)}, TrapCode::MemoryAccessOutOfBounds, 0x100000003ull},
        {"div_s", {Value::from_i32(1), Value::from_i32(0)}, TrapCode::IntegerDivideByZero, std::nullopt},
        {"div_s", {Value::from_i32(INT_MIN), Value::from_i32(-1)}, TrapCode::IntegerOverflow, std::nullopt},
        {"rem_u64", {Value::from_i64(1), Value::from_i64(0)}, TrapCode::IntegerDivideByZero, std::nullopt},
        {"trunc", {Value::from_f64(1e10)}, TrapCode::InvalidConversionToInteger, std::nullopt},
        {"indirect", {Value::from_i32(2), Value::from_i32(0)}, TrapCode::UndefinedTableElement, 2},
        {"indirect", {Value::from_i32(7), Value::from_i32(0)}, TrapCode::UndefinedTableElement, 7},
        {"indirect_sig", {Value::from_i32(0)}, TrapCode::IndirectCallTypeMismatch, std::nullopt},
        {"bomb", {Value::from_i32(0)}, TrapCode::WasmCallStackExceed, std::nullopt},
        {"spin", {Value::from_i32(0)}, TrapCode::GasExhausted, std::nullopt},
        {"checked_add", {Value::from_i32(INT_MAX), Value::from_i32(1)}, TrapCode::CheckedArithmeticOverflow,
            std::nullopt},
        {"checked_mul", {Value::from_i64(1ll << 32), Value::from_i64(1ll << 32)},
            TrapCode::CheckedArithmeticOverflow, std::nullopt},
        {"host_fail", {Value::from_i32(1)}, TrapCode::HostError, std::nullopt},
    };
}

class TierTraps : public testing::TestWithParam<std::tuple<ExecMode, BoundsStrategy>>
{};

TEST_P(TierTraps, EveryCodeIsRaised)
{
    const auto [mode, bounds] = GetParam();
    EngineConfig ec;
    ec.mode = mode;
    ec.backend.bounds = bounds;
    ec.workers = 0;
    auto engine = create_engine(fixture("traps.wasm"), ec);
    const auto hosts = mock_host_registry();
    for (const auto& c : trap_cases())
    {
        InstanceConfig ic;
        ic.memory_mode = bounds;
        ic.gas_limit = 100'000;
        auto inst = create_instance(*engine, hosts, ic);
        const auto r = invoke(*inst, c.invoke, c.args);
        ASSERT_TRUE(r.trap.has_value()) << c.invoke;
        EXPECT_EQ(r.trap->code, c.code) << c.invoke;
        if (c.detail)
        {
            EXPECT_EQ(r.trap->detail, c.detail) << c.invoke;
        }
        if (c.code == TrapCode::GasExhausted)
        {
            EXPECT_EQ(r.trap->gas_consumed, 100'000u);
        }
    }
}

TEST_P(TierTraps, NonTrappingCallsReturn)
{
    const auto [mode, bounds] = GetParam();
    EngineConfig ec;
    ec.mode = mode;
    ec.backend.bounds = bounds;
    ec.workers = 0;
    auto engine = create_engine(fixture("traps.wasm"), ec);
    const auto hosts = mock_host_registry();
    InstanceConfig ic;
    ic.memory_mode = bounds;
    ic.gas_limit = 100'000;
    auto inst = create_instance(*engine, hosts, ic);
    const auto call = [&](const char* name, std::vector<Value> args) {
        const auto r = invoke(*inst, name, args);
        EXPECT_FALSE(r.trap.has_value()) << name;
        return r.values.at(0).bits;
    };
    EXPECT_EQ(call("oob", {Value::from_i32(12)}), 7u);
    EXPECT_EQ(call("indirect", {Value::from_i32(1), Value::from_i32(20)}), 40u);
    EXPECT_EQ(call("indirect", {Value::from_i32(0), Value::from_i32(20)}), 21u);
    EXPECT_EQ(call("div_s", {Value::from_i32(-7), Value::from_i32(2)}), static_cast<uint32_t>(-3));
    EXPECT_EQ(call("trunc", {Value::from_f64(-2.9)}), static_cast<uint32_t>(-2));
    EXPECT_EQ(call("checked_add", {Value::from_i32(40), Value::from_i32(2)}), 42u);
}

INSTANTIATE_TEST_SUITE_P(AllModes, TierTraps,
    testing::Combine(testing::Values(ExecMode::Interp, ExecMode::EagerFLAT, ExecMode::EagerFLAS, ExecMode::Lazy),
        testing::Values(BoundsStrategy::GuardPage, BoundsStrategy::SoftwareCheck)),
    [](const auto& info) {
        return std::string{to_string(std::get<0>(info.param))} + "_" +
               std::string{to_string(std::get<1>(info.param))};
    });

}  // namespace
}  // namespace detwasm
