// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/runtime/mock_host.hpp"

namespace detwasm
{
HostRegistry mock_host_registry()
{
    using enum ValType;
    HostRegistry reg;
    reg.add_function("env", "mix",
        HostFunction{FuncType{{i64, i64}, {i64}}, 5,
            [](HostContext&, std::span<const Value> in, std::span<Value> out) {
                out[0].bits = (in[0].bits * 0x9e37'79b9'7f4a'7c15ull) ^ (in[1].bits >> 3);
                return HostStatus::Ok;
            }});
    reg.add_function("env", "burn",
        HostFunction{FuncType{{i32}, {i32}}, 1,
            [](HostContext& ctx, std::span<const Value> in, std::span<Value> out) {
                if (!ctx.consume_gas(in[0].bits % 64))
                    return HostStatus::GasExhausted;
                out[0].bits = static_cast<uint32_t>(in[0].bits * 3 + 1);
                return HostStatus::Ok;
            }});
    reg.add_function("env", "fail",
        HostFunction{FuncType{{i32}, {i32}}, 1,
            [](HostContext&, std::span<const Value> in, std::span<Value> out) {
                if (in[0].bits & 1)
                    return HostStatus::Error;
                out[0].bits = in[0].bits;
                return HostStatus::Ok;
            }});
    return reg;
}

}  // namespace detwasm
