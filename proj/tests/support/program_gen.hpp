// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/common/types.hpp"
#include "detwasm/runtime/host.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace detwasm::test
{
struct GenOptions
{
    bool floats = true;
    bool memory = true;
    bool calls = true;
    bool indirect_calls = true;
    bool hooks = true;
    /// Imports `env.mix` from test_host_registry().
    bool host_calls = true;
    /// Adds a self-recursive function whose depth follows the arguments.
    bool recursion = true;
    unsigned max_helpers = 4;
    /// Rough number of statements per function body.
    unsigned body_budget = 40;
};

struct Invocation
{
    std::vector<Value> args;
    uint64_t gas_limit = 0;
};

struct GeneratedProgram
{
    uint64_t seed = 0;
    std::vector<uint8_t> wasm;
    /// Export `main`: (i32, i64) -> i64.
    std::string entry = "main";
    std::vector<Invocation> invocations;
};

/// Valid, terminating dWasm module drawn from `seed`. Covers every numeric
/// opcode, memory access, structured control, direct, indirect and recursive
/// calls, checked-arithmetic hooks and host calls, with occasional traps.
GeneratedProgram generate_program(uint64_t seed, const GenOptions& options = {});

/// Host functions the generated programs import (`env.mix`, `env.burn`).
HostRegistry test_host_registry();

}  // namespace detwasm::test
