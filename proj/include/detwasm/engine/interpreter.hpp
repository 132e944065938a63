// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/common/trap.hpp"
#include "detwasm/dmir/dmir.hpp"
#include "detwasm/runtime/instance.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace detwasm
{
/// Watches a reference run. Block ids are those of the metered dMIR, which
/// match the unmetered lowering.
class InterpObserver
{
public:
    virtual ~InterpObserver() = default;
    virtual void on_block(uint32_t func_index, dmir::BlockId block) = 0;
    /// Gas taken by one host import call.
    virtual void on_host_gas(uint64_t amount) = 0;
};

struct InterpResult
{
    uint64_t value = 0;
    std::optional<Trap> trap;
};

/// Executes metered dMIR directly. `functions` holds the defined functions,
/// indexed by defined-function index. Call stack limits, gas and trap details
/// follow the same rules as generated code.
InterpResult interpret(Instance& inst, std::span<const dmir::Function> functions,
    uint32_t func_index, std::span<const uint64_t> args, InterpObserver* observer = nullptr);

}  // namespace detwasm
