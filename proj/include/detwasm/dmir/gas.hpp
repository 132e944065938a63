// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/dmir/dmir.hpp"
#include <array>
#include <cstdint>

namespace detwasm::dmir
{
/// Gas cost table. Costs are charged per block at its entry.
struct CostModel
{
    std::array<uint32_t, kNumOps> op_costs{};
    /// Extra cost of Call and CallIndirect on top of their opcode cost.
    uint32_t call_overhead = 2;
    /// Cost of an unconditional branch into a loop header. Every cycle in the
    /// CFG passes through such an edge or a conditional terminator, so no loop
    /// runs for free.
    uint32_t loop_edge_cost = 1;
    /// Cost of an unconditional branch to any other block.
    uint32_t forward_branch_cost = 0;

    /// Every opcode 1, call overhead 2, gas_charge 0.
    static CostModel uniform() noexcept;

    uint64_t instr_cost(const Function& f, const Instr& in) const noexcept;
    uint64_t block_cost(const Function& f, const Block& b) const noexcept;
};

/// Prepends gas_charge(C) to every block whose cost C is non-zero.
/// Precondition: `f` contains no gas_charge yet.
void insert_gas_metering(Function& f, const CostModel& cost);

}  // namespace detwasm::dmir
