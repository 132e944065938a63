// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/backend/x64_assembler.hpp"
#include "detwasm/dmir/dmir.hpp"
#include <cstdint>
#include <vector>

namespace detwasm
{
/// Where a virtual register lives during a function.
struct Location
{
    enum Kind : uint8_t
    {
        None,   ///< Never read; writes are dropped.
        Reg,    ///< A general-purpose register.
        Slot,   ///< [rbp + disp].
        Imm,    ///< Single-definition constant, rematerialized at each use.
    };
    Kind kind = None;
    x64::Gp reg = x64::kNoGp;
    int32_t disp = 0;
    uint64_t imm = 0;
};

struct Allocation
{
    std::vector<Location> locations;
    /// Number of 8-byte spill slots below rbp.
    uint32_t num_slots = 0;
    /// Params and locals whose entry value is read and must be materialized.
    std::vector<bool> live_at_entry;
};

struct CpuFeatures
{
    bool lzcnt = false;
    bool tzcnt = false;
    bool popcnt = false;
    bool sse41 = false;

    static const CpuFeatures& host() noexcept;
};

/// Operations compiled as a call to a C helper sharing the interpreter's semantics.
bool needs_helper(const dmir::Instr& in) noexcept;

/// Instructions that call out of generated code and clobber caller-saved registers.
bool clobbers_registers(const dmir::Instr& in) noexcept;

/// Frame displacement of incoming argument `i`.
constexpr int32_t param_disp(uint32_t i) noexcept
{
    return 16 + 8 * static_cast<int32_t>(i);
}

/// Displacement of spill slot `k`.
constexpr int32_t slot_disp(uint32_t k) noexcept
{
    return -8 * static_cast<int32_t>(k + 1);
}

/// Every register in a stack slot; params stay where the caller put them.
Allocation allocate_stack_only(const dmir::Function& f);

/// Linear-scan allocation over live intervals. Values live across calls get
/// callee-saved registers or stack slots.
Allocation allocate_linear_scan(const dmir::Function& f);

}  // namespace detwasm
