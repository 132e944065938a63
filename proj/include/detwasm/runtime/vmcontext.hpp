// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>

namespace detwasm
{
class Instance;

inline constexpr uint32_t kNullSig = 0xFFFF'FFFFu;

/// One funcref table entry: canonical signature id (kNullSig when empty) and
/// function index.
struct TableElement
{
    uint32_t sig_id = kNullSig;
    uint32_t func_index = 0;
};

/// Per-instance state read and written by generated code. Field offsets are
/// part of the native ABI and are fixed by the static_asserts below.
struct VMContext
{
    uint8_t* memory_base = nullptr;
    uint64_t memory_size = 0;  ///< Accessible bytes.
    uint64_t gas_remaining = 0;
    uint32_t depth = 0;
    uint32_t max_depth = 0;
    uint64_t weight_used = 0;
    uint64_t weight_budget = 0;
    uint64_t* globals = nullptr;
    const TableElement* table = nullptr;
    uint64_t table_size = 0;
    /// Entry address per function index, owned by the engine. Read without locks.
    const uintptr_t* func_entries = nullptr;
    Instance* instance = nullptr;
    void* engine = nullptr;
    /// Lowest native stack address guest frames may use.
    uintptr_t stack_limit = 0;
};

namespace vmctx
{
inline constexpr int32_t kMemoryBase = 0;
inline constexpr int32_t kMemorySize = 8;
inline constexpr int32_t kGasRemaining = 16;
inline constexpr int32_t kDepth = 24;
inline constexpr int32_t kMaxDepth = 28;
inline constexpr int32_t kWeightUsed = 32;
inline constexpr int32_t kWeightBudget = 40;
inline constexpr int32_t kGlobals = 48;
inline constexpr int32_t kTable = 56;
inline constexpr int32_t kTableSize = 64;
inline constexpr int32_t kFuncEntries = 72;
inline constexpr int32_t kStackLimit = 96;
}  // namespace vmctx

static_assert(offsetof(VMContext, memory_base) == vmctx::kMemoryBase);
static_assert(offsetof(VMContext, memory_size) == vmctx::kMemorySize);
static_assert(offsetof(VMContext, gas_remaining) == vmctx::kGasRemaining);
static_assert(offsetof(VMContext, depth) == vmctx::kDepth);
static_assert(offsetof(VMContext, max_depth) == vmctx::kMaxDepth);
static_assert(offsetof(VMContext, weight_used) == vmctx::kWeightUsed);
static_assert(offsetof(VMContext, weight_budget) == vmctx::kWeightBudget);
static_assert(offsetof(VMContext, globals) == vmctx::kGlobals);
static_assert(offsetof(VMContext, table) == vmctx::kTable);
static_assert(offsetof(VMContext, table_size) == vmctx::kTableSize);
static_assert(offsetof(VMContext, func_entries) == vmctx::kFuncEntries);
static_assert(offsetof(VMContext, stack_limit) == vmctx::kStackLimit);
static_assert(sizeof(TableElement) == 8);

}  // namespace detwasm
