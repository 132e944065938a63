// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace detwasm
{
/// Closed set of abnormal terminations. No platform-specific code ever escapes.
enum class TrapCode : uint8_t
{
    Unreachable,
    MemoryAccessOutOfBounds,
    IntegerDivideByZero,
    IntegerOverflow,
    InvalidConversionToInteger,
    IndirectCallTypeMismatch,
    UndefinedTableElement,
    WasmCallStackExceed,
    GasExhausted,
    CheckedArithmeticOverflow,
    HostError,
};

inline constexpr unsigned kNumTrapCodes = 11;

std::string_view to_string(TrapCode code) noexcept;

/// Codes whose trap carries a detail value: the effective address for memory,
/// the element index for table traps, the frame depth for the call stack.
constexpr bool trap_has_detail(TrapCode code) noexcept
{
    return code == TrapCode::MemoryAccessOutOfBounds || code == TrapCode::UndefinedTableElement ||
           code == TrapCode::IndirectCallTypeMismatch || code == TrapCode::WasmCallStackExceed;
}

struct Trap
{
    TrapCode code = TrapCode::Unreachable;
    uint64_t gas_consumed = 0;
    /// Offending address (memory), index (table) or depth (call stack). Not part
    /// of the trace line.
    std::optional<uint64_t> detail;

    friend bool operator==(const Trap&, const Trap&) = default;
};

}  // namespace detwasm
