// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/common/trap.hpp"

namespace detwasm
{
std::string_view to_string(TrapCode code) noexcept
{
    switch (code)
    {
    case TrapCode::Unreachable:
        return "Unreachable";
    case TrapCode::MemoryAccessOutOfBounds:
        return "MemoryAccessOutOfBounds";
    case TrapCode::IntegerDivideByZero:
        return "IntegerDivideByZero";
    case TrapCode::IntegerOverflow:
        return "IntegerOverflow";
    case TrapCode::InvalidConversionToInteger:
        return "InvalidConversionToInteger";
    case TrapCode::IndirectCallTypeMismatch:
        return "IndirectCallTypeMismatch";
    case TrapCode::UndefinedTableElement:
        return "UndefinedTableElement";
    case TrapCode::WasmCallStackExceed:
        return "WasmCallStackExceed";
    case TrapCode::GasExhausted:
        return "GasExhausted";
    case TrapCode::CheckedArithmeticOverflow:
        return "CheckedArithmeticOverflow";
    case TrapCode::HostError:
        return "HostError";
    }
    return "Unknown";
}

}  // namespace detwasm
