// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/common/types.hpp"
#include <cstdint>
#include <string>
#include <string_view>

namespace detwasm
{
/// Integer domain of a checked-arithmetic hook. i32/i64 are signed, u32/u64 unsigned.
enum class HookIntType : uint8_t
{
    i32,
    u32,
    i64,
    u64,
};

enum class HookOp : uint8_t
{
    add,
    sub,
    mul,
};

/// A recognized `env.checked_{type}_{op}` import, compiled inline instead of called.
struct HookKind
{
    HookIntType int_type = HookIntType::i32;
    HookOp op = HookOp::add;

    /// Storage type of operands and result: i32 for i32/u32, i64 for i64/u64.
    ValType storage_type() const noexcept
    {
        return (int_type == HookIntType::i32 || int_type == HookIntType::u32) ? ValType::i32 :
                                                                                 ValType::i64;
    }
    bool is_signed() const noexcept
    {
        return int_type == HookIntType::i32 || int_type == HookIntType::i64;
    }

    friend bool operator==(const HookKind&, const HookKind&) = default;
};

std::string to_string(HookKind kind);

enum class HookRecognition
{
    Hook,
    NotAHook,
    SignatureMismatch,
};

struct HookMatch
{
    HookRecognition status = HookRecognition::NotAHook;
    HookKind kind;
};

/// Total, deterministic classification of an import. Names outside the
/// `checked_{i32|u32|i64|u64}_{add|sub|mul}` grammar (or outside module `env`)
/// are NotAHook; a grammar match with the wrong signature is SignatureMismatch.
HookMatch recognize_checked_hook(
    std::string_view import_module, std::string_view import_name, const FuncType& signature);

/// Result of evaluating a hook: either the exact result or an overflow.
struct CheckedResult
{
    uint64_t value = 0;
    bool overflow = false;
};

/// Reference semantics of a hook on storage-type bits (32-bit operands zero-extended).
CheckedResult evaluate_checked(HookKind kind, uint64_t a, uint64_t b) noexcept;

}  // namespace detwasm
