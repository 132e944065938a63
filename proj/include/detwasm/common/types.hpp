// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace detwasm
{
/// Wasm MVP value types, encoded with their binary-format byte.
enum class ValType : uint8_t
{
    i32 = 0x7f,
    i64 = 0x7e,
    f32 = 0x7d,
    f64 = 0x7c,
};

constexpr bool is_float(ValType t) noexcept
{
    return t == ValType::f32 || t == ValType::f64;
}

constexpr bool is_64bit(ValType t) noexcept
{
    return t == ValType::i64 || t == ValType::f64;
}

/// Slot weight used by the frame-size accounting: 32-bit types weigh 1, 64-bit types 2.
constexpr uint32_t slot_weight(ValType t) noexcept
{
    return is_64bit(t) ? 2 : 1;
}

std::string_view to_string(ValType t) noexcept;

struct FuncType
{
    std::vector<ValType> params;
    std::vector<ValType> results;

    friend bool operator==(const FuncType&, const FuncType&) = default;
};

std::string to_string(const FuncType& type);

/// A typed Wasm value. The payload is kept as raw bits; 32-bit values are zero-extended.
struct Value
{
    ValType type = ValType::i32;
    uint64_t bits = 0;

    constexpr Value() noexcept = default;
    constexpr Value(ValType t, uint64_t b) noexcept : type{t}, bits{b} {}

    static constexpr Value from_i32(int32_t v) noexcept
    {
        return {ValType::i32, static_cast<uint32_t>(v)};
    }
    static constexpr Value from_u32(uint32_t v) noexcept { return {ValType::i32, v}; }
    static constexpr Value from_i64(int64_t v) noexcept
    {
        return {ValType::i64, static_cast<uint64_t>(v)};
    }
    static constexpr Value from_u64(uint64_t v) noexcept { return {ValType::i64, v}; }
    static Value from_f32(float v) noexcept { return {ValType::f32, std::bit_cast<uint32_t>(v)}; }
    static Value from_f64(double v) noexcept { return {ValType::f64, std::bit_cast<uint64_t>(v)}; }

    constexpr int32_t as_i32() const noexcept { return static_cast<int32_t>(bits); }
    constexpr uint32_t as_u32() const noexcept { return static_cast<uint32_t>(bits); }
    constexpr int64_t as_i64() const noexcept { return static_cast<int64_t>(bits); }
    constexpr uint64_t as_u64() const noexcept { return bits; }
    float as_f32() const noexcept { return std::bit_cast<float>(static_cast<uint32_t>(bits)); }
    double as_f64() const noexcept { return std::bit_cast<double>(bits); }

    friend bool operator==(const Value&, const Value&) = default;
};

/// Masks raw bits to the canonical in-register form for the given type.
constexpr uint64_t normalize_bits(ValType t, uint64_t bits) noexcept
{
    return is_64bit(t) ? bits : (bits & 0xffff'ffffu);
}

/// Deterministic rendering used by trace lines: integers as signed decimal,
/// floats as their exact bit pattern.
std::string format_value(const Value& v);

/// Parses a `type:value` literal (e.g. `i32:10`, `i64:-3`, `f64:1.5`, `i32:0xff`,
/// `f32:0x7fc00000` for raw bits). Throws std::invalid_argument on bad input.
Value parse_value_literal(std::string_view literal);

}  // namespace detwasm
