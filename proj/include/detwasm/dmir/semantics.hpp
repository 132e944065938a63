// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reference semantics of every value-producing dMIR operation on raw bits.
// Shared by the interpreter and constant folding; the code generators must agree.

#include "detwasm/common/trap.hpp"
#include "detwasm/common/types.hpp"
#include "detwasm/dmir/dmir.hpp"
#include <bit>
#include <cmath>
#include <limits>
#include <cstdint>
#include <optional>

namespace detwasm::dmir
{
inline constexpr uint32_t kCanonicalNaN32 = 0x7fc0'0000u;
inline constexpr uint64_t kCanonicalNaN64 = 0x7ff8'0000'0000'0000u;

namespace detail
{
inline float f32(uint64_t b) noexcept
{
    return std::bit_cast<float>(static_cast<uint32_t>(b));
}
inline double f64(uint64_t b) noexcept
{
    return std::bit_cast<double>(b);
}
inline uint64_t bits(float v) noexcept
{
    return std::isnan(v) ? kCanonicalNaN32 : std::bit_cast<uint32_t>(v);
}
inline uint64_t bits(double v) noexcept
{
    return std::isnan(v) ? kCanonicalNaN64 : std::bit_cast<uint64_t>(v);
}

template <typename F, typename U>
uint64_t fmin(uint64_t ab, uint64_t bb) noexcept
{
    const auto a = std::bit_cast<F>(static_cast<U>(ab));
    const auto b = std::bit_cast<F>(static_cast<U>(bb));
    if (std::isnan(a) || std::isnan(b))
        return bits(std::numeric_limits<F>::quiet_NaN());
    if (a == b)
        return static_cast<U>(ab) | static_cast<U>(bb);
    return a < b ? static_cast<U>(ab) : static_cast<U>(bb);
}

template <typename F, typename U>
uint64_t fmax(uint64_t ab, uint64_t bb) noexcept
{
    const auto a = std::bit_cast<F>(static_cast<U>(ab));
    const auto b = std::bit_cast<F>(static_cast<U>(bb));
    if (std::isnan(a) || std::isnan(b))
        return bits(std::numeric_limits<F>::quiet_NaN());
    if (a == b)
        return static_cast<U>(ab) & static_cast<U>(bb);
    return a > b ? static_cast<U>(ab) : static_cast<U>(bb);
}

template <typename T>
T rotl(T v, uint64_t n) noexcept
{
    return std::rotl(v, static_cast<int>(n % (sizeof(T) * 8)));
}
}  // namespace detail

/// Non-trapping binary operation (integer arithmetic, float arithmetic, compares).
/// For compares `t` is the operand type.
inline uint64_t eval_binary(Op op, ValType t, uint64_t a, uint64_t b) noexcept
{
    using namespace detail;
    if (t == ValType::i32)
    {
        const auto x = static_cast<uint32_t>(a), y = static_cast<uint32_t>(b);
        const auto sx = static_cast<int32_t>(x), sy = static_cast<int32_t>(y);
        switch (op)
        {
        case Op::Add: return uint32_t(x + y);
        case Op::Sub: return uint32_t(x - y);
        case Op::Mul: return uint32_t(x * y);
        case Op::And: return x & y;
        case Op::Or: return x | y;
        case Op::Xor: return x ^ y;
        case Op::Shl: return uint32_t(x << (y & 31));
        case Op::ShrS: return uint32_t(sx >> (y & 31));
        case Op::ShrU: return x >> (y & 31);
        case Op::Rotl: return rotl<uint32_t>(x, y);
        case Op::Rotr: return std::rotr(x, static_cast<int>(y & 31));
        case Op::Eq: return x == y;
        case Op::Ne: return x != y;
        case Op::LtS: return sx < sy;
        case Op::LtU: return x < y;
        case Op::GtS: return sx > sy;
        case Op::GtU: return x > y;
        case Op::LeS: return sx <= sy;
        case Op::LeU: return x <= y;
        case Op::GeS: return sx >= sy;
        case Op::GeU: return x >= y;
        default: return 0;
        }
    }
    if (t == ValType::i64)
    {
        const auto sx = static_cast<int64_t>(a), sy = static_cast<int64_t>(b);
        switch (op)
        {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::And: return a & b;
        case Op::Or: return a | b;
        case Op::Xor: return a ^ b;
        case Op::Shl: return a << (b & 63);
        case Op::ShrS: return static_cast<uint64_t>(sx >> (b & 63));
        case Op::ShrU: return a >> (b & 63);
        case Op::Rotl: return rotl<uint64_t>(a, b);
        case Op::Rotr: return std::rotr(a, static_cast<int>(b & 63));
        case Op::Eq: return a == b;
        case Op::Ne: return a != b;
        case Op::LtS: return sx < sy;
        case Op::LtU: return a < b;
        case Op::GtS: return sx > sy;
        case Op::GtU: return a > b;
        case Op::LeS: return sx <= sy;
        case Op::LeU: return a <= b;
        case Op::GeS: return sx >= sy;
        case Op::GeU: return a >= b;
        default: return 0;
        }
    }
    if (t == ValType::f32)
    {
        const auto x = f32(a), y = f32(b);
        switch (op)
        {
        case Op::FAdd: return bits(x + y);
        case Op::FSub: return bits(x - y);
        case Op::FMul: return bits(x * y);
        case Op::FDiv: return bits(x / y);
        case Op::FMin: return fmin<float, uint32_t>(a, b);
        case Op::FMax: return fmax<float, uint32_t>(a, b);
        case Op::FCopysign: return (a & 0x7fff'ffffu) | (b & 0x8000'0000u);
        case Op::FEq: return x == y;
        case Op::FNe: return x != y;
        case Op::FLt: return x < y;
        case Op::FGt: return x > y;
        case Op::FLe: return x <= y;
        case Op::FGe: return x >= y;
        default: return 0;
        }
    }
    const auto x = f64(a), y = f64(b);
    switch (op)
    {
    case Op::FAdd: return bits(x + y);
    case Op::FSub: return bits(x - y);
    case Op::FMul: return bits(x * y);
    case Op::FDiv: return bits(x / y);
    case Op::FMin: return fmin<double, uint64_t>(a, b);
    case Op::FMax: return fmax<double, uint64_t>(a, b);
    case Op::FCopysign: return (a & 0x7fff'ffff'ffff'ffffu) | (b & 0x8000'0000'0000'0000u);
    case Op::FEq: return x == y;
    case Op::FNe: return x != y;
    case Op::FLt: return x < y;
    case Op::FGt: return x > y;
    case Op::FLe: return x <= y;
    case Op::FGe: return x >= y;
    default: return 0;
    }
}

/// Non-trapping unary operation. `t` is the result type, `src` the operand type.
inline uint64_t eval_unary(Op op, ValType t, ValType src, uint64_t a) noexcept
{
    using namespace detail;
    switch (op)
    {
    case Op::Clz:
        return src == ValType::i32 ? std::countl_zero(static_cast<uint32_t>(a)) :
                                     std::countl_zero(a);
    case Op::Ctz:
        return src == ValType::i32 ? std::countr_zero(static_cast<uint32_t>(a)) :
                                     std::countr_zero(a);
    case Op::Popcnt:
        return std::popcount(a);
    case Op::Eqz:
        return a == 0;
    case Op::FAbs:
        return src == ValType::f32 ? (a & 0x7fff'ffffu) : (a & 0x7fff'ffff'ffff'ffffu);
    case Op::FNeg:
        return src == ValType::f32 ? (a ^ 0x8000'0000u) : (a ^ 0x8000'0000'0000'0000u);
    case Op::FCeil:
        return src == ValType::f32 ? bits(std::ceil(f32(a))) : bits(std::ceil(f64(a)));
    case Op::FFloor:
        return src == ValType::f32 ? bits(std::floor(f32(a))) : bits(std::floor(f64(a)));
    case Op::FTrunc:
        return src == ValType::f32 ? bits(std::trunc(f32(a))) : bits(std::trunc(f64(a)));
    case Op::FNearest:
        return src == ValType::f32 ? bits(std::nearbyint(f32(a))) : bits(std::nearbyint(f64(a)));
    case Op::FSqrt:
        return src == ValType::f32 ? bits(std::sqrt(f32(a))) : bits(std::sqrt(f64(a)));
    case Op::Wrap:
        return static_cast<uint32_t>(a);
    case Op::ExtendS:
        return static_cast<uint64_t>(static_cast<int64_t>(static_cast<int32_t>(a)));
    case Op::ExtendU:
        return static_cast<uint32_t>(a);
    case Op::ConvertS:
    {
        const auto v = src == ValType::i32 ? int64_t{static_cast<int32_t>(a)} :
                                             static_cast<int64_t>(a);
        return t == ValType::f32 ? std::bit_cast<uint32_t>(static_cast<float>(v)) :
                                   std::bit_cast<uint64_t>(static_cast<double>(v));
    }
    case Op::ConvertU:
    {
        const auto v = src == ValType::i32 ? uint64_t{static_cast<uint32_t>(a)} : a;
        return t == ValType::f32 ? std::bit_cast<uint32_t>(static_cast<float>(v)) :
                                   std::bit_cast<uint64_t>(static_cast<double>(v));
    }
    case Op::Demote:
        return bits(static_cast<float>(f64(a)));
    case Op::Promote:
        return bits(static_cast<double>(f32(a)));
    case Op::Reinterpret:
        return normalize_bits(t, a);
    default:
        return 0;
    }
}

/// Integer division and remainder. Returns a trap code or writes `out`.
inline std::optional<TrapCode> eval_divrem(Op op, ValType t, uint64_t a, uint64_t b,
    uint64_t& out) noexcept
{
    if (t == ValType::i32)
    {
        const auto x = static_cast<uint32_t>(a), y = static_cast<uint32_t>(b);
        if (y == 0)
            return TrapCode::IntegerDivideByZero;
        const auto sx = static_cast<int32_t>(x), sy = static_cast<int32_t>(y);
        switch (op)
        {
        case Op::DivS:
            if (sx == INT32_MIN && sy == -1)
                return TrapCode::IntegerOverflow;
            out = static_cast<uint32_t>(sx / sy);
            break;
        case Op::DivU:
            out = x / y;
            break;
        case Op::RemS:
            out = sy == -1 ? 0 : static_cast<uint32_t>(sx % sy);
            break;
        default:
            out = x % y;
            break;
        }
        return std::nullopt;
    }
    if (b == 0)
        return TrapCode::IntegerDivideByZero;
    const auto sx = static_cast<int64_t>(a), sy = static_cast<int64_t>(b);
    switch (op)
    {
    case Op::DivS:
        if (sx == INT64_MIN && sy == -1)
            return TrapCode::IntegerOverflow;
        out = static_cast<uint64_t>(sx / sy);
        break;
    case Op::DivU:
        out = a / b;
        break;
    case Op::RemS:
        out = sy == -1 ? 0 : static_cast<uint64_t>(sx % sy);
        break;
    default:
        out = a % b;
        break;
    }
    return std::nullopt;
}

/// Float to integer truncation; traps on NaN and out-of-range inputs.
inline std::optional<TrapCode> eval_trunc(Op op, ValType t, ValType src, uint64_t a,
    uint64_t& out) noexcept
{
    const double x = src == ValType::f32 ? static_cast<double>(detail::f32(a)) : detail::f64(a);
    if (std::isnan(x))
        return TrapCode::InvalidConversionToInteger;
    const bool is_signed = op == Op::TruncS;
    if (t == ValType::i32)
    {
        if (is_signed ? !(x > -2147483649.0 && x < 2147483648.0) : !(x > -1.0 && x < 4294967296.0))
            return TrapCode::InvalidConversionToInteger;
        out = is_signed ? static_cast<uint32_t>(static_cast<int32_t>(x)) :
                          static_cast<uint32_t>(x);
        return std::nullopt;
    }
    if (is_signed ? !(x >= -9223372036854775808.0 && x < 9223372036854775808.0) :
                    !(x > -1.0 && x < 18446744073709551616.0))
        return TrapCode::InvalidConversionToInteger;
    out = is_signed ? static_cast<uint64_t>(static_cast<int64_t>(x)) : static_cast<uint64_t>(x);
    return std::nullopt;
}

}  // namespace detwasm::dmir
