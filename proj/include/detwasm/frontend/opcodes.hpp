// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/common/types.hpp"
#include <cstdint>
#include <optional>

namespace detwasm::opcode
{
inline constexpr uint8_t unreachable = 0x00;
inline constexpr uint8_t nop = 0x01;
inline constexpr uint8_t block = 0x02;
inline constexpr uint8_t loop = 0x03;
inline constexpr uint8_t if_ = 0x04;
inline constexpr uint8_t else_ = 0x05;
inline constexpr uint8_t end = 0x0b;
inline constexpr uint8_t br = 0x0c;
inline constexpr uint8_t br_if = 0x0d;
inline constexpr uint8_t br_table = 0x0e;
inline constexpr uint8_t return_ = 0x0f;
inline constexpr uint8_t call = 0x10;
inline constexpr uint8_t call_indirect = 0x11;
inline constexpr uint8_t drop = 0x1a;
inline constexpr uint8_t select = 0x1b;
inline constexpr uint8_t local_get = 0x20;
inline constexpr uint8_t local_set = 0x21;
inline constexpr uint8_t local_tee = 0x22;
inline constexpr uint8_t global_get = 0x23;
inline constexpr uint8_t global_set = 0x24;

inline constexpr uint8_t i32_load = 0x28;
inline constexpr uint8_t i64_load = 0x29;
inline constexpr uint8_t f32_load = 0x2a;
inline constexpr uint8_t f64_load = 0x2b;
inline constexpr uint8_t i32_load8_s = 0x2c;
inline constexpr uint8_t i32_load8_u = 0x2d;
inline constexpr uint8_t i32_load16_s = 0x2e;
inline constexpr uint8_t i32_load16_u = 0x2f;
inline constexpr uint8_t i64_load8_s = 0x30;
inline constexpr uint8_t i64_load8_u = 0x31;
inline constexpr uint8_t i64_load16_s = 0x32;
inline constexpr uint8_t i64_load16_u = 0x33;
inline constexpr uint8_t i64_load32_s = 0x34;
inline constexpr uint8_t i64_load32_u = 0x35;
inline constexpr uint8_t i32_store = 0x36;
inline constexpr uint8_t i64_store = 0x37;
inline constexpr uint8_t f32_store = 0x38;
inline constexpr uint8_t f64_store = 0x39;
inline constexpr uint8_t i32_store8 = 0x3a;
inline constexpr uint8_t i32_store16 = 0x3b;
inline constexpr uint8_t i64_store8 = 0x3c;
inline constexpr uint8_t i64_store16 = 0x3d;
inline constexpr uint8_t i64_store32 = 0x3e;
inline constexpr uint8_t memory_size = 0x3f;
inline constexpr uint8_t memory_grow = 0x40;

inline constexpr uint8_t i32_const = 0x41;
inline constexpr uint8_t i64_const = 0x42;
inline constexpr uint8_t f32_const = 0x43;
inline constexpr uint8_t f64_const = 0x44;

inline constexpr uint8_t i32_eqz = 0x45;
inline constexpr uint8_t i32_eq = 0x46;
inline constexpr uint8_t i32_ne = 0x47;
inline constexpr uint8_t i32_lt_s = 0x48;
inline constexpr uint8_t i32_lt_u = 0x49;
inline constexpr uint8_t i32_gt_s = 0x4a;
inline constexpr uint8_t i32_gt_u = 0x4b;
inline constexpr uint8_t i32_le_s = 0x4c;
inline constexpr uint8_t i32_le_u = 0x4d;
inline constexpr uint8_t i32_ge_s = 0x4e;
inline constexpr uint8_t i32_ge_u = 0x4f;
inline constexpr uint8_t i64_eqz = 0x50;
inline constexpr uint8_t i64_eq = 0x51;
inline constexpr uint8_t i64_ge_u = 0x5a;
inline constexpr uint8_t f32_eq = 0x5b;
inline constexpr uint8_t f32_ge = 0x60;
inline constexpr uint8_t f64_eq = 0x61;
inline constexpr uint8_t f64_ge = 0x66;

inline constexpr uint8_t i32_clz = 0x67;
inline constexpr uint8_t i32_ctz = 0x68;
inline constexpr uint8_t i32_popcnt = 0x69;
inline constexpr uint8_t i32_add = 0x6a;
inline constexpr uint8_t i32_sub = 0x6b;
inline constexpr uint8_t i32_mul = 0x6c;
inline constexpr uint8_t i32_div_s = 0x6d;
inline constexpr uint8_t i32_div_u = 0x6e;
inline constexpr uint8_t i32_rem_s = 0x6f;
inline constexpr uint8_t i32_rem_u = 0x70;
inline constexpr uint8_t i32_and = 0x71;
inline constexpr uint8_t i32_or = 0x72;
inline constexpr uint8_t i32_xor = 0x73;
inline constexpr uint8_t i32_shl = 0x74;
inline constexpr uint8_t i32_shr_s = 0x75;
inline constexpr uint8_t i32_shr_u = 0x76;
inline constexpr uint8_t i32_rotl = 0x77;
inline constexpr uint8_t i32_rotr = 0x78;
inline constexpr uint8_t i64_clz = 0x79;
inline constexpr uint8_t i64_add = 0x7c;
inline constexpr uint8_t i64_sub = 0x7d;
inline constexpr uint8_t i64_mul = 0x7e;
inline constexpr uint8_t i64_div_s = 0x7f;
inline constexpr uint8_t i64_and = 0x83;
inline constexpr uint8_t i64_or = 0x84;
inline constexpr uint8_t i64_xor = 0x85;
inline constexpr uint8_t i64_shl = 0x86;
inline constexpr uint8_t i64_shr_s = 0x87;
inline constexpr uint8_t i64_shr_u = 0x88;
inline constexpr uint8_t i64_rotl = 0x89;
inline constexpr uint8_t i64_rotr = 0x8a;

inline constexpr uint8_t f32_abs = 0x8b;
inline constexpr uint8_t f32_neg = 0x8c;
inline constexpr uint8_t f32_ceil = 0x8d;
inline constexpr uint8_t f32_floor = 0x8e;
inline constexpr uint8_t f32_trunc = 0x8f;
inline constexpr uint8_t f32_nearest = 0x90;
inline constexpr uint8_t f32_sqrt = 0x91;
inline constexpr uint8_t f32_add = 0x92;
inline constexpr uint8_t f32_sub = 0x93;
inline constexpr uint8_t f32_mul = 0x94;
inline constexpr uint8_t f32_div = 0x95;
inline constexpr uint8_t f32_min = 0x96;
inline constexpr uint8_t f32_max = 0x97;
inline constexpr uint8_t f32_copysign = 0x98;
inline constexpr uint8_t f64_abs = 0x99;
inline constexpr uint8_t f64_add = 0xa0;
inline constexpr uint8_t f64_div = 0xa3;
inline constexpr uint8_t f64_copysign = 0xa6;

inline constexpr uint8_t i32_wrap_i64 = 0xa7;
inline constexpr uint8_t i32_trunc_f32_s = 0xa8;
inline constexpr uint8_t i32_trunc_f32_u = 0xa9;
inline constexpr uint8_t i32_trunc_f64_s = 0xaa;
inline constexpr uint8_t i32_trunc_f64_u = 0xab;
inline constexpr uint8_t i64_extend_i32_s = 0xac;
inline constexpr uint8_t i64_extend_i32_u = 0xad;
inline constexpr uint8_t i64_trunc_f32_s = 0xae;
inline constexpr uint8_t i64_trunc_f32_u = 0xaf;
inline constexpr uint8_t i64_trunc_f64_s = 0xb0;
inline constexpr uint8_t i64_trunc_f64_u = 0xb1;
inline constexpr uint8_t f32_convert_i32_s = 0xb2;
inline constexpr uint8_t f32_convert_i32_u = 0xb3;
inline constexpr uint8_t f32_convert_i64_s = 0xb4;
inline constexpr uint8_t f32_convert_i64_u = 0xb5;
inline constexpr uint8_t f32_demote_f64 = 0xb6;
inline constexpr uint8_t f64_convert_i32_s = 0xb7;
inline constexpr uint8_t f64_convert_i32_u = 0xb8;
inline constexpr uint8_t f64_convert_i64_s = 0xb9;
inline constexpr uint8_t f64_convert_i64_u = 0xba;
inline constexpr uint8_t f64_promote_f32 = 0xbb;
inline constexpr uint8_t i32_reinterpret_f32 = 0xbc;
inline constexpr uint8_t i64_reinterpret_f64 = 0xbd;
inline constexpr uint8_t f32_reinterpret_i32 = 0xbe;
inline constexpr uint8_t f64_reinterpret_i64 = 0xbf;

inline constexpr uint8_t block_type_empty = 0x40;

/// Operand/result types of a plain numeric instruction (0x45..0xbf).
struct NumericSig
{
    uint8_t arity = 0;
    ValType in = ValType::i32;
    ValType out = ValType::i32;
};

constexpr std::optional<NumericSig> numeric_sig(uint8_t op) noexcept
{
    using enum ValType;
    if (op == i32_eqz)
        return NumericSig{1, i32, i32};
    if (op >= 0x46 && op <= 0x4f)
        return NumericSig{2, i32, i32};
    if (op == i64_eqz)
        return NumericSig{1, i64, i32};
    if (op >= 0x51 && op <= 0x5a)
        return NumericSig{2, i64, i32};
    if (op >= 0x5b && op <= 0x60)
        return NumericSig{2, f32, i32};
    if (op >= 0x61 && op <= 0x66)
        return NumericSig{2, f64, i32};
    if (op >= 0x67 && op <= 0x69)
        return NumericSig{1, i32, i32};
    if (op >= 0x6a && op <= 0x78)
        return NumericSig{2, i32, i32};
    if (op >= 0x79 && op <= 0x7b)
        return NumericSig{1, i64, i64};
    if (op >= 0x7c && op <= 0x8a)
        return NumericSig{2, i64, i64};
    if (op >= 0x8b && op <= 0x91)
        return NumericSig{1, f32, f32};
    if (op >= 0x92 && op <= 0x98)
        return NumericSig{2, f32, f32};
    if (op >= 0x99 && op <= 0x9f)
        return NumericSig{1, f64, f64};
    if (op >= 0xa0 && op <= 0xa6)
        return NumericSig{2, f64, f64};
    switch (op)
    {
    case i32_wrap_i64:
        return NumericSig{1, i64, i32};
    case i32_trunc_f32_s:
    case i32_trunc_f32_u:
        return NumericSig{1, f32, i32};
    case i32_trunc_f64_s:
    case i32_trunc_f64_u:
        return NumericSig{1, f64, i32};
    case i64_extend_i32_s:
    case i64_extend_i32_u:
        return NumericSig{1, i32, i64};
    case i64_trunc_f32_s:
    case i64_trunc_f32_u:
        return NumericSig{1, f32, i64};
    case i64_trunc_f64_s:
    case i64_trunc_f64_u:
        return NumericSig{1, f64, i64};
    case f32_convert_i32_s:
    case f32_convert_i32_u:
        return NumericSig{1, i32, f32};
    case f32_convert_i64_s:
    case f32_convert_i64_u:
        return NumericSig{1, i64, f32};
    case f32_demote_f64:
        return NumericSig{1, f64, f32};
    case f64_convert_i32_s:
    case f64_convert_i32_u:
        return NumericSig{1, i32, f64};
    case f64_convert_i64_s:
    case f64_convert_i64_u:
        return NumericSig{1, i64, f64};
    case f64_promote_f32:
        return NumericSig{1, f32, f64};
    case i32_reinterpret_f32:
        return NumericSig{1, f32, i32};
    case i64_reinterpret_f64:
        return NumericSig{1, f64, i64};
    case f32_reinterpret_i32:
        return NumericSig{1, i32, f32};
    case f64_reinterpret_i64:
        return NumericSig{1, i64, f64};
    default:
        return std::nullopt;
    }
}

/// Memory access shape of a load (0x28..0x35) or store (0x36..0x3e).
struct MemAccess
{
    ValType type = ValType::i32;
    uint8_t width = 4;
    bool sign_extend = false;
    uint8_t max_align_log2 = 2;
};

constexpr std::optional<MemAccess> memory_access(uint8_t op) noexcept
{
    using enum ValType;
    switch (op)
    {
    case i32_load:
    case i32_store:
        return MemAccess{i32, 4, false, 2};
    case i64_load:
    case i64_store:
        return MemAccess{i64, 8, false, 3};
    case f32_load:
    case f32_store:
        return MemAccess{f32, 4, false, 2};
    case f64_load:
    case f64_store:
        return MemAccess{f64, 8, false, 3};
    case i32_load8_s:
        return MemAccess{i32, 1, true, 0};
    case i32_load8_u:
    case i32_store8:
        return MemAccess{i32, 1, false, 0};
    case i32_load16_s:
        return MemAccess{i32, 2, true, 1};
    case i32_load16_u:
    case i32_store16:
        return MemAccess{i32, 2, false, 1};
    case i64_load8_s:
        return MemAccess{i64, 1, true, 0};
    case i64_load8_u:
    case i64_store8:
        return MemAccess{i64, 1, false, 0};
    case i64_load16_s:
        return MemAccess{i64, 2, true, 1};
    case i64_load16_u:
    case i64_store16:
        return MemAccess{i64, 2, false, 1};
    case i64_load32_s:
        return MemAccess{i64, 4, true, 2};
    case i64_load32_u:
    case i64_store32:
        return MemAccess{i64, 4, false, 2};
    default:
        return std::nullopt;
    }
}

constexpr bool is_load(uint8_t op) noexcept
{
    return op >= i32_load && op <= i64_load32_u;
}
constexpr bool is_store(uint8_t op) noexcept
{
    return op >= i32_store && op <= i64_store32;
}

}  // namespace detwasm::opcode
