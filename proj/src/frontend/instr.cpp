// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/frontend/instr.hpp"
#include "detwasm/frontend/opcodes.hpp"

namespace detwasm
{
namespace
{
[[noreturn]] void unsupported(size_t at, const char* what)
{
    throw ValidationError{ErrorCode::UnsupportedFeature, at, what};
}

std::optional<ValType> read_block_type(ByteReader& r)
{
    const auto at = r.pos();
    const auto b = r.peek();
    switch (b)
    {
    case opcode::block_type_empty:
        r.u8();
        return std::nullopt;
    case 0x7f:
    case 0x7e:
    case 0x7d:
    case 0x7c:
        r.u8();
        return static_cast<ValType>(b);
    case 0x7b:
        unsupported(at, "v128 block type");
    case 0x70:
    case 0x6f:
        unsupported(at, "reference block type");
    default:
        // Non-negative s33 is a type index: multi-value block.
        if ((b & 0x40) == 0)
            unsupported(at, "multi-value block type");
        r.fail("invalid block type", at);
    }
}

void reserved_zero(ByteReader& r)
{
    const auto at = r.pos();
    if (r.u8() != 0x00)
        r.fail("non-zero reserved byte", at);
}
}  // namespace

bool is_float_opcode(uint8_t op) noexcept
{
    switch (op)
    {
    case opcode::f32_load:
    case opcode::f64_load:
    case opcode::f32_store:
    case opcode::f64_store:
    case opcode::f32_const:
    case opcode::f64_const:
        return true;
    default:
        break;
    }
    if (const auto sig = opcode::numeric_sig(op))
        return is_float(sig->in) || is_float(sig->out);
    return false;
}

void decode_instr(ByteReader& r, Instr& out, bool allow_floats)
{
    out.offset = r.pos();
    const auto op = r.u8();
    out.op = op;
    if (!allow_floats && is_float_opcode(op))
        unsupported(out.offset, "floating-point instruction");

    switch (op)
    {
    case opcode::unreachable:
    case opcode::nop:
    case opcode::else_:
    case opcode::end:
    case opcode::return_:
    case opcode::drop:
    case opcode::select:
        return;
    case opcode::block:
    case opcode::loop:
    case opcode::if_:
        out.block_type = read_block_type(r);
        if (!allow_floats && out.block_type && is_float(*out.block_type))
            unsupported(out.offset, "floating-point block type");
        return;
    case opcode::br:
    case opcode::br_if:
    case opcode::call:
    case opcode::local_get:
    case opcode::local_set:
    case opcode::local_tee:
    case opcode::global_get:
    case opcode::global_set:
        out.index = r.u32();
        return;
    case opcode::br_table:
    {
        const auto n = r.u32();
        if (n > r.remaining())
            r.fail("br_table vector exceeds body", out.offset);
        out.targets.clear();
        out.targets.reserve(n);
        for (uint32_t i = 0; i < n; ++i)
            out.targets.push_back(r.u32());
        out.index = r.u32();
        return;
    }
    case opcode::call_indirect:
        out.index = r.u32();
        reserved_zero(r);
        return;
    case opcode::memory_size:
    case opcode::memory_grow:
        reserved_zero(r);
        return;
    case opcode::i32_const:
        out.imm = static_cast<uint32_t>(r.s32());
        return;
    case opcode::i64_const:
        out.imm = static_cast<uint64_t>(r.s64());
        return;
    case opcode::f32_const:
        out.imm = r.fixed_u32();
        return;
    case opcode::f64_const:
        out.imm = r.fixed_u64();
        return;

    case 0x06:
    case 0x07:
    case 0x08:
    case 0x09:
    case 0x0a:
    case 0x18:
    case 0x19:
        unsupported(out.offset, "exception handling");
    case 0x12:
    case 0x13:
        unsupported(out.offset, "tail call");
    case 0x1c:
        unsupported(out.offset, "typed select");
    case 0x25:
    case 0x26:
        unsupported(out.offset, "table access instruction");
    case 0xc0:
    case 0xc1:
    case 0xc2:
    case 0xc3:
    case 0xc4:
        unsupported(out.offset, "sign-extension operator");
    case 0xd0:
    case 0xd1:
    case 0xd2:
        unsupported(out.offset, "reference instruction");
    case 0xfc:
        unsupported(out.offset, "bulk memory or saturating conversion");
    case 0xfd:
        unsupported(out.offset, "SIMD");
    case 0xfe:
        unsupported(out.offset, "threads");
    default:
        break;
    }

    if (opcode::is_load(op) || opcode::is_store(op))
    {
        out.align = r.u32();
        out.mem_offset = r.u32();
        return;
    }
    if (opcode::numeric_sig(op))
        return;
    r.fail("unknown opcode", out.offset);
}

}  // namespace detwasm
