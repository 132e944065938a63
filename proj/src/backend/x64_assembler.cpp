// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/backend/x64_assembler.hpp"

#include <cassert>
#include <cstring>
#include <stdexcept>

namespace detwasm::x64
{
namespace
{
bool fits_i8(int64_t v) noexcept
{
    return v >= -128 && v <= 127;
}

bool needs_byte_rex(unsigned reg) noexcept
{
    return reg >= 4 && reg <= 7;
}
}  // namespace

Label Assembler::new_label()
{
    m_labels.push_back(-1);
    return static_cast<Label>(m_labels.size() - 1);
}

void Assembler::bind(Label l)
{
    assert(m_labels[l] < 0);
    m_labels[l] = static_cast<int64_t>(m_buf.size());
}

void Assembler::finish()
{
    for (const auto& f : m_fixups)
    {
        const auto target = m_labels[f.target];
        if (target < 0)
            throw std::logic_error{"unbound label"};
        int64_t value;
        if (f.base == kNoLabel)
            value = target - static_cast<int64_t>(f.at + 4);
        else
            value = target - m_labels[f.base];
        const auto v32 = static_cast<int32_t>(value);
        std::memcpy(m_buf.data() + f.at, &v32, 4);
    }
    m_fixups.clear();
}

void Assembler::dword(uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        m_buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void Assembler::qword(uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        m_buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void Assembler::rex(bool w, unsigned reg, unsigned index, unsigned base, bool force)
{
    const uint8_t v = 0x40 | (w ? 8 : 0) | ((reg >> 3) & 1) << 2 | ((index >> 3) & 1) << 1 |
                      ((base >> 3) & 1);
    if (v != 0x40 || force)
        byte(v);
}

void Assembler::rex_for(int sz, unsigned reg, const Mem& m, bool byte_reg)
{
    const unsigned index = m.index == kNoGp ? 0 : m.index;
    const unsigned base = m.base == kNoGp ? 0 : m.base;
    rex(sz == 8, reg, index, base, byte_reg && needs_byte_rex(reg));
}

void Assembler::modrm_reg(unsigned reg, unsigned rm)
{
    byte(static_cast<uint8_t>(0xC0 | (reg & 7) << 3 | (rm & 7)));
}

void Assembler::modrm_mem(unsigned reg, const Mem& m)
{
    assert(m.index != rsp);
    if (m.base == kNoGp)
    {
        // [index * scale + disp32]
        assert(m.index != kNoGp);
        byte(static_cast<uint8_t>((reg & 7) << 3 | 4));
        byte(static_cast<uint8_t>(m.scale << 6 | (m.index & 7) << 3 | 5));
        dword(static_cast<uint32_t>(m.disp));
        return;
    }
    const unsigned base = m.base & 7;
    unsigned mod;
    if (m.disp == 0 && base != 5)
        mod = 0;
    else if (fits_i8(m.disp))
        mod = 1;
    else
        mod = 2;
    const bool sib = m.index != kNoGp || base == 4;
    byte(static_cast<uint8_t>(mod << 6 | (reg & 7) << 3 | (sib ? 4 : base)));
    if (sib)
    {
        const unsigned index = m.index == kNoGp ? 4 : (m.index & 7);
        byte(static_cast<uint8_t>(m.scale << 6 | index << 3 | base));
    }
    if (mod == 1)
        byte(static_cast<uint8_t>(static_cast<int8_t>(m.disp)));
    else if (mod == 2)
        dword(static_cast<uint32_t>(m.disp));
}

void Assembler::op_rr(
    int sz, std::initializer_list<uint8_t> opcode, unsigned reg, unsigned rm, bool byte_regs)
{
    prefix16(sz);
    rex(sz == 8, reg, 0, rm, byte_regs && (needs_byte_rex(reg) || needs_byte_rex(rm)));
    for (auto b : opcode)
        byte(b);
    modrm_reg(reg, rm);
}

void Assembler::op_rm(
    int sz, std::initializer_list<uint8_t> opcode, unsigned reg, const Mem& m, bool byte_reg)
{
    prefix16(sz);
    rex_for(sz, reg, m, byte_reg);
    for (auto b : opcode)
        byte(b);
    modrm_mem(reg, m);
}

void Assembler::rel32(Label l)
{
    m_fixups.push_back({m_buf.size(), l, kNoLabel});
    dword(0);
}

void Assembler::mov(int sz, Gp dst, Gp src)
{
    op_rr(sz, {static_cast<uint8_t>(sz == 1 ? 0x88 : 0x89)}, src, dst, sz == 1);
}

void Assembler::mov(int sz, Gp dst, const Mem& src)
{
    switch (sz)
    {
    case 1: op_rm(4, {0x0F, 0xB6}, dst, src); break;
    case 2: op_rm(4, {0x0F, 0xB7}, dst, src); break;
    default: op_rm(sz, {0x8B}, dst, src); break;
    }
}

void Assembler::mov(int sz, const Mem& dst, Gp src)
{
    op_rm(sz, {static_cast<uint8_t>(sz == 1 ? 0x88 : 0x89)}, src, dst, sz == 1);
}

void Assembler::mov_imm(Gp dst, uint64_t imm)
{
    if (imm <= 0xFFFF'FFFFu)
    {
        rex(false, 0, 0, dst);
        byte(static_cast<uint8_t>(0xB8 + (dst & 7)));
        dword(static_cast<uint32_t>(imm));
    }
    else if (static_cast<int64_t>(imm) >= INT32_MIN && static_cast<int64_t>(imm) <= INT32_MAX)
    {
        rex(true, 0, 0, dst);
        byte(0xC7);
        modrm_reg(0, dst);
        dword(static_cast<uint32_t>(imm));
    }
    else
    {
        rex(true, 0, 0, dst);
        byte(static_cast<uint8_t>(0xB8 + (dst & 7)));
        qword(imm);
    }
}

void Assembler::mov_imm(int sz, const Mem& dst, int32_t imm)
{
    assert(sz == 4 || sz == 8);
    op_rm(sz, {0xC7}, 0, dst);
    dword(static_cast<uint32_t>(imm));
}

void Assembler::movsx(int dst_sz, Gp dst, int src_sz, const Mem& src)
{
    switch (src_sz)
    {
    case 1: op_rm(dst_sz, {0x0F, 0xBE}, dst, src); break;
    case 2: op_rm(dst_sz, {0x0F, 0xBF}, dst, src); break;
    default: op_rm(8, {0x63}, dst, src); break;
    }
}

void Assembler::movsx(int dst_sz, Gp dst, int src_sz, Gp src)
{
    switch (src_sz)
    {
    case 1:
        prefix16(dst_sz);
        rex(dst_sz == 8, dst, 0, src, needs_byte_rex(src));
        byte(0x0F);
        byte(0xBE);
        modrm_reg(dst, src);
        break;
    case 2: op_rr(dst_sz, {0x0F, 0xBF}, dst, src); break;
    default: op_rr(8, {0x63}, dst, src); break;
    }
}

void Assembler::movzx(Gp dst, int src_sz, Gp src)
{
    switch (src_sz)
    {
    case 1:
        rex(false, dst, 0, src, needs_byte_rex(src));
        byte(0x0F);
        byte(0xB6);
        modrm_reg(dst, src);
        break;
    case 2: op_rr(4, {0x0F, 0xB7}, dst, src); break;
    default: mov(4, dst, src); break;
    }
}

void Assembler::lea(Gp dst, const Mem& src)
{
    op_rm(8, {0x8D}, dst, src);
}

void Assembler::lea_rip(Gp dst, Label target)
{
    rex(true, dst, 0, 0);
    byte(0x8D);
    byte(static_cast<uint8_t>((dst & 7) << 3 | 5));
    rel32(target);
}

void Assembler::alu(Alu op, int sz, Gp dst, Gp src)
{
    const auto base = static_cast<uint8_t>(static_cast<uint8_t>(op) << 3);
    op_rr(sz, {static_cast<uint8_t>(base | (sz == 1 ? 0 : 1))}, src, dst, sz == 1);
}

void Assembler::alu(Alu op, int sz, Gp dst, const Mem& src)
{
    const auto base = static_cast<uint8_t>(static_cast<uint8_t>(op) << 3);
    op_rm(sz, {static_cast<uint8_t>(base | 3)}, dst, src);
}

void Assembler::alu(Alu op, int sz, const Mem& dst, Gp src)
{
    const auto base = static_cast<uint8_t>(static_cast<uint8_t>(op) << 3);
    op_rm(sz, {static_cast<uint8_t>(base | 1)}, src, dst);
}

void Assembler::alu_imm(Alu op, int sz, Gp dst, int32_t imm)
{
    const auto ext = static_cast<unsigned>(op);
    if (fits_i8(imm))
    {
        op_rr(sz, {0x83}, ext, dst);
        byte(static_cast<uint8_t>(static_cast<int8_t>(imm)));
    }
    else
    {
        op_rr(sz, {0x81}, ext, dst);
        dword(static_cast<uint32_t>(imm));
    }
}

void Assembler::alu_imm(Alu op, int sz, const Mem& dst, int32_t imm)
{
    const auto ext = static_cast<unsigned>(op);
    if (fits_i8(imm))
    {
        op_rm(sz, {0x83}, ext, dst);
        byte(static_cast<uint8_t>(static_cast<int8_t>(imm)));
    }
    else
    {
        op_rm(sz, {0x81}, ext, dst);
        dword(static_cast<uint32_t>(imm));
    }
}

void Assembler::test(int sz, Gp a, Gp b)
{
    op_rr(sz, {static_cast<uint8_t>(sz == 1 ? 0x84 : 0x85)}, b, a, sz == 1);
}

void Assembler::imul(int sz, Gp dst, Gp src)
{
    op_rr(sz, {0x0F, 0xAF}, dst, src);
}

void Assembler::imul(int sz, Gp dst, const Mem& src)
{
    op_rm(sz, {0x0F, 0xAF}, dst, src);
}

void Assembler::unary(Unary op, int sz, Gp reg)
{
    op_rr(sz, {0xF7}, static_cast<unsigned>(op), reg);
}

void Assembler::unary(Unary op, int sz, const Mem& m)
{
    op_rm(sz, {0xF7}, static_cast<unsigned>(op), m);
}

void Assembler::sign_extend_ax(int sz)
{
    if (sz == 8)
        byte(0x48);
    byte(0x99);
}

void Assembler::shift_cl(Shift op, int sz, Gp reg)
{
    op_rr(sz, {0xD3}, static_cast<unsigned>(op), reg);
}

void Assembler::shift_imm(Shift op, int sz, Gp reg, uint8_t count)
{
    op_rr(sz, {0xC1}, static_cast<unsigned>(op), reg);
    byte(count);
}

void Assembler::bitscan(uint8_t opcode, bool f3_prefix, int sz, Gp dst, Gp src)
{
    if (f3_prefix)
        byte(0xF3);
    op_rr(sz, {0x0F, opcode}, dst, src);
}

void Assembler::setcc(Cond c, Gp dst)
{
    rex(false, 0, 0, dst, needs_byte_rex(dst));
    byte(0x0F);
    byte(static_cast<uint8_t>(0x90 + c));
    modrm_reg(0, dst);
}

void Assembler::cmov(Cond c, int sz, Gp dst, Gp src)
{
    op_rr(sz, {0x0F, static_cast<uint8_t>(0x40 + c)}, dst, src);
}

void Assembler::inc_mem(int sz, const Mem& m)
{
    op_rm(sz, {0xFF}, 0, m);
}

void Assembler::dec_mem(int sz, const Mem& m)
{
    op_rm(sz, {0xFF}, 1, m);
}

void Assembler::jmp(Label l)
{
    byte(0xE9);
    rel32(l);
}

void Assembler::jcc(Cond c, Label l)
{
    byte(0x0F);
    byte(static_cast<uint8_t>(0x80 + c));
    rel32(l);
}

void Assembler::call(Gp target)
{
    op_rr(4, {0xFF}, 2, target);
}

void Assembler::call(const Mem& target)
{
    op_rm(4, {0xFF}, 2, target);
}

void Assembler::jmp(Gp target)
{
    op_rr(4, {0xFF}, 4, target);
}

void Assembler::push(Gp r)
{
    rex(false, 0, 0, r);
    byte(static_cast<uint8_t>(0x50 + (r & 7)));
}

void Assembler::pop(Gp r)
{
    rex(false, 0, 0, r);
    byte(static_cast<uint8_t>(0x58 + (r & 7)));
}

void Assembler::ret()
{
    byte(0xC3);
}

void Assembler::leave()
{
    byte(0xC9);
}

void Assembler::rep_stosq()
{
    byte(0xF3);
    byte(0x48);
    byte(0xAB);
}

void Assembler::int3()
{
    byte(0xCC);
}

void Assembler::table_entry(Label target, Label table_base)
{
    m_fixups.push_back({m_buf.size(), target, table_base});
    dword(0);
}

void Assembler::align(size_t n)
{
    while (m_buf.size() % n != 0)
        int3();
}

void Assembler::movq(int sz, Xmm dst, Gp src)
{
    byte(0x66);
    op_rr(sz, {0x0F, 0x6E}, dst, src);
}

void Assembler::movq(int sz, Gp dst, Xmm src)
{
    byte(0x66);
    op_rr(sz, {0x0F, 0x7E}, src, dst);
}

void Assembler::sse(SseOp op, bool dbl, Xmm dst, Xmm src)
{
    byte(dbl ? 0xF2 : 0xF3);
    op_rr(4, {0x0F, static_cast<uint8_t>(op)}, dst, src);
}

void Assembler::ucomis(bool dbl, Xmm a, Xmm b)
{
    if (dbl)
        byte(0x66);
    op_rr(4, {0x0F, 0x2E}, a, b);
}

void Assembler::cvtsi2s(bool dbl, int src_sz, Xmm dst, Gp src)
{
    byte(dbl ? 0xF2 : 0xF3);
    op_rr(src_sz, {0x0F, 0x2A}, dst, src);
}

void Assembler::cvt_float(bool to_double, Xmm dst, Xmm src)
{
    byte(to_double ? 0xF3 : 0xF2);
    op_rr(4, {0x0F, 0x5A}, dst, src);
}

void Assembler::round(bool dbl, Xmm dst, Xmm src, uint8_t mode)
{
    byte(0x66);
    op_rr(4, {0x0F, 0x3A, static_cast<uint8_t>(dbl ? 0x0B : 0x0A)}, dst, src);
    byte(mode);
}

}  // namespace detwasm::x64
