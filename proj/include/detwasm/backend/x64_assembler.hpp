// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace detwasm::x64
{
enum Gp : uint8_t
{
    rax, rcx, rdx, rbx, rsp, rbp, rsi, rdi,
    r8, r9, r10, r11, r12, r13, r14, r15,
    kNoGp = 0xff,
};

enum Xmm : uint8_t
{
    xmm0, xmm1, xmm2, xmm3,
};

enum Cond : uint8_t
{
    kO = 0x0, kNO = 0x1, kB = 0x2, kAE = 0x3, kE = 0x4, kNE = 0x5, kBE = 0x6, kA = 0x7,
    kS = 0x8, kNS = 0x9, kP = 0xA, kNP = 0xB, kL = 0xC, kGE = 0xD, kLE = 0xE, kG = 0xF,
};

constexpr Cond negate(Cond c) noexcept
{
    return static_cast<Cond>(c ^ 1);
}

enum class Alu : uint8_t
{
    Add = 0, Or = 1, Adc = 2, Sbb = 3, And = 4, Sub = 5, Xor = 6, Cmp = 7,
};

enum class Shift : uint8_t
{
    Rol = 0, Ror = 1, Shl = 4, Shr = 5, Sar = 7,
};

/// Group-3 unary forms (opcode F7 /n).
enum class Unary : uint8_t
{
    Not = 2, Neg = 3, Mul = 4, Imul = 5, Div = 6, Idiv = 7,
};

enum class SseOp : uint8_t
{
    Sqrt = 0x51, Add = 0x58, Mul = 0x59, Sub = 0x5C, Div = 0x5E,
};

/// [base + index * 2^scale + disp].
struct Mem
{
    Gp base = kNoGp;
    Gp index = kNoGp;
    uint8_t scale = 0;
    int32_t disp = 0;
};

inline Mem ptr(Gp base, int32_t disp = 0) noexcept
{
    return Mem{base, kNoGp, 0, disp};
}

inline Mem ptr(Gp base, Gp index, uint8_t scale, int32_t disp = 0) noexcept
{
    return Mem{base, index, scale, disp};
}

using Label = uint32_t;

/// Minimal x86-64 encoder. Operand size `sz` is in bytes (1, 2, 4 or 8).
/// Branches always use 32-bit displacements and are patched at finish().
class Assembler
{
public:
    size_t size() const noexcept { return m_buf.size(); }
    const std::vector<uint8_t>& code() const noexcept { return m_buf; }

    Label new_label();
    void bind(Label l);
    bool is_bound(Label l) const { return m_labels[l] >= 0; }
    /// Resolves all branch and table fixups. Every referenced label must be bound.
    void finish();

    // Moves.
    void mov(int sz, Gp dst, Gp src);
    void mov(int sz, Gp dst, const Mem& src);  ///< 1/2-byte loads zero-extend to 32 bits.
    void mov(int sz, const Mem& dst, Gp src);
    void mov_imm(Gp dst, uint64_t imm);
    void mov_imm(int sz, const Mem& dst, int32_t imm);
    void movsx(int dst_sz, Gp dst, int src_sz, const Mem& src);
    void movsx(int dst_sz, Gp dst, int src_sz, Gp src);
    void movzx(Gp dst, int src_sz, Gp src);
    void lea(Gp dst, const Mem& src);
    void lea_rip(Gp dst, Label target);

    // Integer arithmetic.
    void alu(Alu op, int sz, Gp dst, Gp src);
    void alu(Alu op, int sz, Gp dst, const Mem& src);
    void alu(Alu op, int sz, const Mem& dst, Gp src);
    void alu_imm(Alu op, int sz, Gp dst, int32_t imm);
    void alu_imm(Alu op, int sz, const Mem& dst, int32_t imm);
    void test(int sz, Gp a, Gp b);
    void imul(int sz, Gp dst, Gp src);
    void imul(int sz, Gp dst, const Mem& src);
    void unary(Unary op, int sz, Gp reg);
    void unary(Unary op, int sz, const Mem& m);
    void sign_extend_ax(int sz);  ///< cdq / cqo
    void shift_cl(Shift op, int sz, Gp reg);
    void shift_imm(Shift op, int sz, Gp reg, uint8_t count);
    void bitscan(uint8_t opcode, bool f3_prefix, int sz, Gp dst, Gp src);
    void lzcnt(int sz, Gp dst, Gp src) { bitscan(0xBD, true, sz, dst, src); }
    void tzcnt(int sz, Gp dst, Gp src) { bitscan(0xBC, true, sz, dst, src); }
    void popcnt(int sz, Gp dst, Gp src) { bitscan(0xB8, true, sz, dst, src); }
    void setcc(Cond c, Gp dst);  ///< Writes the low byte only.
    void cmov(Cond c, int sz, Gp dst, Gp src);
    void inc_mem(int sz, const Mem& m);
    void dec_mem(int sz, const Mem& m);

    // Control flow.
    void jmp(Label l);
    void jcc(Cond c, Label l);
    void call(Gp target);
    void call(const Mem& target);
    void jmp(Gp target);
    void push(Gp r);
    void pop(Gp r);
    void ret();
    void leave();
    void rep_stosq();
    void int3();

    /// Emits a 4-byte entry holding label - table_base, for jump tables.
    void table_entry(Label target, Label table_base);
    void align(size_t n);

    // Scalar SSE, double when `dbl`.
    /// movd (sz 4) or movq (sz 8) between general and vector registers.
    void movq(int sz, Xmm dst, Gp src);
    void movq(int sz, Gp dst, Xmm src);
    void sse(SseOp op, bool dbl, Xmm dst, Xmm src);
    void ucomis(bool dbl, Xmm a, Xmm b);
    void cvtsi2s(bool dbl, int src_sz, Xmm dst, Gp src);
    void cvt_float(bool to_double, Xmm dst, Xmm src);  ///< cvtss2sd / cvtsd2ss
    void round(bool dbl, Xmm dst, Xmm src, uint8_t mode);

    /// Raw bytes.
    void byte(uint8_t b) { m_buf.push_back(b); }
    void dword(uint32_t v);
    void qword(uint64_t v);

private:
    void rex(bool w, unsigned reg, unsigned index, unsigned base, bool force = false);
    void rex_for(int sz, unsigned reg, const Mem& m, bool byte_reg = false);
    void modrm_reg(unsigned reg, unsigned rm);
    void modrm_mem(unsigned reg, const Mem& m);
    void op_rr(int sz, std::initializer_list<uint8_t> opcode, unsigned reg, unsigned rm,
        bool byte_regs = false);
    void op_rm(int sz, std::initializer_list<uint8_t> opcode, unsigned reg, const Mem& m,
        bool byte_reg = false);
    void prefix16(int sz)
    {
        if (sz == 2)
            byte(0x66);
    }
    void rel32(Label l);

    struct Fixup
    {
        size_t at;
        Label target;
        Label base;  ///< Table fixups only; kNoLabel for branches.
    };
    static constexpr Label kNoLabel = 0xFFFF'FFFFu;

    std::vector<uint8_t> m_buf;
    std::vector<int64_t> m_labels;
    std::vector<Fixup> m_fixups;
};

}  // namespace detwasm::x64
