// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/backend/backend.hpp"
#include "detwasm/backend/native.hpp"
#include "detwasm/backend/regalloc.hpp"
#include "detwasm/backend/x64_assembler.hpp"
#include "detwasm/dmir/semantics.hpp"

#include <algorithm>
#include <array>
#include <optional>

extern "C" {
uint64_t detwasm_helper_unary(uint64_t a, uint32_t desc);
uint64_t detwasm_helper_binary(uint64_t a, uint64_t b, uint32_t desc);
uint64_t detwasm_helper_trunc(detwasm::VMContext* ctx, uint64_t a, uint32_t desc);
}

namespace detwasm
{
namespace
{
using namespace x64;
using dmir::BlockId;
using dmir::Op;
using dmir::Reg;

uint32_t describe(const dmir::Instr& in) noexcept
{
    return static_cast<uint32_t>(in.op) | static_cast<uint32_t>(in.type) << 8 |
           static_cast<uint32_t>(in.src_type) << 16;
}

dmir::Op op_of(uint32_t desc) noexcept
{
    return static_cast<Op>(desc & 0xff);
}
ValType type_of(uint32_t desc) noexcept
{
    return static_cast<ValType>((desc >> 8) & 0xff);
}
ValType src_of(uint32_t desc) noexcept
{
    return static_cast<ValType>((desc >> 16) & 0xff);
}

int size_of(ValType t) noexcept
{
    return is_64bit(t) ? 8 : 4;
}

bool fits_simm32(uint64_t v) noexcept
{
    const auto s = static_cast<int64_t>(v);
    return s >= INT32_MIN && s <= INT32_MAX;
}

Cond int_cond(Op op) noexcept
{
    switch (op)
    {
    case Op::Eq: return kE;
    case Op::Ne: return kNE;
    case Op::LtS: return kL;
    case Op::LtU: return kB;
    case Op::GtS: return kG;
    case Op::GtU: return kA;
    case Op::LeS: return kLE;
    case Op::LeU: return kBE;
    case Op::GeS: return kGE;
    default: return kAE;
    }
}

class CodeGen
{
public:
    CodeGen(const dmir::Function& f, const BackendConfig& config, Allocation alloc, bool optimize)
      : m_f{f}, m_config{config}, m_alloc{std::move(alloc)}, m_optimize{optimize}
    {
        m_uses.assign(f.num_regs(), 0);
        for (const auto& b : f.blocks)
            for (const auto& in : b.instrs)
            {
                for (auto r : in.args)
                    ++m_uses[r];
                if (in.op == Op::Call)
                    m_out_args = std::max<uint32_t>(m_out_args, static_cast<uint32_t>(in.args.size()));
                else if (in.op == Op::CallIndirect)
                    m_out_args =
                        std::max<uint32_t>(m_out_args, static_cast<uint32_t>(in.args.size() - 1));
            }
        for (const auto& l : m_alloc.locations)
            if (l.kind == Location::Reg && (l.reg == r12 || l.reg == r13) &&
                std::find(m_saved.begin(), m_saved.end(), l.reg) == m_saved.end())
                m_saved.push_back(l.reg);
        std::sort(m_saved.begin(), m_saved.end());
        const uint64_t bytes =
            8 * (uint64_t{m_alloc.num_slots} + m_saved.size() + m_out_args);
        m_frame_size = static_cast<int32_t>((bytes + 15) / 16 * 16);
        for (auto& l : m_traps)
            l = kNoLabel;
    }

    std::vector<uint8_t> generate()
    {
        m_blocks.resize(m_f.blocks.size());
        for (auto& l : m_blocks)
            l = m_a.new_label();

        prologue();
        for (size_t b = 0; b < m_f.blocks.size(); ++b)
        {
            m_a.bind(m_blocks[b]);
            m_next = b + 1 < m_f.blocks.size() ? static_cast<BlockId>(b + 1) : dmir::kNoBlock;
            const auto& instrs = m_f.blocks[b].instrs;
            for (size_t i = 0; i < instrs.size(); ++i)
            {
                const auto* next = i + 1 < instrs.size() ? &instrs[i + 1] : nullptr;
                emit(instrs[i], next);
            }
        }
        emit_out_of_line();
        m_a.finish();
        return m_a.code();
    }

private:
    static constexpr Label kNoLabel = 0xFFFF'FFFFu;

    const Location& loc(Reg r) const { return m_alloc.locations[r]; }
    static Mem slot(const Location& l) { return ptr(rbp, l.disp); }

    Label trap_label(TrapCode code)
    {
        auto& l = m_traps[static_cast<size_t>(code)];
        if (l == kNoLabel)
            l = m_a.new_label();
        return l;
    }

    void load(Gp dst, Reg r)
    {
        const auto& l = loc(r);
        switch (l.kind)
        {
        case Location::Reg:
            if (l.reg != dst)
                m_a.mov(8, dst, l.reg);
            break;
        case Location::Slot:
            m_a.mov(8, dst, slot(l));
            break;
        case Location::Imm:
            m_a.mov_imm(dst, l.imm);
            break;
        case Location::None:
            m_a.mov_imm(dst, 0);
            break;
        }
    }

    void store(Reg r, Gp src)
    {
        const auto& l = loc(r);
        if (l.kind == Location::Reg && l.reg != src)
            m_a.mov(8, l.reg, src);
        else if (l.kind == Location::Slot)
            m_a.mov(8, slot(l), src);
    }

    /// Register to compute `dst` in: its own register unless a later operand reads it.
    Gp target(Reg dst, std::optional<Reg> read_after = std::nullopt)
    {
        const auto& d = loc(dst);
        if (!m_optimize || d.kind != Location::Reg)
            return rax;
        if (read_after)
        {
            const auto& o = loc(*read_after);
            if (o.kind == Location::Reg && o.reg == d.reg)
                return rax;
        }
        return d.reg;
    }

    void alu_operand(Alu op, int sz, Gp dst, Reg r)
    {
        const auto& l = loc(r);
        switch (l.kind)
        {
        case Location::Reg:
            m_a.alu(op, sz, dst, l.reg);
            break;
        case Location::Slot:
            m_a.alu(op, sz, dst, slot(l));
            break;
        default:
            if (sz == 4 || fits_simm32(l.imm))
                m_a.alu_imm(op, sz, dst, static_cast<int32_t>(static_cast<uint32_t>(l.imm)));
            else
            {
                m_a.mov_imm(rcx, l.imm);
                m_a.alu(op, sz, dst, rcx);
            }
            break;
        }
    }

    /// Sets flags for `r != 0` on its low 32 bits; returns the constant when known.
    std::optional<bool> test_nonzero(Reg r)
    {
        const auto& l = loc(r);
        switch (l.kind)
        {
        case Location::Reg:
            m_a.test(4, l.reg, l.reg);
            return std::nullopt;
        case Location::Slot:
            m_a.alu_imm(Alu::Cmp, 4, slot(l), 0);
            return std::nullopt;
        default:
            return static_cast<uint32_t>(l.imm) != 0;
        }
    }

    void jump_to(BlockId b)
    {
        if (b != m_next)
            m_a.jmp(m_blocks[b]);
    }

    void branch(Cond taken_if, BlockId t, BlockId f)
    {
        if (f == m_next)
            m_a.jcc(taken_if, m_blocks[t]);
        else if (t == m_next)
            m_a.jcc(negate(taken_if), m_blocks[f]);
        else
        {
            m_a.jcc(taken_if, m_blocks[t]);
            m_a.jmp(m_blocks[f]);
        }
    }

    void call_c(const void* fn)
    {
        m_a.mov_imm(rax, reinterpret_cast<uint64_t>(fn));
        m_a.call(rax);
    }

    void canonicalize(bool dbl)
    {
        const int sz = dbl ? 8 : 4;
        m_a.ucomis(dbl, xmm0, xmm0);
        m_a.movq(sz, rax, xmm0);
        const auto ok = m_a.new_label();
        m_a.jcc(kNP, ok);
        m_a.mov_imm(rax, dbl ? dmir::kCanonicalNaN64 : dmir::kCanonicalNaN32);
        m_a.bind(ok);
    }

    void prologue()
    {
        const auto w = m_f.frame_weight;
        const auto exceeded = m_a.new_label();
        m_stack_exceeded = exceeded;

        m_a.push(rbp);
        m_a.mov(8, rbp, rsp);
        m_a.mov(4, rax, ptr(r15, vmctx::kDepth));
        m_a.alu(Alu::Cmp, 4, rax, ptr(r15, vmctx::kMaxDepth));
        m_a.jcc(kAE, trap_label(TrapCode::WasmCallStackExceed));
        m_a.mov(8, rax, ptr(r15, vmctx::kWeightUsed));
        if (w != 0)
            m_a.alu_imm(Alu::Add, 8, rax, static_cast<int32_t>(w));
        m_a.alu(Alu::Cmp, 8, rax, ptr(r15, vmctx::kWeightBudget));
        m_a.jcc(kA, exceeded);
        m_a.lea(rcx, ptr(rsp, -m_frame_size));
        m_a.alu(Alu::Cmp, 8, rcx, ptr(r15, vmctx::kStackLimit));
        m_a.jcc(kB, exceeded);
        m_a.mov(8, ptr(r15, vmctx::kWeightUsed), rax);
        m_a.inc_mem(4, ptr(r15, vmctx::kDepth));
        if (m_frame_size != 0)
            m_a.alu_imm(Alu::Sub, 8, rsp, m_frame_size);
        for (size_t k = 0; k < m_saved.size(); ++k)
            m_a.mov(8, saved_slot(k), m_saved[k]);

        const auto np = m_f.num_params;
        if (!m_optimize)
        {
            const auto nl = m_f.num_locals;
            if (nl <= 16)
            {
                for (uint32_t k = 0; k < nl; ++k)
                    m_a.mov_imm(8, ptr(rbp, slot_disp(k)), 0);
            }
            else
            {
                m_a.lea(rdi, ptr(rbp, slot_disp(nl - 1)));
                m_a.mov_imm(rcx, nl);
                m_a.alu(Alu::Xor, 4, rax, rax);
                m_a.rep_stosq();
            }
            return;
        }
        for (uint32_t r = 0; r < m_f.num_entry_regs(); ++r)
        {
            if (!m_alloc.live_at_entry[r])
                continue;
            const auto& l = loc(r);
            if (r < np)
            {
                if (l.kind == Location::Reg)
                    m_a.mov(8, l.reg, ptr(rbp, param_disp(r)));
            }
            else if (l.kind == Location::Reg)
                m_a.mov_imm(l.reg, 0);
            else if (l.kind == Location::Slot)
                m_a.mov_imm(8, slot(l), 0);
        }
    }

    Mem saved_slot(size_t k) const
    {
        return ptr(rbp, slot_disp(static_cast<uint32_t>(m_alloc.num_slots + k)));
    }

    void epilogue()
    {
        for (size_t k = 0; k < m_saved.size(); ++k)
            m_a.mov(8, m_saved[k], saved_slot(k));
        m_a.dec_mem(4, ptr(r15, vmctx::kDepth));
        if (m_f.frame_weight != 0)
            m_a.alu_imm(Alu::Sub, 8, ptr(r15, vmctx::kWeightUsed),
                static_cast<int32_t>(m_f.frame_weight));
        m_a.leave();
        m_a.ret();
    }

    void emit_out_of_line()
    {
        // Weight or native stack exhausted: report the current depth.
        m_a.bind(m_stack_exceeded);
        m_a.mov(4, rax, ptr(r15, vmctx::kDepth));
        m_a.jmp(trap_label(TrapCode::WasmCallStackExceed));

        for (size_t c = 0; c < m_traps.size(); ++c)
        {
            if (m_traps[c] == kNoLabel)
                continue;
            m_a.bind(m_traps[c]);
            m_a.mov(8, rdi, r15);
            m_a.mov_imm(rsi, c);
            m_a.mov(8, rdx, rax);
            m_a.mov(8, rcx, rbx);
            call_c(reinterpret_cast<const void*>(&detwasm_raise_trap));
            m_a.int3();
        }

        for (const auto& t : m_tables)
        {
            m_a.align(4);
            m_a.bind(t.label);
            for (auto b : t.targets)
                m_a.table_entry(m_blocks[b], t.label);
        }
    }

    void effective_address(const dmir::Instr& in)
    {
        load(rax, in.args[0]);
        if (in.imm != 0)
        {
            if (in.imm <= INT32_MAX)
                m_a.alu_imm(Alu::Add, 8, rax, static_cast<int32_t>(in.imm));
            else
            {
                m_a.mov_imm(rcx, in.imm);
                m_a.alu(Alu::Add, 8, rax, rcx);
            }
        }
        if (m_config.bounds == BoundsStrategy::SoftwareCheck)
        {
            m_a.lea(rcx, ptr(rax, in.width));
            m_a.alu(Alu::Cmp, 8, rcx, ptr(r15, vmctx::kMemorySize));
            m_a.jcc(kA, trap_label(TrapCode::MemoryAccessOutOfBounds));
        }
    }

    void pass_arguments(const std::vector<Reg>& args, size_t count)
    {
        for (size_t i = 0; i < count; ++i)
        {
            const auto at = ptr(rsp, static_cast<int32_t>(8 * i));
            const auto& l = loc(args[i]);
            if (l.kind == Location::Reg)
                m_a.mov(8, at, l.reg);
            else if (l.kind == Location::Imm && fits_simm32(l.imm))
                m_a.mov_imm(8, at, static_cast<int32_t>(l.imm));
            else
            {
                load(rax, args[i]);
                m_a.mov(8, at, rax);
            }
        }
    }

    void emit(const dmir::Instr& in, const dmir::Instr* next)
    {
        const int sz = size_of(in.type);
        switch (in.op)
        {
        case Op::Const:
        {
            const auto& l = loc(in.dst);
            if (l.kind == Location::Reg)
                m_a.mov_imm(l.reg, in.imm);
            else if (l.kind == Location::Slot)
            {
                if (fits_simm32(in.imm))
                    m_a.mov_imm(8, slot(l), static_cast<int32_t>(in.imm));
                else
                {
                    m_a.mov_imm(rax, in.imm);
                    m_a.mov(8, slot(l), rax);
                }
            }
            break;
        }
        case Op::Copy:
        case Op::Reinterpret:
        {
            const auto& d = loc(in.dst);
            const auto& s = loc(in.args[0]);
            if (d.kind == Location::Reg)
                load(d.reg, in.args[0]);
            else if (d.kind == Location::Slot && !(s.kind == Location::Slot && s.disp == d.disp))
            {
                load(rax, in.args[0]);
                store(in.dst, rax);
            }
            break;
        }
        case Op::Select:
        {
            load(rax, in.args[0]);
            load(rcx, in.args[1]);
            if (const auto k = test_nonzero(in.args[2]))
            {
                if (!*k)
                    m_a.mov(8, rax, rcx);
            }
            else
                m_a.cmov(kE, 8, rax, rcx);
            store(in.dst, rax);
            break;
        }
        case Op::Add:
        case Op::Sub:
        case Op::And:
        case Op::Or:
        case Op::Xor:
        {
            static constexpr Alu kAlu[] = {Alu::Add, Alu::Sub};
            Alu op;
            switch (in.op)
            {
            case Op::Add: op = kAlu[0]; break;
            case Op::Sub: op = kAlu[1]; break;
            case Op::And: op = Alu::And; break;
            case Op::Or: op = Alu::Or; break;
            default: op = Alu::Xor; break;
            }
            const auto t = target(in.dst, in.args[1]);
            load(t, in.args[0]);
            alu_operand(op, sz, t, in.args[1]);
            store(in.dst, t);
            break;
        }
        case Op::Mul:
        {
            const auto t = target(in.dst, in.args[1]);
            load(t, in.args[0]);
            const auto& b = loc(in.args[1]);
            if (b.kind == Location::Reg)
                m_a.imul(sz, t, b.reg);
            else if (b.kind == Location::Slot)
                m_a.imul(sz, t, slot(b));
            else
            {
                load(rcx, in.args[1]);
                m_a.imul(sz, t, rcx);
            }
            store(in.dst, t);
            break;
        }
        case Op::Shl:
        case Op::ShrS:
        case Op::ShrU:
        case Op::Rotl:
        case Op::Rotr:
        {
            Shift op;
            switch (in.op)
            {
            case Op::Shl: op = Shift::Shl; break;
            case Op::ShrS: op = Shift::Sar; break;
            case Op::ShrU: op = Shift::Shr; break;
            case Op::Rotl: op = Shift::Rol; break;
            default: op = Shift::Ror; break;
            }
            const auto t = target(in.dst, in.args[1]);
            const auto& b = loc(in.args[1]);
            if (b.kind == Location::Imm)
            {
                load(t, in.args[0]);
                m_a.shift_imm(op, sz, t, static_cast<uint8_t>(b.imm & (sz * 8 - 1)));
            }
            else
            {
                load(rcx, in.args[1]);
                load(t, in.args[0]);
                m_a.shift_cl(op, sz, t);
            }
            store(in.dst, t);
            break;
        }
        case Op::DivS:
        case Op::DivU:
        case Op::RemS:
        case Op::RemU:
            emit_divrem(in, sz);
            break;
        case Op::Clz:
        case Op::Ctz:
        case Op::Popcnt:
        {
            if (needs_helper(in))
            {
                emit_unary_helper(in);
                break;
            }
            const auto t = target(in.dst);
            load(t, in.args[0]);
            if (in.op == Op::Clz)
                m_a.lzcnt(sz, t, t);
            else if (in.op == Op::Ctz)
                m_a.tzcnt(sz, t, t);
            else
                m_a.popcnt(sz, t, t);
            store(in.dst, t);
            break;
        }
        case Op::Eqz:
        case Op::Eq:
        case Op::Ne:
        case Op::LtS:
        case Op::LtU:
        case Op::GtS:
        case Op::GtU:
        case Op::LeS:
        case Op::LeU:
        case Op::GeS:
        case Op::GeU:
        {
            const int osz = size_of(in.src_type);
            load(rax, in.args[0]);
            Cond cc;
            if (in.op == Op::Eqz)
            {
                m_a.test(osz, rax, rax);
                cc = kE;
            }
            else
            {
                alu_operand(Alu::Cmp, osz, rax, in.args[1]);
                cc = int_cond(in.op);
            }
            if (m_optimize && next != nullptr && next->op == Op::CondBr &&
                next->args[0] == in.dst && m_uses[in.dst] == 1)
            {
                m_fused = cc;
                break;
            }
            m_a.setcc(cc, rax);
            m_a.movzx(rax, 1, rax);
            store(in.dst, rax);
            break;
        }
        case Op::FAdd:
        case Op::FSub:
        case Op::FMul:
        case Op::FDiv:
        {
            const bool dbl = in.type == ValType::f64;
            SseOp op;
            switch (in.op)
            {
            case Op::FAdd: op = SseOp::Add; break;
            case Op::FSub: op = SseOp::Sub; break;
            case Op::FMul: op = SseOp::Mul; break;
            default: op = SseOp::Div; break;
            }
            load(rax, in.args[0]);
            load(rcx, in.args[1]);
            m_a.movq(sz, xmm0, rax);
            m_a.movq(sz, xmm1, rcx);
            m_a.sse(op, dbl, xmm0, xmm1);
            canonicalize(dbl);
            store(in.dst, rax);
            break;
        }
        case Op::FMin:
        case Op::FMax:
            emit_binary_helper(in);
            break;
        case Op::FCopysign:
        {
            load(rax, in.args[0]);
            load(rcx, in.args[1]);
            if (in.type == ValType::f32)
            {
                m_a.alu_imm(Alu::And, 4, rax, 0x7fff'ffff);
                m_a.alu_imm(Alu::And, 4, rcx, INT32_MIN);
                m_a.alu(Alu::Or, 4, rax, rcx);
            }
            else
            {
                m_a.shift_imm(Shift::Shl, 8, rax, 1);
                m_a.shift_imm(Shift::Shr, 8, rax, 1);
                m_a.shift_imm(Shift::Shr, 8, rcx, 63);
                m_a.shift_imm(Shift::Shl, 8, rcx, 63);
                m_a.alu(Alu::Or, 8, rax, rcx);
            }
            store(in.dst, rax);
            break;
        }
        case Op::FAbs:
        case Op::FNeg:
        {
            const auto t = target(in.dst);
            load(t, in.args[0]);
            if (in.type == ValType::f32)
                m_a.alu_imm(in.op == Op::FAbs ? Alu::And : Alu::Xor, 4, t,
                    in.op == Op::FAbs ? 0x7fff'ffff : INT32_MIN);
            else if (in.op == Op::FAbs)
            {
                m_a.shift_imm(Shift::Shl, 8, t, 1);
                m_a.shift_imm(Shift::Shr, 8, t, 1);
            }
            else
            {
                m_a.mov_imm(rcx, uint64_t{1} << 63);
                m_a.alu(Alu::Xor, 8, t, rcx);
            }
            store(in.dst, t);
            break;
        }
        case Op::FSqrt:
        case Op::FCeil:
        case Op::FFloor:
        case Op::FTrunc:
        case Op::FNearest:
        {
            if (needs_helper(in))
            {
                emit_unary_helper(in);
                break;
            }
            const bool dbl = in.type == ValType::f64;
            load(rax, in.args[0]);
            m_a.movq(sz, xmm0, rax);
            if (in.op == Op::FSqrt)
                m_a.sse(SseOp::Sqrt, dbl, xmm0, xmm0);
            else
            {
                uint8_t mode = 0;
                switch (in.op)
                {
                case Op::FFloor: mode = 1; break;
                case Op::FCeil: mode = 2; break;
                case Op::FTrunc: mode = 3; break;
                default: mode = 0; break;
                }
                m_a.round(dbl, xmm0, xmm0, static_cast<uint8_t>(mode | 8));
            }
            canonicalize(dbl);
            store(in.dst, rax);
            break;
        }
        case Op::FEq:
        case Op::FNe:
        case Op::FLt:
        case Op::FGt:
        case Op::FLe:
        case Op::FGe:
        {
            const bool dbl = in.src_type == ValType::f64;
            const int osz = size_of(in.src_type);
            load(rax, in.args[0]);
            load(rcx, in.args[1]);
            m_a.movq(osz, xmm0, rax);
            m_a.movq(osz, xmm1, rcx);
            switch (in.op)
            {
            case Op::FEq:
                m_a.ucomis(dbl, xmm0, xmm1);
                m_a.setcc(kNP, rax);
                m_a.setcc(kE, rcx);
                m_a.alu(Alu::And, 1, rax, rcx);
                break;
            case Op::FNe:
                m_a.ucomis(dbl, xmm0, xmm1);
                m_a.setcc(kP, rax);
                m_a.setcc(kNE, rcx);
                m_a.alu(Alu::Or, 1, rax, rcx);
                break;
            case Op::FLt:
                m_a.ucomis(dbl, xmm1, xmm0);
                m_a.setcc(kA, rax);
                break;
            case Op::FGt:
                m_a.ucomis(dbl, xmm0, xmm1);
                m_a.setcc(kA, rax);
                break;
            case Op::FLe:
                m_a.ucomis(dbl, xmm1, xmm0);
                m_a.setcc(kAE, rax);
                break;
            default:
                m_a.ucomis(dbl, xmm0, xmm1);
                m_a.setcc(kAE, rax);
                break;
            }
            m_a.movzx(rax, 1, rax);
            store(in.dst, rax);
            break;
        }
        case Op::Wrap:
        case Op::ExtendU:
        {
            const auto t = target(in.dst);
            load(t, in.args[0]);
            m_a.mov(4, t, t);
            store(in.dst, t);
            break;
        }
        case Op::ExtendS:
        {
            const auto t = target(in.dst);
            load(t, in.args[0]);
            m_a.movsx(8, t, 4, t);
            store(in.dst, t);
            break;
        }
        case Op::TruncS:
        case Op::TruncU:
        {
            m_a.mov(8, ptr(r15, vmctx::kGasRemaining), rbx);
            load(rax, in.args[0]);
            m_a.mov(8, rsi, rax);
            m_a.mov(8, rdi, r15);
            m_a.mov_imm(rdx, describe(in));
            call_c(reinterpret_cast<const void*>(&detwasm_helper_trunc));
            store(in.dst, rax);
            break;
        }
        case Op::ConvertS:
        case Op::ConvertU:
        {
            if (needs_helper(in))
            {
                emit_unary_helper(in);
                break;
            }
            const bool dbl = in.type == ValType::f64;
            load(rax, in.args[0]);
            // Unsigned 32-bit sources are already zero-extended: convert as signed 64-bit.
            const int src_sz = in.op == Op::ConvertU ? 8 : size_of(in.src_type);
            m_a.cvtsi2s(dbl, src_sz, xmm0, rax);
            m_a.movq(sz, rax, xmm0);
            store(in.dst, rax);
            break;
        }
        case Op::Demote:
        case Op::Promote:
        {
            const bool to_double = in.op == Op::Promote;
            load(rax, in.args[0]);
            m_a.movq(to_double ? 4 : 8, xmm0, rax);
            m_a.cvt_float(to_double, xmm0, xmm0);
            canonicalize(to_double);
            store(in.dst, rax);
            break;
        }
        case Op::Load:
        {
            effective_address(in);
            const auto at = ptr(r14, rax, 0);
            const bool wide = in.type == ValType::i64;
            switch (in.width)
            {
            case 1:
            case 2:
                if (in.sign_extend)
                    m_a.movsx(wide ? 8 : 4, rax, in.width, at);
                else
                    m_a.mov(in.width, rax, at);
                break;
            case 4:
                if (in.sign_extend && wide)
                    m_a.movsx(8, rax, 4, at);
                else
                    m_a.mov(4, rax, at);
                break;
            default:
                m_a.mov(8, rax, at);
                break;
            }
            store(in.dst, rax);
            break;
        }
        case Op::Store:
        {
            Gp value = rdx;
            const auto& v = loc(in.args[1]);
            if (v.kind == Location::Reg)
                value = v.reg;
            else
                load(rdx, in.args[1]);
            effective_address(in);
            m_a.mov(in.width, ptr(r14, rax, 0), value);
            break;
        }
        case Op::MemorySize:
            m_a.mov(8, rax, ptr(r15, vmctx::kMemorySize));
            m_a.shift_imm(Shift::Shr, 8, rax, 16);
            store(in.dst, rax);
            break;
        case Op::MemoryGrow:
            load(rax, in.args[0]);
            m_a.mov(4, rsi, rax);
            m_a.mov(8, rdi, r15);
            call_c(reinterpret_cast<const void*>(&detwasm_memory_grow));
            m_a.mov(8, r14, ptr(r15, vmctx::kMemoryBase));
            m_a.mov(4, rax, rax);
            store(in.dst, rax);
            break;
        case Op::GlobalGet:
        {
            const auto t = target(in.dst);
            m_a.mov(8, rax, ptr(r15, vmctx::kGlobals));
            m_a.mov(8, t, ptr(rax, static_cast<int32_t>(8 * in.imm)));
            store(in.dst, t);
            break;
        }
        case Op::GlobalSet:
            load(rcx, in.args[0]);
            m_a.mov(8, rax, ptr(r15, vmctx::kGlobals));
            m_a.mov(8, ptr(rax, static_cast<int32_t>(8 * in.imm)), rcx);
            break;
        case Op::Call:
            pass_arguments(in.args, in.args.size());
            m_a.mov(8, rax, ptr(r15, vmctx::kFuncEntries));
            m_a.call(ptr(rax, static_cast<int32_t>(8 * in.imm)));
            m_a.mov(8, r14, ptr(r15, vmctx::kMemoryBase));
            if (in.has_dst())
                store(in.dst, rax);
            break;
        case Op::CallIndirect:
        {
            const auto n = in.args.size() - 1;
            pass_arguments(in.args, n);
            load(rax, in.args[n]);
            m_a.mov(4, rax, rax);
            m_a.alu(Alu::Cmp, 8, rax, ptr(r15, vmctx::kTableSize));
            m_a.jcc(kAE, trap_label(TrapCode::UndefinedTableElement));
            m_a.mov(8, rcx, ptr(r15, vmctx::kTable));
            m_a.mov(4, rdx, ptr(rcx, rax, 3));
            const auto ok = m_a.new_label();
            m_a.alu_imm(Alu::Cmp, 4, rdx, static_cast<int32_t>(in.imm));
            m_a.jcc(kE, ok);
            m_a.alu_imm(Alu::Cmp, 4, rdx, -1);
            m_a.jcc(kE, trap_label(TrapCode::UndefinedTableElement));
            m_a.jmp(trap_label(TrapCode::IndirectCallTypeMismatch));
            m_a.bind(ok);
            m_a.mov(4, rcx, ptr(rcx, rax, 3, 4));
            m_a.mov(8, rax, ptr(r15, vmctx::kFuncEntries));
            m_a.call(ptr(rax, rcx, 3));
            m_a.mov(8, r14, ptr(r15, vmctx::kMemoryBase));
            if (in.has_dst())
                store(in.dst, rax);
            break;
        }
        case Op::CheckedArith:
            emit_checked(in);
            break;
        case Op::GasCharge:
            if (in.imm <= INT32_MAX)
                m_a.alu_imm(Alu::Sub, 8, rbx, static_cast<int32_t>(in.imm));
            else
            {
                m_a.mov_imm(rax, in.imm);
                m_a.alu(Alu::Sub, 8, rbx, rax);
            }
            m_a.jcc(kB, trap_label(TrapCode::GasExhausted));
            break;
        case Op::Br:
            jump_to(in.targets[0]);
            break;
        case Op::CondBr:
        {
            if (m_fused)
            {
                const auto cc = *m_fused;
                m_fused.reset();
                branch(cc, in.targets[0], in.targets[1]);
                break;
            }
            if (const auto k = test_nonzero(in.args[0]))
                jump_to(*k ? in.targets[0] : in.targets[1]);
            else
                branch(kNE, in.targets[0], in.targets[1]);
            break;
        }
        case Op::Switch:
        {
            const auto n = in.targets.size() - 1;
            load(rax, in.args[0]);
            m_a.alu_imm(Alu::Cmp, 4, rax, static_cast<int32_t>(n));
            m_a.jcc(kAE, m_blocks[in.targets[n]]);
            const auto table = m_a.new_label();
            m_a.lea_rip(rcx, table);
            m_a.movsx(8, rax, 4, ptr(rcx, rax, 2));
            m_a.alu(Alu::Add, 8, rax, rcx);
            m_a.jmp(rax);
            m_tables.push_back({table, {in.targets.begin(), in.targets.end() - 1}});
            break;
        }
        case Op::Return:
            if (!in.args.empty())
                load(rax, in.args[0]);
            epilogue();
            break;
        case Op::Trap:
            m_a.jmp(trap_label(static_cast<TrapCode>(in.imm)));
            break;
        }
    }

    void emit_divrem(const dmir::Instr& in, int sz)
    {
        load(rcx, in.args[1]);
        m_a.test(sz, rcx, rcx);
        m_a.jcc(kE, trap_label(TrapCode::IntegerDivideByZero));
        load(rax, in.args[0]);
        const bool is_signed = in.op == Op::DivS || in.op == Op::RemS;
        if (!is_signed)
        {
            m_a.alu(Alu::Xor, 4, rdx, rdx);
            m_a.unary(Unary::Div, sz, rcx);
            if (in.op == Op::RemU)
                m_a.mov(8, rax, rdx);
            store(in.dst, rax);
            return;
        }
        const auto normal = m_a.new_label();
        const auto done = m_a.new_label();
        m_a.alu_imm(Alu::Cmp, sz, rcx, -1);
        m_a.jcc(kNE, normal);
        if (in.op == Op::DivS)
        {
            // x / -1 overflows only for the minimum value; otherwise it is -x.
            if (sz == 4)
                m_a.alu_imm(Alu::Cmp, 4, rax, INT32_MIN);
            else
            {
                m_a.mov_imm(rdx, uint64_t{1} << 63);
                m_a.alu(Alu::Cmp, 8, rax, rdx);
            }
            m_a.jcc(kE, trap_label(TrapCode::IntegerOverflow));
            m_a.unary(Unary::Neg, sz, rax);
        }
        else
            m_a.alu(Alu::Xor, 4, rax, rax);
        m_a.jmp(done);
        m_a.bind(normal);
        m_a.sign_extend_ax(sz);
        m_a.unary(Unary::Idiv, sz, rcx);
        if (in.op == Op::RemS)
            m_a.mov(8, rax, rdx);
        m_a.bind(done);
        if (sz == 4)
            m_a.mov(4, rax, rax);
        store(in.dst, rax);
    }

    void emit_checked(const dmir::Instr& in)
    {
        const int sz = in.hook.storage_type() == ValType::i64 ? 8 : 4;
        const bool sgn = in.hook.is_signed();
        const auto overflow = trap_label(TrapCode::CheckedArithmeticOverflow);
        load(rax, in.args[0]);
        switch (in.hook.op)
        {
        case HookOp::add:
            alu_operand(Alu::Add, sz, rax, in.args[1]);
            m_a.jcc(sgn ? kO : kB, overflow);
            break;
        case HookOp::sub:
            alu_operand(Alu::Sub, sz, rax, in.args[1]);
            m_a.jcc(sgn ? kO : kB, overflow);
            break;
        case HookOp::mul:
            load(rcx, in.args[1]);
            if (sgn)
                m_a.imul(sz, rax, rcx);
            else
                m_a.unary(Unary::Mul, sz, rcx);
            m_a.jcc(kO, overflow);
            break;
        }
        store(in.dst, rax);
    }

    void emit_unary_helper(const dmir::Instr& in)
    {
        load(rax, in.args[0]);
        m_a.mov(8, rdi, rax);
        m_a.mov_imm(rsi, describe(in));
        call_c(reinterpret_cast<const void*>(&detwasm_helper_unary));
        store(in.dst, rax);
    }

    void emit_binary_helper(const dmir::Instr& in)
    {
        load(rax, in.args[0]);
        load(rcx, in.args[1]);
        m_a.mov(8, rdi, rax);
        m_a.mov(8, rsi, rcx);
        m_a.mov_imm(rdx, describe(in));
        call_c(reinterpret_cast<const void*>(&detwasm_helper_binary));
        store(in.dst, rax);
    }

    struct JumpTable
    {
        Label label;
        std::vector<BlockId> targets;
    };

    const dmir::Function& m_f;
    const BackendConfig& m_config;
    Allocation m_alloc;
    bool m_optimize;
    Assembler m_a;
    std::vector<Label> m_blocks;
    std::array<Label, kNumTrapCodes> m_traps{};
    Label m_stack_exceeded = kNoLabel;
    std::vector<JumpTable> m_tables;
    std::vector<uint32_t> m_uses;
    std::vector<Gp> m_saved;  ///< Callee-saved registers the allocation uses.
    uint32_t m_out_args = 0;
    int32_t m_frame_size = 0;
    BlockId m_next = dmir::kNoBlock;
    std::optional<Cond> m_fused;
};

std::unique_ptr<ExecutableFunction> finish(uint32_t func_index, Tier tier,
    std::vector<uint8_t> code, const BackendConfig& config,
    std::chrono::steady_clock::time_point started)
{
    if (code.size() > config.max_code_bytes)
        throw ResourceLimit{"function " + std::to_string(func_index) + " needs " +
                            std::to_string(code.size()) + " bytes of code"};
    auto fn = std::make_unique<ExecutableFunction>();
    fn->func_index = func_index;
    fn->tier = tier;
    fn->code = CodeRegion{code};
    fn->entry = fn->code.data();
    fn->code_size_bytes = code.size();
    fn->compile_time = std::chrono::steady_clock::now() - started;
    return fn;
}
}  // namespace

std::string_view to_string(Tier tier) noexcept
{
    return tier == Tier::Tier1_FLAT ? "flat" : "flas";
}

std::unique_ptr<ExecutableFunction> compile_flat(
    const dmir::Function& f, const ValidatedModule&, const BackendConfig& config)
{
    const auto started = std::chrono::steady_clock::now();
    CodeGen gen{f, config, allocate_stack_only(f), false};
    return finish(f.func_index, Tier::Tier1_FLAT, gen.generate(), config, started);
}

std::unique_ptr<ExecutableFunction> compile_flas(
    const dmir::Function& f, const ValidatedModule&, const BackendConfig& config)
{
    const auto started = std::chrono::steady_clock::now();
    auto opt = f;
    dmir::run_passes(opt, config.passes);
    CodeGen gen{opt, config, allocate_linear_scan(opt), true};
    return finish(f.func_index, Tier::Tier2_FLAS, gen.generate(), config, started);
}

std::string metrics_json(const ExecutableFunction& fn)
{
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(fn.compile_time).count();
    return "{\"func_index\":" + std::to_string(fn.func_index) + ",\"tier\":\"" +
           std::string{to_string(fn.tier)} + "\",\"compile_us\":" + std::to_string(us) +
           ",\"code_size_bytes\":" + std::to_string(fn.code_size_bytes) + "}";
}

}  // namespace detwasm

using namespace detwasm;

extern "C" uint64_t detwasm_helper_unary(uint64_t a, uint32_t desc)
{
    return dmir::eval_unary(op_of(desc), type_of(desc), src_of(desc), a);
}

extern "C" uint64_t detwasm_helper_binary(uint64_t a, uint64_t b, uint32_t desc)
{
    return dmir::eval_binary(op_of(desc), src_of(desc), a, b);
}

extern "C" uint64_t detwasm_helper_trunc(VMContext* ctx, uint64_t a, uint32_t desc)
{
    uint64_t out = 0;
    if (const auto trap = dmir::eval_trunc(op_of(desc), type_of(desc), src_of(desc), a, out))
        detwasm_raise_trap(ctx, static_cast<uint32_t>(*trap), 0, ctx->gas_remaining);
    return out;
}
