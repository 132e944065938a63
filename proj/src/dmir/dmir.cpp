// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/dmir/dmir.hpp"
#include "detwasm/dmir/bitset.hpp"

#include <cinttypes>
#include <cstdio>

namespace detwasm::dmir
{
std::string_view to_string(Op op) noexcept
{
    switch (op)
    {
    case Op::Const: return "const";
    case Op::Copy: return "copy";
    case Op::Select: return "select";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::DivS: return "div_s";
    case Op::DivU: return "div_u";
    case Op::RemS: return "rem_s";
    case Op::RemU: return "rem_u";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Xor: return "xor";
    case Op::Shl: return "shl";
    case Op::ShrS: return "shr_s";
    case Op::ShrU: return "shr_u";
    case Op::Rotl: return "rotl";
    case Op::Rotr: return "rotr";
    case Op::Clz: return "clz";
    case Op::Ctz: return "ctz";
    case Op::Popcnt: return "popcnt";
    case Op::Eqz: return "eqz";
    case Op::Eq: return "eq";
    case Op::Ne: return "ne";
    case Op::LtS: return "lt_s";
    case Op::LtU: return "lt_u";
    case Op::GtS: return "gt_s";
    case Op::GtU: return "gt_u";
    case Op::LeS: return "le_s";
    case Op::LeU: return "le_u";
    case Op::GeS: return "ge_s";
    case Op::GeU: return "ge_u";
    case Op::FAdd: return "fadd";
    case Op::FSub: return "fsub";
    case Op::FMul: return "fmul";
    case Op::FDiv: return "fdiv";
    case Op::FMin: return "fmin";
    case Op::FMax: return "fmax";
    case Op::FCopysign: return "fcopysign";
    case Op::FAbs: return "fabs";
    case Op::FNeg: return "fneg";
    case Op::FCeil: return "fceil";
    case Op::FFloor: return "ffloor";
    case Op::FTrunc: return "ftrunc";
    case Op::FNearest: return "fnearest";
    case Op::FSqrt: return "fsqrt";
    case Op::FEq: return "feq";
    case Op::FNe: return "fne";
    case Op::FLt: return "flt";
    case Op::FGt: return "fgt";
    case Op::FLe: return "fle";
    case Op::FGe: return "fge";
    case Op::Wrap: return "wrap";
    case Op::ExtendS: return "extend_s";
    case Op::ExtendU: return "extend_u";
    case Op::TruncS: return "trunc_s";
    case Op::TruncU: return "trunc_u";
    case Op::ConvertS: return "convert_s";
    case Op::ConvertU: return "convert_u";
    case Op::Demote: return "demote";
    case Op::Promote: return "promote";
    case Op::Reinterpret: return "reinterpret";
    case Op::Load: return "load";
    case Op::Store: return "store";
    case Op::MemorySize: return "memory_size";
    case Op::MemoryGrow: return "memory_grow";
    case Op::GlobalGet: return "global_get";
    case Op::GlobalSet: return "global_set";
    case Op::Call: return "call";
    case Op::CallIndirect: return "call_indirect";
    case Op::CheckedArith: return "checked";
    case Op::GasCharge: return "gas_charge";
    case Op::Br: return "br";
    case Op::CondBr: return "cond_br";
    case Op::Switch: return "switch";
    case Op::Return: return "ret";
    case Op::Trap: return "trap";
    }
    return "?";
}

size_t Function::instruction_count() const noexcept
{
    size_t n = 0;
    for (const auto& b : blocks)
        n += b.instrs.size();
    return n;
}

std::vector<BlockId> successors(const Block& b)
{
    if (b.instrs.empty())
        return {};
    return b.terminator().targets;
}

namespace
{
std::string reg(Reg r)
{
    return r == kNoReg ? "r?" : "r" + std::to_string(r);
}

std::string block(BlockId b)
{
    return "b" + std::to_string(b);
}

std::string reg_list(const std::vector<Reg>& regs, size_t begin = 0, size_t end = SIZE_MAX)
{
    std::string s;
    end = std::min(end, regs.size());
    for (size_t i = begin; i < end; ++i)
    {
        if (i != begin)
            s += ", ";
        s += reg(regs[i]);
    }
    return s;
}

std::string const_text(ValType t, uint64_t bits)
{
    char buf[32];
    switch (t)
    {
    case ValType::i32:
        return std::to_string(static_cast<int32_t>(bits));
    case ValType::i64:
        return std::to_string(static_cast<int64_t>(bits));
    case ValType::f32:
        std::snprintf(buf, sizeof buf, "0x%08" PRIx32, static_cast<uint32_t>(bits));
        return buf;
    case ValType::f64:
        std::snprintf(buf, sizeof buf, "0x%016" PRIx64, bits);
        return buf;
    }
    return {};
}

bool is_conversion(Op op) noexcept
{
    return op >= Op::Wrap && op <= Op::Reinterpret;
}

bool is_test(Op op) noexcept
{
    return (op >= Op::Eqz && op <= Op::GeU) || (op >= Op::FEq && op <= Op::FGe);
}

std::string print_instr(const Instr& in)
{
    std::string s;
    if (in.has_dst())
        s = reg(in.dst) + " = ";
    const auto name = std::string{to_string(in.op)};
    switch (in.op)
    {
    case Op::Const:
        return s + name + "." + std::string{to_string(in.type)} + " " + const_text(in.type, in.imm);
    case Op::Load:
        return s + name + "." + std::string{to_string(in.type)} + " " + reg(in.args[0]) +
               " offset=" + std::to_string(in.imm) + " width=" + std::to_string(in.width) +
               (in.sign_extend ? " sext" : "");
    case Op::Store:
        return s + name + "." + std::string{to_string(in.type)} + " " + reg_list(in.args) +
               " offset=" + std::to_string(in.imm) + " width=" + std::to_string(in.width);
    case Op::MemorySize:
        return s + name + ".i32";
    case Op::GlobalGet:
        return s + name + "." + std::string{to_string(in.type)} + " g" + std::to_string(in.imm);
    case Op::GlobalSet:
        return s + name + "." + std::string{to_string(in.type)} + " g" + std::to_string(in.imm) +
               ", " + reg(in.args[0]);
    case Op::Call:
    {
        s += name;
        if (in.has_dst())
            s += "." + std::string{to_string(in.type)};
        s += " f" + std::to_string(in.imm);
        if (!in.args.empty())
            s += " " + reg_list(in.args);
        return s;
    }
    case Op::CallIndirect:
    {
        s += name;
        if (in.has_dst())
            s += "." + std::string{to_string(in.type)};
        s += " sig" + std::to_string(in.imm) + " [" + reg(in.args.back()) + "]";
        if (in.args.size() > 1)
            s += " " + reg_list(in.args, 0, in.args.size() - 1);
        return s;
    }
    case Op::CheckedArith:
        return s + name + "." + to_string(in.hook) + " " + reg_list(in.args);
    case Op::GasCharge:
        return name + " " + std::to_string(in.imm);
    case Op::Br:
        return name + " " + block(in.targets[0]);
    case Op::CondBr:
        return name + " " + reg(in.args[0]) + ", " + block(in.targets[0]) + ", " +
               block(in.targets[1]);
    case Op::Switch:
    {
        s = name + " " + reg(in.args[0]) + " [";
        for (size_t i = 0; i + 1 < in.targets.size(); ++i)
        {
            if (i != 0)
                s += ", ";
            s += block(in.targets[i]);
        }
        return s + "], " + block(in.targets.back());
    }
    case Op::Return:
        return in.args.empty() ? name : name + " " + reg(in.args[0]);
    case Op::Trap:
        return name + " " + std::string{to_string(static_cast<TrapCode>(in.imm))};
    default:
        break;
    }
    s += name + "." + std::string{to_string(is_test(in.op) ? in.src_type : in.type)};
    if (is_conversion(in.op))
        s += "." + std::string{to_string(in.src_type)};
    if (!in.args.empty())
        s += " " + reg_list(in.args);
    return s;
}
}  // namespace

std::string print(const Function& f)
{
    std::string s = "func " + std::to_string(f.func_index) + " " + to_string(f.signature) + "\n";
    for (size_t b = 0; b < f.blocks.size(); ++b)
    {
        s += block(static_cast<BlockId>(b)) + ":";
        if (f.blocks[b].loop_header)
            s += " ; loop";
        s += "\n";
        for (const auto& in : f.blocks[b].instrs)
            s += "  " + print_instr(in) + "\n";
    }
    return s;
}

std::string verify(const Function& f)
{
    const auto nb = f.blocks.size();
    const auto nr = f.num_regs();
    if (nb == 0)
        return "function has no blocks";
    if (f.num_entry_regs() > nr)
        return "register table smaller than params and locals";

    for (size_t b = 0; b < nb; ++b)
    {
        const auto& blk = f.blocks[b];
        if (blk.instrs.empty() || !is_terminator(blk.terminator().op))
            return block(static_cast<BlockId>(b)) + ": missing terminator";
        for (size_t i = 0; i + 1 < blk.instrs.size(); ++i)
            if (is_terminator(blk.instrs[i].op))
                return block(static_cast<BlockId>(b)) + ": terminator before end of block";
        for (const auto& in : blk.instrs)
        {
            for (auto t : in.targets)
                if (t >= nb)
                    return block(static_cast<BlockId>(b)) + ": branch target out of range";
            for (auto a : in.args)
                if (a >= nr)
                    return block(static_cast<BlockId>(b)) + ": operand register out of range";
            if (in.has_dst() && in.dst >= nr)
                return block(static_cast<BlockId>(b)) + ": result register out of range";
            if (in.op == Op::GasCharge && in.imm == 0)
                return block(static_cast<BlockId>(b)) + ": zero gas charge";
        }
    }

    // Def-before-use: forward "must be defined" dataflow over reachable blocks.
    std::vector<BitSet> in_sets(nb, BitSet{nr, true});
    std::vector<bool> reachable(nb, false);
    BitSet entry{nr};
    for (uint32_t r = 0; r < f.num_entry_regs(); ++r)
        entry.set(r);
    in_sets[0] = entry;
    reachable[0] = true;

    auto transfer = [&](size_t b) {
        auto out = in_sets[b];
        for (const auto& in : f.blocks[b].instrs)
            if (in.has_dst())
                out.set(in.dst);
        return out;
    };

    bool changed = true;
    while (changed)
    {
        changed = false;
        for (size_t b = 0; b < nb; ++b)
        {
            if (!reachable[b])
                continue;
            const auto out = transfer(b);
            for (auto s : f.blocks[b].terminator().targets)
            {
                if (!reachable[s])
                {
                    reachable[s] = true;
                    in_sets[s] = out;
                    changed = true;
                }
                else
                    changed |= in_sets[s].intersect(out);
            }
        }
    }

    for (size_t b = 0; b < nb; ++b)
    {
        if (!reachable[b])
            continue;
        auto defined = in_sets[b];
        for (const auto& in : f.blocks[b].instrs)
        {
            for (auto a : in.args)
                if (!defined.test(a))
                    return block(static_cast<BlockId>(b)) + ": " + reg(a) + " used before definition";
            if (in.has_dst())
                defined.set(in.dst);
        }
    }
    return {};
}

}  // namespace detwasm::dmir
