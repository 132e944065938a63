// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/dmir/passes.hpp"
#include "detwasm/dmir/semantics.hpp"

#include <algorithm>

namespace detwasm::dmir
{
namespace
{
bool is_foldable(Op op) noexcept
{
    switch (op)
    {
    case Op::DivS:
    case Op::DivU:
    case Op::RemS:
    case Op::RemU:
    case Op::TruncS:
    case Op::TruncU:
        return false;
    default:
        return (op >= Op::Add && op <= Op::FGe) || (op >= Op::Wrap && op <= Op::Reinterpret);
    }
}

bool is_binary(Op op) noexcept
{
    return (op >= Op::Add && op <= Op::Rotr) || (op >= Op::Eq && op <= Op::GeU) ||
           (op >= Op::FAdd && op <= Op::FCopysign) || (op >= Op::FEq && op <= Op::FGe);
}

std::vector<uint32_t> def_counts(const Function& f)
{
    std::vector<uint32_t> defs(f.num_regs(), 0);
    for (const auto& b : f.blocks)
        for (const auto& in : b.instrs)
            if (in.has_dst())
                ++defs[in.dst];
    return defs;
}

std::vector<uint32_t> pred_counts(const Function& f)
{
    std::vector<uint32_t> preds(f.blocks.size(), 0);
    for (const auto& b : f.blocks)
        for (auto t : b.terminator().targets)
            ++preds[t];
    return preds;
}

void make_const(Instr& in, uint64_t value)
{
    in.op = Op::Const;
    in.imm = normalize_bits(in.type, value);
    in.args.clear();
}

void make_br(Instr& in, BlockId target)
{
    in.op = Op::Br;
    in.args.clear();
    in.targets = {target};
}

/// Constant folding, constant propagation and copy propagation.
bool fold_constants(Function& f)
{
    bool changed = false;
    const auto nr = f.num_regs();
    const auto defs = def_counts(f);
    auto stable = [&](Reg r) { return r < f.num_entry_regs() ? defs[r] == 0 : defs[r] == 1; };

    // Function-wide facts for registers that never change after their definition.
    std::vector<bool> gknown(nr, false);
    std::vector<uint64_t> gvalue(nr, 0);
    std::vector<Reg> alias(nr, kNoReg);
    for (uint32_t r = f.num_params; r < f.num_entry_regs(); ++r)
        if (defs[r] == 0)
            gknown[r] = true;  // never-assigned local stays zero
    for (const auto& b : f.blocks)
        for (const auto& in : b.instrs)
        {
            if (!in.has_dst() || !stable(in.dst) || in.dst < f.num_entry_regs())
                continue;
            if (in.op == Op::Const)
            {
                gknown[in.dst] = true;
                gvalue[in.dst] = in.imm;
            }
            else if (in.op == Op::Copy && stable(in.args[0]) && in.args[0] != in.dst)
                alias[in.dst] = in.args[0];
        }
    auto resolve = [&](Reg r) {
        for (unsigned hops = 0; alias[r] != kNoReg && hops < 64; ++hops)
            r = alias[r];
        return r;
    };

    // Block-local facts, valid until the register is redefined.
    std::vector<uint32_t> version(nr, 0);
    std::vector<uint32_t> known_at(nr, UINT32_MAX);
    std::vector<uint64_t> value(nr, 0);
    std::vector<Reg> copy_src(nr, kNoReg);
    std::vector<uint32_t> copy_ver(nr, 0);
    std::vector<uint32_t> src_ver(nr, 0);
    std::vector<Reg> touched;

    const auto preds = pred_counts(f);
    for (size_t bi = 0; bi < f.blocks.size(); ++bi)
    {
        for (auto r : touched)
        {
            known_at[r] = UINT32_MAX;
            copy_src[r] = kNoReg;
        }
        touched.clear();
        auto set_known = [&](Reg r, uint64_t v) {
            known_at[r] = version[r];
            value[r] = v;
            touched.push_back(r);
        };
        if (bi == 0 && preds[0] == 0)
            for (uint32_t r = f.num_params; r < f.num_entry_regs(); ++r)
                set_known(r, 0);

        auto is_const = [&](Reg r) { return gknown[r] || known_at[r] == version[r]; };
        auto const_of = [&](Reg r) { return gknown[r] ? gvalue[r] : value[r]; };

        for (auto& in : f.blocks[bi].instrs)
        {
            for (auto& a : in.args)
            {
                auto r = resolve(a);
                if (copy_src[r] != kNoReg && copy_ver[r] == version[r] &&
                    src_ver[r] == version[copy_src[r]])
                    r = copy_src[r];
                if (r != a)
                {
                    a = r;
                    changed = true;
                }
            }

            if (in.op == Op::Copy && is_const(in.args[0]))
            {
                make_const(in, const_of(in.args[0]));
                changed = true;
            }
            else if (is_foldable(in.op) &&
                     std::all_of(in.args.begin(), in.args.end(), is_const))
            {
                const auto a = const_of(in.args[0]);
                const auto v = is_binary(in.op) ?
                                   eval_binary(in.op, in.src_type, a, const_of(in.args[1])) :
                                   eval_unary(in.op, in.type, in.src_type, a);
                make_const(in, v);
                changed = true;
            }
            else if (in.op == Op::Select && is_const(in.args[2]))
            {
                const auto chosen = const_of(in.args[2]) != 0 ? in.args[0] : in.args[1];
                in.op = Op::Copy;
                in.args = {chosen};
                changed = true;
                if (is_const(chosen))
                    make_const(in, const_of(chosen));
            }
            else if (in.op == Op::CondBr && is_const(in.args[0]))
            {
                make_br(in, const_of(in.args[0]) != 0 ? in.targets[0] : in.targets[1]);
                changed = true;
            }
            else if (in.op == Op::Switch && is_const(in.args[0]))
            {
                const auto i = const_of(in.args[0]);
                const auto n = in.targets.size() - 1;
                make_br(in, i < n ? in.targets[i] : in.targets[n]);
                changed = true;
            }

            if (in.has_dst())
            {
                const auto d = in.dst;
                ++version[d];
                touched.push_back(d);
                if (in.op == Op::Const)
                    set_known(d, in.imm);
                else if (in.op == Op::Copy && in.args[0] != d)
                {
                    copy_src[d] = in.args[0];
                    copy_ver[d] = version[d];
                    src_ver[d] = version[in.args[0]];
                }
            }
        }
        for (auto r : touched)
            version[r] = 0;
    }
    return changed;
}


/// Drops blocks unreachable from the entry and renumbers the rest in order.
bool remove_unreachable(Function& f)
{
    const auto nb = f.blocks.size();
    std::vector<bool> reach(nb, false);
    std::vector<BlockId> work{0};
    reach[0] = true;
    while (!work.empty())
    {
        const auto b = work.back();
        work.pop_back();
        for (auto t : f.blocks[b].terminator().targets)
            if (!reach[t])
            {
                reach[t] = true;
                work.push_back(t);
            }
    }
    if (std::all_of(reach.begin(), reach.end(), [](bool r) { return r; }))
        return false;

    std::vector<BlockId> renum(nb, kNoBlock);
    std::vector<Block> kept;
    for (size_t b = 0; b < nb; ++b)
        if (reach[b])
        {
            renum[b] = static_cast<BlockId>(kept.size());
            kept.push_back(std::move(f.blocks[b]));
        }
    for (auto& b : kept)
        for (auto& t : b.terminator().targets)
            t = renum[t];
    f.blocks = std::move(kept);
    return true;
}

/// Removes pure instructions whose result is never read, and self-copies.
bool remove_dead_code(Function& f)
{
    bool changed = false;
    bool again = true;
    while (again)
    {
        again = false;
        std::vector<uint32_t> uses(f.num_regs(), 0);
        for (const auto& b : f.blocks)
            for (const auto& in : b.instrs)
                for (auto a : in.args)
                    ++uses[a];
        for (auto& b : f.blocks)
        {
            const auto before = b.instrs.size();
            std::erase_if(b.instrs, [&](const Instr& in) {
                if (in.op == Op::Copy && in.args[0] == in.dst)
                    return true;
                return in.has_dst() && is_pure(in.op) && uses[in.dst] == 0;
            });
            again |= b.instrs.size() != before;
        }
        changed |= again;
    }
    return changed;
}

/// Redirects edges around blocks that only branch elsewhere.
bool thread_jumps(Function& f)
{
    const auto nb = f.blocks.size();
    auto forward = [&](BlockId b) -> BlockId {
        const auto& blk = f.blocks[b];
        if (b == 0 || blk.instrs.size() != 1 || blk.terminator().op != Op::Br)
            return kNoBlock;
        return blk.terminator().targets[0];
    };
    bool changed = false;
    for (auto& b : f.blocks)
        for (auto& t : b.terminator().targets)
        {
            auto dest = t;
            for (size_t hops = 0; hops < nb; ++hops)
            {
                const auto next = forward(dest);
                if (next == kNoBlock || next == dest)
                    break;
                if (f.blocks[dest].loop_header)
                    f.blocks[next].loop_header = true;
                dest = next;
            }
            if (dest != t)
            {
                t = dest;
                changed = true;
            }
        }
    return changed;
}

/// Appends a block to its unique predecessor when that predecessor branches
/// to it unconditionally.
bool merge_blocks(Function& f)
{
    bool changed = false;
    auto preds = pred_counts(f);
    for (size_t a = 0; a < f.blocks.size(); ++a)
    {
        while (true)
        {
            auto& blk = f.blocks[a];
            const auto& term = blk.terminator();
            if (term.op != Op::Br)
                break;
            const auto b = term.targets[0];
            if (b == a || b == 0 || preds[b] != 1)
                break;
            auto moved = std::move(f.blocks[b].instrs);
            blk.instrs.pop_back();
            blk.instrs.insert(blk.instrs.end(), std::make_move_iterator(moved.begin()),
                std::make_move_iterator(moved.end()));
            // Leave an orphan self-loop; remove_unreachable drops it.
            auto& orphan = f.blocks[b];
            orphan.loop_header = false;
            orphan.instrs.clear();
            make_br(orphan.instrs.emplace_back(), b);
            preds[b] = 0;
            changed = true;
        }
    }
    return changed;
}

/// Folds a gas charge into the preceding charge of the same block when only
/// non-trapping, effect-free instructions lie between them.
bool coalesce_gas(Function& f)
{
    bool changed = false;
    for (auto& b : f.blocks)
    {
        size_t open = SIZE_MAX;
        for (size_t i = 0; i < b.instrs.size(); ++i)
        {
            auto& in = b.instrs[i];
            if (in.op == Op::GasCharge)
            {
                if (open != SIZE_MAX)
                {
                    b.instrs[open].imm += in.imm;
                    in.imm = 0;
                    changed = true;
                }
                else
                    open = i;
            }
            else if (!is_pure(in.op) || in.op == Op::MemorySize)
                open = SIZE_MAX;
        }
        std::erase_if(b.instrs, [](const Instr& in) { return in.op == Op::GasCharge && in.imm == 0; });
    }
    return changed;
}
}  // namespace

void run_passes(Function& f, const PassConfig& config)
{
    for (unsigned round = 0; round < 64; ++round)
    {
        bool changed = false;
        if (config.constant_folding)
            changed |= fold_constants(f);
        if (config.dead_code_elimination)
        {
            changed |= remove_unreachable(f);
            changed |= remove_dead_code(f);
        }
        if (config.block_merging)
        {
            changed |= thread_jumps(f);
            changed |= merge_blocks(f);
            changed |= remove_unreachable(f);
        }
        if (config.gas_coalescing)
            changed |= coalesce_gas(f);
        if (!changed)
            return;
    }
}

}  // namespace detwasm::dmir
