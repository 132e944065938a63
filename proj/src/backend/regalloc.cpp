// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/backend/regalloc.hpp"
#include "detwasm/dmir/bitset.hpp"

#include <algorithm>
#include <cpuid.h>

namespace detwasm
{
using namespace dmir;

const CpuFeatures& CpuFeatures::host() noexcept
{
    static const CpuFeatures f = [] {
        CpuFeatures c;
        unsigned a, b, cx, d;
        if (__get_cpuid(1, &a, &b, &cx, &d))
        {
            c.popcnt = (cx >> 23) & 1;
            c.sse41 = (cx >> 19) & 1;
        }
        if (__get_cpuid_count(7, 0, &a, &b, &cx, &d))
            c.tzcnt = (b >> 3) & 1;
        if (__get_cpuid(0x8000'0001u, &a, &b, &cx, &d))
            c.lzcnt = (cx >> 5) & 1;
        return c;
    }();
    return f;
}

bool needs_helper(const Instr& in) noexcept
{
    const auto& cpu = CpuFeatures::host();
    switch (in.op)
    {
    case Op::FMin:
    case Op::FMax:
    case Op::TruncS:
    case Op::TruncU:
        return true;
    case Op::ConvertU:
        return in.src_type == ValType::i64;
    case Op::Clz:
        return !cpu.lzcnt;
    case Op::Ctz:
        return !cpu.tzcnt;
    case Op::Popcnt:
        return !cpu.popcnt;
    case Op::FCeil:
    case Op::FFloor:
    case Op::FTrunc:
    case Op::FNearest:
        return !cpu.sse41;
    default:
        return false;
    }
}

bool clobbers_registers(const Instr& in) noexcept
{
    return in.op == Op::Call || in.op == Op::CallIndirect || in.op == Op::MemoryGrow ||
           needs_helper(in);
}

Allocation allocate_stack_only(const Function& f)
{
    Allocation a;
    const auto nr = f.num_regs();
    a.locations.resize(nr);
    a.live_at_entry.assign(f.num_entry_regs(), true);
    for (uint32_t r = 0; r < nr; ++r)
    {
        auto& loc = a.locations[r];
        loc.kind = Location::Slot;
        loc.disp = r < f.num_params ? param_disp(r) : slot_disp(r - f.num_params);
    }
    a.num_slots = nr - f.num_params;
    return a;
}

namespace
{
struct Interval
{
    uint32_t reg;
    int64_t start;
    int64_t end;
    bool crosses_call;
};

constexpr x64::Gp kCallerSaved[] = {x64::rsi, x64::rdi, x64::r8, x64::r9, x64::r10, x64::r11};
constexpr x64::Gp kCalleeSaved[] = {x64::r12, x64::r13};
}  // namespace

Allocation allocate_linear_scan(const Function& f)
{
    const auto nr = f.num_regs();
    const auto nb = f.blocks.size();
    Allocation a;
    a.locations.resize(nr);
    a.live_at_entry.assign(f.num_entry_regs(), false);

    // Definition counts find rematerializable constants.
    std::vector<uint32_t> defs(nr, 0);
    std::vector<const Instr*> def_instr(nr, nullptr);
    for (const auto& b : f.blocks)
        for (const auto& in : b.instrs)
            if (in.has_dst())
            {
                ++defs[in.dst];
                def_instr[in.dst] = &in;
            }
    std::vector<bool> remat(nr, false);
    for (uint32_t r = f.num_entry_regs(); r < nr; ++r)
        if (defs[r] == 1 && def_instr[r]->op == Op::Const)
        {
            remat[r] = true;
            a.locations[r] = {Location::Imm, x64::kNoGp, 0, def_instr[r]->imm};
        }

    // Block-level liveness.
    std::vector<BitSet> use(nb, BitSet{nr}), def(nb, BitSet{nr});
    for (size_t b = 0; b < nb; ++b)
        for (const auto& in : f.blocks[b].instrs)
        {
            for (auto r : in.args)
                if (!def[b].test(r))
                    use[b].set(r);
            if (in.has_dst())
                def[b].set(in.dst);
        }
    std::vector<BitSet> live_in(nb, BitSet{nr}), live_out(nb, BitSet{nr});
    for (bool changed = true; changed;)
    {
        changed = false;
        for (size_t i = nb; i-- > 0;)
        {
            BitSet out{nr};
            for (auto s : f.blocks[i].terminator().targets)
                out.unite(live_in[s]);
            BitSet in = out;
            in.subtract(def[i]);
            in.unite(use[i]);
            if (!(out == live_out[i]))
            {
                live_out[i] = std::move(out);
                changed = true;
            }
            if (!(in == live_in[i]))
            {
                live_in[i] = std::move(in);
                changed = true;
            }
        }
    }

    // Intervals over the linear order; uses at 2i, definitions at 2i+1.
    std::vector<int64_t> start(nr, INT64_MAX), end(nr, INT64_MIN);
    auto extend = [&](size_t r, int64_t p) {
        start[r] = std::min(start[r], p);
        end[r] = std::max(end[r], p);
    };
    std::vector<int64_t> call_points;
    int64_t index = 0;
    for (size_t b = 0; b < nb; ++b)
    {
        const auto first = 2 * index;
        const auto last = 2 * (index + static_cast<int64_t>(f.blocks[b].instrs.size()) - 1) + 1;
        live_in[b].for_each([&](size_t r) { extend(r, b == 0 ? -1 : first); });
        live_out[b].for_each([&](size_t r) { extend(r, last); });
        for (const auto& in : f.blocks[b].instrs)
        {
            for (auto r : in.args)
                extend(r, 2 * index);
            if (in.has_dst())
                extend(in.dst, 2 * index + 1);
            if (clobbers_registers(in))
                call_points.push_back(2 * index);
            ++index;
        }
    }
    live_in[0].for_each([&](size_t r) {
        if (r < f.num_entry_regs())
            a.live_at_entry[r] = true;
    });

    std::vector<Interval> intervals;
    for (uint32_t r = 0; r < nr; ++r)
    {
        if (remat[r] || start[r] == INT64_MAX)
            continue;
        const auto it = std::upper_bound(call_points.begin(), call_points.end(), start[r]);
        const bool crosses = it != call_points.end() && *it < end[r];
        intervals.push_back({r, start[r], end[r], crosses});
    }
    std::sort(intervals.begin(), intervals.end(), [](const Interval& x, const Interval& y) {
        return x.start != y.start ? x.start < y.start : x.reg < y.reg;
    });

    auto spill = [&](uint32_t r) {
        auto& loc = a.locations[r];
        loc.kind = Location::Slot;
        loc.reg = x64::kNoGp;
        loc.disp = r < f.num_params ? param_disp(r) : slot_disp(a.num_slots++);
    };

    std::vector<const Interval*> active;
    std::vector<x64::Gp> free_regs(std::begin(kCallerSaved), std::end(kCallerSaved));
    free_regs.insert(free_regs.end(), std::begin(kCalleeSaved), std::end(kCalleeSaved));
    auto is_callee_saved = [](x64::Gp g) { return g == x64::r12 || g == x64::r13; };

    for (const auto& cur : intervals)
    {
        // Expire intervals that ended before this one starts.
        std::erase_if(active, [&](const Interval* iv) {
            if (iv->end < cur.start)
            {
                free_regs.push_back(a.locations[iv->reg].reg);
                return true;
            }
            return false;
        });

        auto allowed = [&](x64::Gp g) { return !cur.crosses_call || is_callee_saved(g); };
        // Prefer caller-saved registers for short intervals, keeping r12/r13 for call-crossers.
        auto pick = std::find_if(free_regs.begin(), free_regs.end(),
            [&](x64::Gp g) { return allowed(g) && (cur.crosses_call || !is_callee_saved(g)); });
        if (pick == free_regs.end())
            pick = std::find_if(free_regs.begin(), free_regs.end(), allowed);
        if (pick != free_regs.end())
        {
            a.locations[cur.reg] = {Location::Reg, *pick, 0, 0};
            free_regs.erase(pick);
            active.push_back(&cur);
            continue;
        }

        // Steal from the active interval that ends last, if it outlives this one.
        const Interval* victim = nullptr;
        for (const auto* iv : active)
            if (allowed(a.locations[iv->reg].reg) && (victim == nullptr || iv->end > victim->end))
                victim = iv;
        if (victim != nullptr && victim->end > cur.end)
        {
            a.locations[cur.reg] = {Location::Reg, a.locations[victim->reg].reg, 0, 0};
            spill(victim->reg);
            std::erase(active, victim);
            active.push_back(&cur);
        }
        else
            spill(cur.reg);
    }
    return a;
}

}  // namespace detwasm
