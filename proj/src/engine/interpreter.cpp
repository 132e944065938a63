// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/engine/interpreter.hpp"
#include "detwasm/dmir/semantics.hpp"

#include <cstring>
#include <vector>

namespace detwasm
{
namespace
{
using dmir::Op;

struct Frame
{
    const dmir::Function* fn = nullptr;
    uint32_t block = 0;
    uint32_t ip = 0;
    size_t base = 0;
    dmir::Reg ret_dst = dmir::kNoReg;  ///< Caller register receiving the result.
};

struct TrapSignal
{
    TrapCode code;
    std::optional<uint64_t> detail;
};

class Interpreter
{
public:
    Interpreter(Instance& inst, std::span<const dmir::Function> functions, InterpObserver* observer)
      : m_inst{inst}, m_ctx{inst.context()}, m_functions{functions}, m_observer{observer},
        m_imports{inst.module().num_imported_functions()}
    {}

    InterpResult run(uint32_t func_index, std::span<const uint64_t> args)
    {
        const auto depth = m_ctx.depth;
        const auto weight = m_ctx.weight_used;
        InterpResult result;
        try
        {
            if (func_index < m_imports)
                result.value = call_host(func_index, args);
            else
            {
                enter(func_index, args, dmir::kNoReg);
                result.value = loop();
            }
        }
        catch (const TrapSignal& t)
        {
            if (t.code == TrapCode::GasExhausted)
                m_ctx.gas_remaining = 0;
            result.trap = m_inst.make_trap(t.code, trap_has_detail(t.code) ? t.detail : std::nullopt);
            m_ctx.depth = depth;
            m_ctx.weight_used = weight;
        }
        return result;
    }

private:
    [[noreturn]] static void trap(TrapCode code, std::optional<uint64_t> detail = std::nullopt)
    {
        throw TrapSignal{code, detail};
    }

    uint64_t call_host(uint32_t func_index, std::span<const uint64_t> args)
    {
        const auto before = m_ctx.gas_remaining;
        const auto out = call_import(m_inst, func_index, args);
        if (m_observer != nullptr)
            m_observer->on_host_gas(before - m_ctx.gas_remaining);
        if (out.trap)
            trap(*out.trap);
        return out.result;
    }

    void enter(uint32_t func_index, std::span<const uint64_t> args, dmir::Reg ret_dst)
    {
        const auto& fn = m_functions[func_index - m_imports];
        if (m_ctx.depth >= m_ctx.max_depth ||
            m_ctx.weight_used + fn.frame_weight > m_ctx.weight_budget)
            trap(TrapCode::WasmCallStackExceed, m_ctx.depth);
        ++m_ctx.depth;
        m_ctx.weight_used += fn.frame_weight;

        const auto base = m_regs.size();
        m_regs.resize(base + fn.num_regs(), 0);
        std::copy(args.begin(), args.end(), m_regs.begin() + static_cast<ptrdiff_t>(base));
        m_frames.push_back({&fn, 0, 0, base, ret_dst});
        if (m_observer != nullptr)
            m_observer->on_block(fn.func_index, 0);
    }

    /// Pops the current frame; returns true when it was the outermost.
    bool leave(uint64_t value)
    {
        const auto frame = m_frames.back();
        m_frames.pop_back();
        m_regs.resize(frame.base);
        --m_ctx.depth;
        m_ctx.weight_used -= frame.fn->frame_weight;
        if (m_frames.empty())
            return true;
        if (frame.ret_dst != dmir::kNoReg)
            m_regs[m_frames.back().base + frame.ret_dst] = value;
        return false;
    }

    uint64_t effective_address(uint64_t base, uint64_t offset, unsigned width)
    {
        const auto ea = static_cast<uint32_t>(base) + offset;
        if (ea + width > m_ctx.memory_size)
            trap(TrapCode::MemoryAccessOutOfBounds, ea);
        return ea;
    }

    void jump(Frame& f, dmir::BlockId target)
    {
        f.block = target;
        f.ip = 0;
        if (m_observer != nullptr)
            m_observer->on_block(f.fn->func_index, target);
    }

    void call(Frame& f, uint32_t callee, const std::vector<dmir::Reg>& arg_regs, size_t n,
        dmir::Reg dst)
    {
        m_args.resize(n);
        for (size_t i = 0; i < n; ++i)
            m_args[i] = m_regs[f.base + arg_regs[i]];
        if (callee < m_imports)
        {
            const auto v = call_host(callee, m_args);
            if (dst != dmir::kNoReg)
                m_regs[f.base + dst] = v;
            return;
        }
        const std::vector<uint64_t> args = m_args;
        enter(callee, args, dst);
    }

    uint64_t loop()
    {
        while (true)
        {
            auto& f = m_frames.back();
            const auto& in = f.fn->blocks[f.block].instrs[f.ip++];
            auto* r = m_regs.data() + f.base;
            auto arg = [&](size_t i) { return r[in.args[i]]; };

            switch (in.op)
            {
            case Op::Const:
                r[in.dst] = in.imm;
                break;
            case Op::Copy:
                r[in.dst] = arg(0);
                break;
            case Op::Select:
                r[in.dst] = static_cast<uint32_t>(arg(2)) != 0 ? arg(0) : arg(1);
                break;
            case Op::DivS:
            case Op::DivU:
            case Op::RemS:
            case Op::RemU:
            {
                uint64_t out = 0;
                if (const auto t = dmir::eval_divrem(in.op, in.type, arg(0), arg(1), out))
                    trap(*t);
                r[in.dst] = out;
                break;
            }
            case Op::TruncS:
            case Op::TruncU:
            {
                uint64_t out = 0;
                if (const auto t = dmir::eval_trunc(in.op, in.type, in.src_type, arg(0), out))
                    trap(*t);
                r[in.dst] = out;
                break;
            }
            case Op::Load:
            {
                const auto ea = effective_address(arg(0), in.imm, in.width);
                uint64_t raw = 0;
                std::memcpy(&raw, m_ctx.memory_base + ea, in.width);
                if (in.sign_extend)
                {
                    const unsigned shift = 64 - 8 * in.width;
                    raw = static_cast<uint64_t>(static_cast<int64_t>(raw << shift) >> shift);
                }
                r[in.dst] = normalize_bits(in.type, raw);
                break;
            }
            case Op::Store:
            {
                const auto ea = effective_address(arg(0), in.imm, in.width);
                const auto v = arg(1);
                std::memcpy(m_ctx.memory_base + ea, &v, in.width);
                break;
            }
            case Op::MemorySize:
                r[in.dst] = m_ctx.memory_size / kPageSize;
                break;
            case Op::MemoryGrow:
                r[in.dst] = m_inst.memory_grow(static_cast<uint32_t>(arg(0)));
                break;
            case Op::GlobalGet:
                r[in.dst] = m_ctx.globals[in.imm];
                break;
            case Op::GlobalSet:
                m_ctx.globals[in.imm] = arg(0);
                break;
            case Op::Call:
                call(f, static_cast<uint32_t>(in.imm), in.args, in.args.size(), in.dst);
                break;
            case Op::CallIndirect:
            {
                const auto n = in.args.size() - 1;
                const auto idx = static_cast<uint32_t>(arg(n));
                if (idx >= m_ctx.table_size)
                    trap(TrapCode::UndefinedTableElement, idx);
                const auto& e = m_ctx.table[idx];
                if (e.sig_id == kNullSig)
                    trap(TrapCode::UndefinedTableElement, idx);
                if (e.sig_id != in.imm)
                    trap(TrapCode::IndirectCallTypeMismatch, idx);
                call(f, e.func_index, in.args, n, in.dst);
                break;
            }
            case Op::CheckedArith:
            {
                const auto res = evaluate_checked(in.hook, arg(0), arg(1));
                if (res.overflow)
                    trap(TrapCode::CheckedArithmeticOverflow);
                r[in.dst] = res.value;
                break;
            }
            case Op::GasCharge:
                if (m_ctx.gas_remaining < in.imm)
                    trap(TrapCode::GasExhausted);
                m_ctx.gas_remaining -= in.imm;
                break;
            case Op::Br:
                jump(f, in.targets[0]);
                break;
            case Op::CondBr:
                jump(f, static_cast<uint32_t>(arg(0)) != 0 ? in.targets[0] : in.targets[1]);
                break;
            case Op::Switch:
            {
                const auto i = static_cast<uint32_t>(arg(0));
                const auto n = in.targets.size() - 1;
                jump(f, i < n ? in.targets[i] : in.targets[n]);
                break;
            }
            case Op::Return:
            {
                const auto v = in.args.empty() ? 0 : arg(0);
                if (leave(v))
                    return v;
                break;
            }
            case Op::Trap:
                trap(static_cast<TrapCode>(in.imm));
            default:
            {
                r[in.dst] = in.args.size() == 2 ?
                                dmir::eval_binary(in.op, in.src_type, arg(0), arg(1)) :
                                     dmir::eval_unary(in.op, in.type, in.src_type, arg(0));
                break;
            }
            }
        }
    }

    Instance& m_inst;
    VMContext& m_ctx;
    std::span<const dmir::Function> m_functions;
    InterpObserver* m_observer;
    uint32_t m_imports;
    std::vector<uint64_t> m_regs;
    std::vector<Frame> m_frames;
    std::vector<uint64_t> m_args;
};
}  // namespace

InterpResult interpret(Instance& inst, std::span<const dmir::Function> functions,
    uint32_t func_index, std::span<const uint64_t> args, InterpObserver* observer)
{
    Interpreter interp{inst, functions, observer};
    return interp.run(func_index, args);
}

}  // namespace detwasm
