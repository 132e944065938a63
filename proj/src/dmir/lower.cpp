// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/dmir/lower.hpp"
#include "detwasm/frontend/instr.hpp"
#include "detwasm/frontend/opcodes.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace detwasm::dmir
{
namespace
{
constexpr std::array<Op, 10> kIntCompare{
    Op::Eq, Op::Ne, Op::LtS, Op::LtU, Op::GtS, Op::GtU, Op::LeS, Op::LeU, Op::GeS, Op::GeU};
constexpr std::array<Op, 6> kFloatCompare{Op::FEq, Op::FNe, Op::FLt, Op::FGt, Op::FLe, Op::FGe};
constexpr std::array<Op, 18> kIntArith{Op::Clz, Op::Ctz, Op::Popcnt, Op::Add, Op::Sub, Op::Mul,
    Op::DivS, Op::DivU, Op::RemS, Op::RemU, Op::And, Op::Or, Op::Xor, Op::Shl, Op::ShrS, Op::ShrU,
    Op::Rotl, Op::Rotr};
constexpr std::array<Op, 14> kFloatArith{Op::FAbs, Op::FNeg, Op::FCeil, Op::FFloor, Op::FTrunc,
    Op::FNearest, Op::FSqrt, Op::FAdd, Op::FSub, Op::FMul, Op::FDiv, Op::FMin, Op::FMax,
    Op::FCopysign};
constexpr std::array<Op, 25> kConversions{Op::Wrap, Op::TruncS, Op::TruncU, Op::TruncS, Op::TruncU,
    Op::ExtendS, Op::ExtendU, Op::TruncS, Op::TruncU, Op::TruncS, Op::TruncU, Op::ConvertS,
    Op::ConvertU, Op::ConvertS, Op::ConvertU, Op::Demote, Op::ConvertS, Op::ConvertU, Op::ConvertS,
    Op::ConvertU, Op::Promote, Op::Reinterpret, Op::Reinterpret, Op::Reinterpret,
    Op::Reinterpret};

Op numeric_op(uint8_t op)
{
    if (op == opcode::i32_eqz || op == opcode::i64_eqz)
        return Op::Eqz;
    if (op >= 0x46 && op <= 0x4f)
        return kIntCompare[op - 0x46];
    if (op >= 0x51 && op <= 0x5a)
        return kIntCompare[op - 0x51];
    if (op >= 0x5b && op <= 0x60)
        return kFloatCompare[op - 0x5b];
    if (op >= 0x61 && op <= 0x66)
        return kFloatCompare[op - 0x61];
    if (op >= 0x67 && op <= 0x78)
        return kIntArith[op - 0x67];
    if (op >= 0x79 && op <= 0x8a)
        return kIntArith[op - 0x79];
    if (op >= 0x8b && op <= 0x98)
        return kFloatArith[op - 0x8b];
    if (op >= 0x99 && op <= 0xa6)
        return kFloatArith[op - 0x99];
    return kConversions[op - 0xa7];
}

class Lowerer
{
public:
    Lowerer(const ValidatedModule& m, uint32_t func_index) : m_mod{m}
    {
        if (func_index >= m.num_functions() || m.is_imported_function(func_index))
            throw std::out_of_range{"lower_to_dmir: not a defined function"};
        const auto defined = func_index - m.num_imported_functions();
        m_code = &m.ast.codes[defined];

        m_fn.func_index = func_index;
        m_fn.signature = m.func_type(func_index);
        m_fn.num_params = static_cast<uint32_t>(m_fn.signature.params.size());
        m_fn.num_locals = static_cast<uint32_t>(m_code->local_count);
        m_fn.frame_weight = m.frame_weights[defined];
        m_fn.reg_types = m_fn.signature.params;
        for (const auto& d : m_code->locals)
            m_fn.reg_types.insert(m_fn.reg_types.end(), d.count, d.type);
    }

    Function run()
    {
        m_cur = new_block();
        Frame fn;
        fn.kind = opcode::block;
        fn.result = m_fn.signature.results.empty() ?
                        std::nullopt :
                        std::optional{m_fn.signature.results.front()};
        fn.merge = fn.result ? m_fn.new_reg(*fn.result) : kNoReg;
        fn.height = 0;
        m_ctrl.push_back(fn);

        ByteReader r{std::span{m_mod.ast.bytes}, m_code->body_offset, m_code->body_end};
        detwasm::Instr in;
        while (!m_ctrl.empty())
        {
            decode_instr(r, in);
            lower(in);
        }
        return std::move(m_fn);
    }

private:
    struct Frame
    {
        uint8_t kind = opcode::block;
        std::optional<ValType> result;
        Reg merge = kNoReg;
        size_t height = 0;
        BlockId label = kNoBlock;  ///< Loop header, or lazily created continuation.
        BlockId else_block = kNoBlock;
    };

    bool live() const noexcept { return m_cur != kNoBlock; }

    BlockId new_block()
    {
        m_fn.blocks.emplace_back();
        return static_cast<BlockId>(m_fn.blocks.size() - 1);
    }

    dmir::Instr& emit(Op op, ValType type = ValType::i32)
    {
        auto& ins = m_fn.blocks[m_cur].instrs.emplace_back();
        ins.op = op;
        ins.type = type;
        return ins;
    }

    void terminate_br(BlockId target)
    {
        emit(Op::Br).targets = {target};
        m_cur = kNoBlock;
    }

    Reg pop()
    {
        if (m_stack.size() == m_ctrl.back().height)
            return kNoReg;  // polymorphic stack in unreachable code
        const auto r = m_stack.back();
        m_stack.pop_back();
        return r;
    }

    void push(Reg r) { m_stack.push_back(r); }

    bool is_local(Reg r) const noexcept { return r != kNoReg && r < m_fn.num_entry_regs(); }

    void copy(Reg dst, Reg src)
    {
        auto& ins = emit(Op::Copy, m_fn.reg_types[dst]);
        ins.dst = dst;
        ins.args = {src};
    }

    /// Replace stack entries that alias local `which` (or any local when
    /// `which` is kNoReg) with fresh copies.
    void materialize(Reg which)
    {
        if (!live())
            return;
        for (size_t i = 0; i < m_stack.size(); ++i)
        {
            const auto r = m_stack[i];
            if (!is_local(r) || (which != kNoReg && r != which))
                continue;
            const auto t = m_fn.new_reg(m_fn.reg_types[r]);
            copy(t, r);
            for (size_t j = i; j < m_stack.size(); ++j)
                if (m_stack[j] == r)
                    m_stack[j] = t;
        }
    }

    BlockId label_of(Frame& f)
    {
        if (f.label == kNoBlock)
            f.label = new_block();
        return f.label;
    }

    /// Moves the branch value into the target's merge register.
    void pass_value(const Frame& f)
    {
        if (f.kind != opcode::loop && f.result)
            copy(f.merge, m_stack.back());
    }

    Frame& frame_at(uint32_t depth) { return m_ctrl[m_ctrl.size() - 1 - depth]; }

    void enter(uint8_t kind, std::optional<ValType> result)
    {
        materialize(kNoReg);
        Frame f;
        f.kind = kind;
        f.result = result;
        f.merge = (result && kind != opcode::loop) ? m_fn.new_reg(*result) : kNoReg;
        f.height = m_stack.size();
        m_ctrl.push_back(f);
    }

    void do_else()
    {
        auto& f = m_ctrl.back();
        if (live())
        {
            if (f.result)
                copy(f.merge, pop());
            terminate_br(label_of(f));
        }
        m_stack.resize(f.height);
        m_cur = f.else_block;
        f.kind = opcode::else_;
    }

    void do_end()
    {
        if (m_ctrl.back().kind == opcode::if_)
            do_else();
        auto f = m_ctrl.back();
        const bool is_function = m_ctrl.size() == 1;

        if (f.kind == opcode::loop)
        {
            if (!live())
            {
                m_stack.resize(f.height);
                if (f.result)
                    push(kNoReg);
            }
            m_ctrl.pop_back();
            return;
        }

        if (f.label == kNoBlock)
        {
            if (is_function)
            {
                if (live())
                {
                    auto& ret = emit(Op::Return);
                    if (f.result)
                        ret.args = {pop()};
                    m_cur = kNoBlock;
                }
                m_ctrl.pop_back();
                return;
            }
            if (!live())
            {
                m_stack.resize(f.height);
                if (f.result)
                    push(kNoReg);
            }
            m_ctrl.pop_back();
            return;
        }

        if (live())
        {
            if (f.result)
                copy(f.merge, pop());
            terminate_br(f.label);
        }
        m_cur = f.label;
        m_stack.resize(f.height);
        m_ctrl.pop_back();
        if (is_function)
        {
            auto& ret = emit(Op::Return);
            if (f.result)
                ret.args = {f.merge};
            m_cur = kNoBlock;
            return;
        }
        if (f.result)
            push(f.merge);
    }

    void lower(const detwasm::Instr& in)
    {
        const auto op = in.op;
        switch (op)
        {
        case opcode::unreachable:
            if (live())
            {
                emit(Op::Trap).imm = static_cast<uint64_t>(TrapCode::Unreachable);
                m_cur = kNoBlock;
            }
            m_stack.resize(m_ctrl.back().height);
            return;
        case opcode::nop:
            return;
        case opcode::block:
            enter(op, in.block_type);
            return;
        case opcode::loop:
        {
            enter(op, in.block_type);
            if (live())
            {
                const auto header = new_block();
                m_fn.blocks[header].loop_header = true;
                m_ctrl.back().label = header;
                terminate_br(header);
                m_cur = header;
            }
            return;
        }
        case opcode::if_:
        {
            const auto cond = pop();
            enter(op, in.block_type);
            if (live())
            {
                const auto then_block = new_block();
                const auto else_block = new_block();
                auto& br = emit(Op::CondBr);
                br.args = {cond};
                br.targets = {then_block, else_block};
                m_ctrl.back().else_block = else_block;
                m_cur = then_block;
            }
            return;
        }
        case opcode::else_:
            do_else();
            return;
        case opcode::end:
            do_end();
            return;
        case opcode::br:
        {
            if (live())
            {
                auto& f = frame_at(in.index);
                pass_value(f);
                terminate_br(label_of(f));
            }
            m_stack.resize(m_ctrl.back().height);
            return;
        }
        case opcode::br_if:
        {
            const auto cond = pop();
            if (live())
            {
                auto& f = frame_at(in.index);
                pass_value(f);
                const auto target = label_of(f);
                const auto next = new_block();
                auto& br = emit(Op::CondBr);
                br.args = {cond};
                br.targets = {target, next};
                m_cur = next;
            }
            return;
        }
        case opcode::br_table:
        {
            const auto index = pop();
            if (live())
            {
                std::vector<BlockId> targets;
                targets.reserve(in.targets.size() + 1);
                std::vector<Reg> copied;
                auto add = [&](uint32_t depth) {
                    auto& f = frame_at(depth);
                    if (f.kind != opcode::loop && f.result &&
                        std::find(copied.begin(), copied.end(), f.merge) == copied.end())
                    {
                        pass_value(f);
                        copied.push_back(f.merge);
                    }
                    targets.push_back(label_of(f));
                };
                for (auto t : in.targets)
                    add(t);
                add(in.index);
                auto& sw = emit(Op::Switch);
                sw.args = {index};
                sw.targets = std::move(targets);
                m_cur = kNoBlock;
            }
            m_stack.resize(m_ctrl.back().height);
            return;
        }
        case opcode::return_:
        {
            if (live())
            {
                auto& ret = emit(Op::Return);
                if (!m_fn.signature.results.empty())
                    ret.args = {m_stack.back()};
                m_cur = kNoBlock;
            }
            m_stack.resize(m_ctrl.back().height);
            return;
        }
        case opcode::call:
        {
            const auto& type = m_mod.func_type(in.index);
            std::vector<Reg> args(type.params.size());
            for (size_t i = args.size(); i-- > 0;)
                args[i] = pop();
            Reg dst = kNoReg;
            if (live())
            {
                if (!type.results.empty())
                    dst = m_fn.new_reg(type.results.front());
                const auto hook = m_mod.hook_for(in.index);
                auto& ins = emit(hook ? Op::CheckedArith : Op::Call,
                    type.results.empty() ? ValType::i32 : type.results.front());
                ins.dst = dst;
                ins.args = std::move(args);
                ins.imm = in.index;
                if (hook)
                    ins.hook = *hook;
            }
            if (!type.results.empty())
                push(dst);
            return;
        }
        case opcode::call_indirect:
        {
            const auto& type = m_mod.ast.types[in.index].type;
            const auto index = pop();
            std::vector<Reg> args(type.params.size() + 1);
            for (size_t i = type.params.size(); i-- > 0;)
                args[i] = pop();
            args.back() = index;
            Reg dst = kNoReg;
            if (live())
            {
                if (!type.results.empty())
                    dst = m_fn.new_reg(type.results.front());
                auto& ins = emit(Op::CallIndirect,
                    type.results.empty() ? ValType::i32 : type.results.front());
                ins.dst = dst;
                ins.args = std::move(args);
                ins.imm = m_mod.canonical_type_ids[in.index];
            }
            if (!type.results.empty())
                push(dst);
            return;
        }
        case opcode::drop:
            pop();
            return;
        case opcode::select:
        {
            const auto c = pop();
            const auto b = pop();
            const auto a = pop();
            Reg dst = kNoReg;
            if (live())
            {
                const auto t = m_fn.reg_types[a];
                dst = m_fn.new_reg(t);
                auto& ins = emit(Op::Select, t);
                ins.dst = dst;
                ins.args = {a, b, c};
            }
            push(dst);
            return;
        }
        case opcode::local_get:
            push(live() ? in.index : kNoReg);
            return;
        case opcode::local_set:
        case opcode::local_tee:
        {
            const auto v = pop();
            if (live())
            {
                materialize(in.index);
                if (v != in.index)
                    copy(in.index, v);
            }
            if (op == opcode::local_tee)
                push(live() ? in.index : kNoReg);
            return;
        }
        case opcode::global_get:
        {
            Reg dst = kNoReg;
            if (live())
            {
                const auto t = m_mod.global_type(in.index);
                dst = m_fn.new_reg(t);
                auto& ins = emit(Op::GlobalGet, t);
                ins.dst = dst;
                ins.imm = in.index;
            }
            push(dst);
            return;
        }
        case opcode::global_set:
        {
            const auto v = pop();
            if (live())
            {
                auto& ins = emit(Op::GlobalSet, m_mod.global_type(in.index));
                ins.args = {v};
                ins.imm = in.index;
            }
            return;
        }
        case opcode::memory_size:
            unary_result(Op::MemorySize, ValType::i32, {});
            return;
        case opcode::memory_grow:
        {
            const auto delta = pop();
            unary_result(Op::MemoryGrow, ValType::i32, {delta});
            return;
        }
        case opcode::i32_const:
        case opcode::i64_const:
        case opcode::f32_const:
        case opcode::f64_const:
        {
            Reg dst = kNoReg;
            if (live())
            {
                const auto t = op == opcode::i32_const ? ValType::i32 :
                               op == opcode::i64_const ? ValType::i64 :
                               op == opcode::f32_const ? ValType::f32 :
                                                         ValType::f64;
                dst = m_fn.new_reg(t);
                auto& ins = emit(Op::Const, t);
                ins.dst = dst;
                ins.imm = in.imm;
            }
            push(dst);
            return;
        }
        default:
            break;
        }

        if (const auto acc = opcode::memory_access(op))
        {
            if (opcode::is_load(op))
            {
                const auto base = pop();
                Reg dst = kNoReg;
                if (live())
                {
                    dst = m_fn.new_reg(acc->type);
                    auto& ins = emit(Op::Load, acc->type);
                    ins.dst = dst;
                    ins.args = {base};
                    ins.imm = in.mem_offset;
                    ins.width = acc->width;
                    ins.sign_extend = acc->sign_extend;
                }
                push(dst);
            }
            else
            {
                const auto value = pop();
                const auto base = pop();
                if (live())
                {
                    auto& ins = emit(Op::Store, acc->type);
                    ins.args = {base, value};
                    ins.imm = in.mem_offset;
                    ins.width = acc->width;
                }
            }
            return;
        }

        const auto sig = *opcode::numeric_sig(op);
        Reg b = kNoReg;
        if (sig.arity == 2)
            b = pop();
        const auto a = pop();
        Reg dst = kNoReg;
        if (live())
        {
            dst = m_fn.new_reg(sig.out);
            auto& ins = emit(numeric_op(op), sig.out);
            ins.src_type = sig.in;
            ins.dst = dst;
            ins.args = sig.arity == 2 ? std::vector<Reg>{a, b} : std::vector<Reg>{a};
        }
        push(dst);
    }

    void unary_result(Op op, ValType t, std::vector<Reg> args)
    {
        Reg dst = kNoReg;
        if (live())
        {
            dst = m_fn.new_reg(t);
            auto& ins = emit(op, t);
            ins.dst = dst;
            ins.args = std::move(args);
        }
        push(dst);
    }

    const ValidatedModule& m_mod;
    const CodeEntry* m_code = nullptr;
    Function m_fn;
    BlockId m_cur = kNoBlock;
    std::vector<Reg> m_stack;
    std::vector<Frame> m_ctrl;
};
}  // namespace

Function lower_to_dmir(const ValidatedModule& module, uint32_t func_index)
{
    return Lowerer{module, func_index}.run();
}

}  // namespace detwasm::dmir
