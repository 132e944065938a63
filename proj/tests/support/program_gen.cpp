// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "program_gen.hpp"
#include "module_builder.hpp"

#include "detwasm/runtime/mock_host.hpp"

#include <array>
#include <optional>
#include <random>

namespace detwasm::test
{
namespace
{
using enum ValType;
namespace op = opcode;

struct Callee
{
    uint32_t index;
    FuncType type;
};

struct Label
{
    bool is_loop;
};

class Generator
{
public:
    Generator(uint64_t seed, const GenOptions& options) : m_rng{seed}, m_opt{options} {}

    GeneratedProgram run(uint64_t seed)
    {
        plan_imports();
        const auto n_helpers = 1 + below(m_opt.max_helpers);
        const uint32_t first = m_mb.num_functions();
        m_main = first;
        m_callees.clear();
        std::vector<FuncType> helper_types;
        for (unsigned i = 0; i < n_helpers; ++i)
        {
            FuncType t;
            const auto np = below(4);
            for (unsigned p = 0; p < np; ++p)
                t.params.push_back(any_type());
            if (chance(0.8))
                t.results.push_back(any_type());
            helper_types.push_back(t);
            m_callees.push_back({first + 1 + i, t});
        }
        if (m_opt.recursion && m_opt.calls)
            m_rec = first + 1 + n_helpers;

        if (m_opt.memory)
        {
            m_mb.set_memory(1, 3);
            m_mb.export_memory("memory");
            std::vector<uint8_t> data(below(64) + 1);
            for (auto& b : data)
                b = static_cast<uint8_t>(m_rng());
            m_mb.add_data(below(1024), data);
        }
        const auto n_globals = 1 + below(4);
        for (unsigned i = 0; i < n_globals; ++i)
        {
            const auto t = any_type();
            m_globals.push_back({t, true});
            m_mb.add_global(t, true, constant_bits(t));
        }
        m_globals.push_back({i32, false});
        m_mb.add_global(i32, false, 7);

        if (m_opt.indirect_calls && m_opt.calls)
        {
            // Helpers first, then two empty entries.
            m_table_size = n_helpers + 2;
            m_mb.set_table(m_table_size);
            std::vector<uint32_t> funcs;
            for (const auto& c : m_callees)
                funcs.push_back(c.index);
            m_mb.add_element(0, funcs);
        }

        // main
        const FuncType main_type{{i32, i64}, {i64}};
        emit_function(m_main, main_type, 0);
        for (unsigned i = 0; i < n_helpers; ++i)
            emit_function(first + 1 + i, helper_types[i], i + 1);
        if (m_rec)
            emit_recursive();
        m_mb.export_function("main", m_main);

        GeneratedProgram p;
        p.seed = seed;
        p.wasm = m_mb.build();
        for (int i = 0; i < 3; ++i)
        {
            Invocation inv;
            inv.args = {Value{i32, constant_bits(i32)}, Value{i64, constant_bits(i64)}};
            inv.gas_limit = chance(0.3) ? 1 + below(4000) : 100'000'000;
            p.invocations.push_back(inv);
        }
        return p;
    }

private:
    bool chance(double p) { return std::uniform_real_distribution<double>{0, 1}(m_rng) < p; }
    uint32_t below(uint32_t n) { return n == 0 ? 0 : static_cast<uint32_t>(m_rng() % n); }

    ValType any_type()
    {
        if (!m_opt.floats)
            return chance(0.5) ? i32 : i64;
        static constexpr std::array<ValType, 4> kTypes{i32, i64, f32, f64};
        return kTypes[below(4)];
    }

    void plan_imports()
    {
        if (m_opt.hooks)
        {
            static constexpr std::array<const char*, 4> kInts{"i32", "u32", "i64", "u64"};
            static constexpr std::array<const char*, 3> kOps{"add", "sub", "mul"};
            const auto n = 1 + below(3);
            for (unsigned i = 0; i < n; ++i)
            {
                const auto it = below(4), o = below(3);
                const auto t = it < 2 ? i32 : i64;
                const auto name = std::string{"checked_"} + kInts[it] + "_" + kOps[o];
                bool seen = false;
                for (const auto& h : m_hooks)
                    seen |= h.name == name;
                if (seen)
                    continue;
                const FuncType ft{{t, t}, {t}};
                m_hooks.push_back({m_mb.import_function("env", name, ft), t, name});
            }
        }
        if (m_opt.host_calls)
        {
            m_mix = m_mb.import_function("env", "mix", FuncType{{i64, i64}, {i64}});
            m_burn = m_mb.import_function("env", "burn", FuncType{{i32}, {i32}});
        }
    }

    uint64_t constant_bits(ValType t)
    {
        switch (t)
        {
        case i32:
        {
            static constexpr std::array<uint32_t, 12> k{0, 1, 0xffffffff, 2, 0x80000000, 0x7fffffff,
                0x80, 0xff, 31, 32, 0xfffffffe, 16};
            if (chance(0.5))
                return k[below(k.size())];
            return chance(0.5) ? below(64) : static_cast<uint32_t>(m_rng());
        }
        case i64:
        {
            static constexpr std::array<uint64_t, 12> k{0, 1, ~0ull, 2, 0x8000000000000000ull,
                0x7fffffffffffffffull, 0xffffffffull, 0x100000000ull, 63, 64, 0x80000000ull, 7};
            if (chance(0.5))
                return k[below(k.size())];
            return chance(0.5) ? below(64) : m_rng();
        }
        case f32:
        {
            static constexpr std::array<uint32_t, 16> k{0, 0x80000000, 0x3f800000, 0xbfc00000,
                0x7f800000, 0xff800000, 0x7fc00000, 0x7fa00001, 1, 0x7f7fffff, 0x4f000000,
                0x3f000000, 0x40200000, 0xcf000000, 0x4f800000, 0x40400000};
            if (chance(0.6))
                return k[below(k.size())];
            return static_cast<uint32_t>(m_rng());
        }
        case f64:
        {
            static constexpr std::array<uint64_t, 16> k{0, 0x8000000000000000ull,
                0x3ff0000000000000ull, 0x7ff8000000000000ull, 0x7ff4000000000001ull,
                0x41e0000000000000ull, 0x43e0000000000000ull, 0x41f0000000000000ull,
                0x4004000000000000ull, 0xbfe0000000000000ull, 1, 0x7ff0000000000000ull,
                0xfff0000000000000ull, 0xc1e0000000000000ull, 0x3fe0000000000000ull,
                0x4012000000000000ull};
            if (chance(0.6))
                return k[below(k.size())];
            return m_rng();
        }
        }
        return 0;
    }

    void constant(Code& c, ValType t)
    {
        const auto b = constant_bits(t);
        switch (t)
        {
        case i32: c.i32_const(static_cast<int32_t>(b)); break;
        case i64: c.i64_const(static_cast<int64_t>(b)); break;
        case f32: c.f32_const(static_cast<uint32_t>(b)); break;
        case f64: c.f64_const(b); break;
        }
    }

    // ---- function bodies ----

    struct FnState
    {
        std::vector<ValType> locals;       ///< Params then declared locals.
        std::vector<bool> assignable;
        std::vector<Label> labels;
        std::optional<ValType> result;
        uint32_t index = 0;
        unsigned loops = 0;
        int budget = 0;
        unsigned num_params = 0;
    };

    uint32_t new_local(ValType t, bool assignable)
    {
        m_fn.locals.push_back(t);
        m_fn.assignable.push_back(assignable);
        return static_cast<uint32_t>(m_fn.locals.size() - 1);
    }

    std::optional<uint32_t> pick_local(ValType t, bool for_write)
    {
        std::vector<uint32_t> c;
        for (uint32_t i = 0; i < m_fn.locals.size(); ++i)
            if (m_fn.locals[i] == t && (!for_write || m_fn.assignable[i]))
                c.push_back(i);
        if (c.empty())
            return std::nullopt;
        return c[below(static_cast<uint32_t>(c.size()))];
    }

    std::optional<uint32_t> pick_global(ValType t, bool for_write)
    {
        std::vector<uint32_t> c;
        for (uint32_t i = 0; i < m_globals.size(); ++i)
            if (m_globals[i].first == t && (!for_write || m_globals[i].second))
                c.push_back(i);
        if (c.empty())
            return std::nullopt;
        return c[below(static_cast<uint32_t>(c.size()))];
    }

    void emit_function(uint32_t index, const FuncType& type, unsigned position)
    {
        m_fn = FnState{};
        m_fn.index = index;
        m_fn.num_params = static_cast<unsigned>(type.params.size());
        for (auto p : type.params)
        {
            m_fn.locals.push_back(p);
            m_fn.assignable.push_back(true);
        }
        const auto extra = below(5);
        for (unsigned i = 0; i < extra; ++i)
            new_local(any_type(), true);
        if (!type.results.empty())
            m_fn.result = type.results[0];
        m_fn.budget = static_cast<int>(m_opt.body_budget / (position == 0 ? 1 : 2));

        Code body;
        statements(body, 0);
        if (m_fn.result)
            expr(body, *m_fn.result, 0);
        std::vector<ValType> declared(m_fn.locals.begin() + m_fn.num_params, m_fn.locals.end());
        m_mb.add_function(type, declared, body);
    }

    void emit_recursive()
    {
        // rec(n) = n == 0 ? 1 : rec(n - 1) * 3 + n
        Code c;
        c.local_get(0).op(op::i32_eqz);
        c.begin(op::if_, i64);
        c.i64_const(1);
        c.op(op::else_);
        c.local_get(0).i32_const(1).op(op::i32_sub).call(*m_rec);
        c.i64_const(3).op(op::i64_mul).local_get(0).op(op::i64_extend_i32_u).op(op::i64_add);
        c.end();
        m_mb.add_function(FuncType{{i32}, {i64}}, {}, c);
    }

    void statements(Code& c, unsigned depth)
    {
        const auto n = 1 + below(depth == 0 ? 6 : 3);
        for (unsigned i = 0; i < n && m_fn.budget > 0; ++i)
            statement(c, depth);
    }

    std::optional<uint32_t> pick_block_label()
    {
        std::vector<uint32_t> c;
        const auto n = static_cast<uint32_t>(m_fn.labels.size());
        for (uint32_t d = 0; d < n; ++d)
            if (!m_fn.labels[n - 1 - d].is_loop)
                c.push_back(d);
        if (c.empty())
            return std::nullopt;
        return c[below(static_cast<uint32_t>(c.size()))];
    }

    void statement(Code& c, unsigned depth)
    {
        --m_fn.budget;
        const bool nest = depth < 4;
        switch (below(16))
        {
        case 0:
        case 1:
        case 2:
        {
            const auto t = any_type();
            if (const auto l = pick_local(t, true))
            {
                expr(c, t, 0);
                c.local_set(*l);
                return;
            }
            break;
        }
        case 3:
        {
            const auto t = any_type();
            if (const auto g = pick_global(t, true))
            {
                expr(c, t, 0);
                c.global_set(*g);
                return;
            }
            break;
        }
        case 4:
        case 5:
            if (m_opt.memory)
            {
                store(c);
                return;
            }
            break;
        case 6:
            if (nest)
            {
                condition(c, 1);
                c.begin(op::if_);
                m_fn.labels.push_back({false});
                statements(c, depth + 1);
                if (chance(0.5))
                {
                    c.op(op::else_);
                    statements(c, depth + 1);
                }
                m_fn.labels.pop_back();
                c.end();
                return;
            }
            break;
        case 7:
            if (nest)
            {
                c.begin(op::block);
                m_fn.labels.push_back({false});
                statements(c, depth + 1);
                condition(c, 1);
                c.br_if(*pick_block_label());
                statements(c, depth + 1);
                m_fn.labels.pop_back();
                c.end();
                return;
            }
            break;
        case 8:
            if (nest && m_fn.loops < 2)
            {
                loop(c, depth);
                return;
            }
            break;
        case 9:
            if (nest)
            {
                switch_table(c, depth);
                return;
            }
            break;
        case 10:
            if (m_opt.calls && !m_callees.empty())
            {
                call_any(c, std::nullopt);
                return;
            }
            break;
        case 11:
            if (m_opt.memory && chance(0.3))
            {
                expr(c, i32, 1);
                c.i32_const(1).op(op::i32_and).op(op::memory_grow).u32(0).op(op::drop);
                return;
            }
            break;
        case 12:
            if (chance(0.15))
            {
                // Rarely taken trap.
                expr(c, i32, 1);
                c.i32_const(0x3f).op(op::i32_and).i32_const(0x3f).op(op::i32_eq);
                c.begin(op::if_).op(op::unreachable).end();
                return;
            }
            break;
        case 13:
            if (chance(0.4))
            {
                condition(c, 1);
                c.begin(op::if_);
                if (m_fn.result)
                    expr(c, *m_fn.result, 1);
                c.op(op::return_).end();
                return;
            }
            break;
        case 14:
            if (const auto l = pick_block_label(); l && chance(0.5))
            {
                condition(c, 1);
                c.br_if(*l);
                return;
            }
            break;
        default:
            break;
        }
        // Fallback: evaluate and drop.
        expr(c, any_type(), 0);
        c.op(op::drop);
    }

    void loop(Code& c, unsigned depth)
    {
        const auto counter = new_local(i32, false);
        c.i32_const(static_cast<int32_t>(1 + below(6))).local_set(counter);
        c.begin(op::loop);
        m_fn.labels.push_back({true});
        ++m_fn.loops;
        statements(c, depth + 1);
        c.local_get(counter).i32_const(1).op(op::i32_sub).local_tee(counter);
        c.br_if(0);
        --m_fn.loops;
        m_fn.labels.pop_back();
        c.end();
    }

    void switch_table(Code& c, unsigned depth)
    {
        const auto cases = 1 + below(4);
        for (unsigned i = 0; i <= cases; ++i)
        {
            c.begin(op::block);
            m_fn.labels.push_back({false});
        }
        expr(c, i32, 1);
        if (chance(0.7))
            c.i32_const(7).op(op::i32_and);
        std::vector<uint32_t> targets;
        const auto n = 1 + below(6);
        for (unsigned i = 0; i < n; ++i)
            targets.push_back(below(cases + 1));
        c.br_table(targets, below(cases + 1));
        for (unsigned i = 0; i <= cases; ++i)
        {
            c.end();
            m_fn.labels.pop_back();
            if (i < cases)
                statements(c, depth + 1);
        }
    }

    void store(Code& c)
    {
        struct S
        {
            uint8_t opc;
            ValType t;
            uint32_t align;
        };
        static constexpr std::array<S, 9> kStores{{{op::i32_store, i32, 2}, {op::i64_store, i64, 3},
            {op::f32_store, f32, 2}, {op::f64_store, f64, 3}, {op::i32_store8, i32, 0},
            {op::i32_store16, i32, 1}, {op::i64_store8, i64, 0}, {op::i64_store16, i64, 1},
            {op::i64_store32, i64, 2}}};
        auto s = kStores[below(kStores.size())];
        if (!m_opt.floats && (s.t == f32 || s.t == f64))
            s = kStores[0];
        address(c);
        expr(c, s.t, 1);
        c.mem(s.opc, below(s.align + 1), offset());
    }

    uint32_t offset()
    {
        if (chance(0.985))
            return below(64);
        return chance(0.5) ? 65536 - below(16) : static_cast<uint32_t>(m_rng());
    }

    void address(Code& c)
    {
        expr(c, i32, 2);
        if (chance(0.985))
            c.i32_const(chance(0.9) ? 0x7ff8 : 0xfff8).op(op::i32_and);
    }

    void condition(Code& c, unsigned depth)
    {
        expr(c, i32, depth);
        if (chance(0.5))
            c.i32_const(static_cast<int32_t>(1 + below(3))).op(op::i32_and);
    }

    void call_any(Code& c, std::optional<ValType> want)
    {
        std::vector<const Callee*> ok;
        for (const auto& k : m_callees)
            if (k.index > m_fn.index &&
                (want ? (k.type.results.size() == 1 && k.type.results[0] == *want) : true))
                ok.push_back(&k);
        if (ok.empty())
        {
            if (want)
                constant(c, *want);
            return;
        }
        const auto& k = *ok[below(static_cast<uint32_t>(ok.size()))];
        for (auto p : k.type.params)
            expr(c, p, 3);
        if (m_table_size != 0 && chance(0.4))
        {
            // The table holds helpers in order at 0..n-1.
            const uint32_t slot = k.index - m_main - 1;
            if (chance(0.85))
                c.i32_const(static_cast<int32_t>(slot));
            else
                c.i32_const(static_cast<int32_t>(below(m_table_size + 2)));
            c.call_indirect(m_mb.add_type(k.type));
        }
        else
            c.call(k.index);
        if (!want && !k.type.results.empty())
            c.op(op::drop);
    }

    void expr(Code& c, ValType t, unsigned depth)
    {
        if (depth >= 4 || m_fn.budget <= -40 || chance(0.25))
        {
            leaf(c, t);
            return;
        }
        --m_fn.budget;
        switch (below(20))
        {
        case 0:
        case 1:
        case 2:
        case 3:
        case 4:
        case 5:
        case 6:
        case 7:
            numeric(c, t, depth);
            return;
        case 8:
        case 9:
            if (m_opt.memory)
            {
                load(c, t);
                return;
            }
            break;
        case 10:
            expr(c, t, depth + 1);
            expr(c, t, depth + 1);
            condition(c, depth + 1);
            c.op(op::select);
            return;
        case 11:
            condition(c, depth + 1);
            c.begin(op::if_, t);
            expr(c, t, depth + 1);
            c.op(op::else_);
            expr(c, t, depth + 1);
            c.end();
            return;
        case 12:
            if (m_opt.calls)
            {
                call_any(c, t);
                return;
            }
            break;
        case 13:
            if (const auto l = pick_local(t, true))
            {
                expr(c, t, depth + 1);
                c.local_tee(*l);
                return;
            }
            break;
        case 14:
            if (!m_hooks.empty() && (t == i32 || t == i64))
            {
                for (const auto& h : m_hooks)
                    if (h.type == t && chance(0.7))
                    {
                        expr(c, t, depth + 1);
                        if (chance(0.6))
                            c.op(t == i32 ? op::i32_const : op::i64_const).s32(0xffff).op(
                                t == i32 ? op::i32_and : static_cast<uint8_t>(0x83));
                        expr(c, t, depth + 1);
                        if (chance(0.6))
                            c.op(t == i32 ? op::i32_const : op::i64_const).s32(0xffff).op(
                                t == i32 ? op::i32_and : static_cast<uint8_t>(0x83));
                        c.call(h.index);
                        return;
                    }
            }
            break;
        case 15:
            if (m_mix && t == i64)
            {
                expr(c, i64, depth + 1);
                expr(c, i64, depth + 1);
                c.call(*m_mix);
                return;
            }
            if (m_burn && t == i32)
            {
                expr(c, i32, depth + 1);
                c.call(*m_burn);
                return;
            }
            break;
        case 16:
            if (m_rec && t == i64 && m_fn.index == m_main)
            {
                // Depth from the argument, sometimes beyond the frame limit.
                c.local_get(0).i32_const(chance(0.8) ? 0x3f : 0x7ff).op(op::i32_and).call(*m_rec);
                return;
            }
            break;
        case 17:
            if (m_opt.memory && t == i32)
            {
                c.op(op::memory_size).u32(0);
                return;
            }
            break;
        case 18:
            c.begin(op::block, t);
            m_fn.labels.push_back({false});
            expr(c, t, depth + 1);
            m_fn.labels.pop_back();
            c.end();
            return;
        default:
            break;
        }
        numeric(c, t, depth);
    }

    void leaf(Code& c, ValType t)
    {
        const auto r = below(10);
        if (r < 4)
            if (const auto l = pick_local(t, false))
            {
                c.local_get(*l);
                return;
            }
        if (r == 4)
            if (const auto g = pick_global(t, false))
            {
                c.global_get(*g);
                return;
            }
        constant(c, t);
    }

    void load(Code& c, ValType t)
    {
        struct L
        {
            uint8_t opc;
            ValType t;
            uint32_t align;
        };
        static constexpr std::array<L, 14> kLoads{{{op::i32_load, i32, 2}, {op::i64_load, i64, 3},
            {op::f32_load, f32, 2}, {op::f64_load, f64, 3}, {op::i32_load8_s, i32, 0},
            {op::i32_load8_u, i32, 0}, {op::i32_load16_s, i32, 1}, {op::i32_load16_u, i32, 1},
            {op::i64_load8_s, i64, 0}, {op::i64_load8_u, i64, 0}, {op::i64_load16_s, i64, 1},
            {op::i64_load16_u, i64, 1}, {op::i64_load32_s, i64, 2}, {op::i64_load32_u, i64, 2}}};
        std::vector<L> ok;
        for (const auto& l : kLoads)
            if (l.t == t)
                ok.push_back(l);
        const auto& l = ok[below(static_cast<uint32_t>(ok.size()))];
        address(c);
        c.mem(l.opc, below(l.align + 1), offset());
    }

    void numeric(Code& c, ValType t, unsigned depth)
    {
        std::vector<uint8_t> ops;
        for (unsigned o = 0x45; o <= 0xbf; ++o)
        {
            const auto sig = opcode::numeric_sig(static_cast<uint8_t>(o));
            if (!sig || sig->out != t)
                continue;
            if (!m_opt.floats && (is_float(sig->in) || is_float(sig->out)))
                continue;
            ops.push_back(static_cast<uint8_t>(o));
        }
        const auto o = ops[below(static_cast<uint32_t>(ops.size()))];
        const auto sig = *opcode::numeric_sig(o);
        const bool divides = (o >= op::i32_div_s && o <= op::i32_rem_u) ||
                             (o >= op::i64_div_s && o <= 0x82);
        const bool truncates = (o >= op::i32_trunc_f32_s && o <= op::i32_trunc_f64_u) ||
                               (o >= op::i64_trunc_f32_s && o <= op::i64_trunc_f64_u);
        expr(c, sig.in, depth + 1);
        if (truncates && chance(0.85))
            clamp_float(c, sig.in);
        if (sig.arity == 2)
        {
            expr(c, sig.in, depth + 1);
            if (divides && chance(0.85))
            {
                // Force an odd, positive divisor.
                if (sig.in == i32)
                    c.i32_const(0x7fff).op(op::i32_and).i32_const(1).op(op::i32_or);
                else
                    c.i64_const(0x7fff).op(0x83).i64_const(1).op(0x84);
            }
        }
        c.op(o);
    }

    /// Maps NaN to 0 and clamps into [-1000, 1000] so truncation cannot trap.
    void clamp_float(Code& c, ValType t)
    {
        const auto tmp = new_local(t, false);
        const bool d = t == f64;
        c.local_tee(tmp);
        if (d)
            c.f64_const(0xc08f400000000000ull).op(0xa5).f64_const(0x408f400000000000ull).op(0xa4);
        else
            c.f32_const(0xc47a0000).op(op::f32_max).f32_const(0x447a0000).op(op::f32_min);
        if (d)
            c.f64_const(0);
        else
            c.f32_const(0);
        c.local_get(tmp).local_get(tmp).op(d ? op::f64_eq : op::f32_eq);
        c.op(op::select);
    }

    struct Hook
    {
        uint32_t index;
        ValType type;
        std::string name;
    };

    std::mt19937_64 m_rng;
    GenOptions m_opt;
    ModuleBuilder m_mb;
    std::vector<Hook> m_hooks;
    std::optional<uint32_t> m_mix;
    std::optional<uint32_t> m_burn;
    std::optional<uint32_t> m_rec;
    uint32_t m_main = 0;
    uint32_t m_table_size = 0;
    std::vector<Callee> m_callees;
    std::vector<std::pair<ValType, bool>> m_globals;
    FnState m_fn;
};
}  // namespace

GeneratedProgram generate_program(uint64_t seed, const GenOptions& options)
{
    return Generator{seed, options}.run(seed);
}

HostRegistry test_host_registry()
{
    return mock_host_registry();
}

}  // namespace detwasm::test
