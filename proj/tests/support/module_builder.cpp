// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "module_builder.hpp"

#include <algorithm>

namespace detwasm::test
{
namespace
{
void put_u32(std::vector<uint8_t>& out, uint32_t v)
{
    do
    {
        uint8_t b = v & 0x7f;
        v >>= 7;
        if (v != 0)
            b |= 0x80;
        out.push_back(b);
    } while (v != 0);
}

void put_s64(std::vector<uint8_t>& out, int64_t v)
{
    while (true)
    {
        const uint8_t b = v & 0x7f;
        v >>= 7;
        const bool done = (v == 0 && !(b & 0x40)) || (v == -1 && (b & 0x40));
        out.push_back(done ? b : (b | 0x80));
        if (done)
            return;
    }
}

void put_name(std::vector<uint8_t>& out, const std::string& s)
{
    put_u32(out, static_cast<uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

void put_limits(std::vector<uint8_t>& out, uint32_t min, std::optional<uint32_t> max)
{
    out.push_back(max ? 1 : 0);
    put_u32(out, min);
    if (max)
        put_u32(out, *max);
}

void put_const(std::vector<uint8_t>& out, ValType t, uint64_t bits)
{
    switch (t)
    {
    case ValType::i32:
        out.push_back(opcode::i32_const);
        put_s64(out, static_cast<int32_t>(bits));
        break;
    case ValType::i64:
        out.push_back(opcode::i64_const);
        put_s64(out, static_cast<int64_t>(bits));
        break;
    case ValType::f32:
        out.push_back(opcode::f32_const);
        for (int i = 0; i < 4; ++i)
            out.push_back(static_cast<uint8_t>(bits >> (8 * i)));
        break;
    case ValType::f64:
        out.push_back(opcode::f64_const);
        for (int i = 0; i < 8; ++i)
            out.push_back(static_cast<uint8_t>(bits >> (8 * i)));
        break;
    }
    out.push_back(opcode::end);
}

void put_section(std::vector<uint8_t>& out, uint8_t id, const std::vector<uint8_t>& payload)
{
    out.push_back(id);
    put_u32(out, static_cast<uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
}
}  // namespace

uint8_t type_byte(ValType t) noexcept
{
    switch (t)
    {
    case ValType::i32: return 0x7f;
    case ValType::i64: return 0x7e;
    case ValType::f32: return 0x7d;
    case ValType::f64: return 0x7c;
    }
    return 0;
}

Code& Code::u32(uint32_t v)
{
    put_u32(m_bytes, v);
    return *this;
}

Code& Code::s32(int32_t v)
{
    put_s64(m_bytes, v);
    return *this;
}

Code& Code::s64(int64_t v)
{
    put_s64(m_bytes, v);
    return *this;
}

Code& Code::f32_const(uint32_t bits)
{
    op(opcode::f32_const);
    for (int i = 0; i < 4; ++i)
        m_bytes.push_back(static_cast<uint8_t>(bits >> (8 * i)));
    return *this;
}

Code& Code::f64_const(uint64_t bits)
{
    op(opcode::f64_const);
    for (int i = 0; i < 8; ++i)
        m_bytes.push_back(static_cast<uint8_t>(bits >> (8 * i)));
    return *this;
}

Code& Code::begin(uint8_t opc, std::optional<ValType> result)
{
    op(opc);
    return op(result ? type_byte(*result) : opcode::block_type_empty);
}

Code& Code::br_table(const std::vector<uint32_t>& targets, uint32_t fallback)
{
    op(opcode::br_table).u32(static_cast<uint32_t>(targets.size()));
    for (auto t : targets)
        u32(t);
    return u32(fallback);
}

Code& Code::append(const Code& other)
{
    m_bytes.insert(m_bytes.end(), other.m_bytes.begin(), other.m_bytes.end());
    return *this;
}

uint32_t ModuleBuilder::add_type(const FuncType& type)
{
    const auto it = std::find(m_types.begin(), m_types.end(), type);
    if (it != m_types.end())
        return static_cast<uint32_t>(it - m_types.begin());
    m_types.push_back(type);
    return static_cast<uint32_t>(m_types.size() - 1);
}

uint32_t ModuleBuilder::import_function(
    const std::string& module, const std::string& name, const FuncType& type)
{
    m_imports.push_back({module, name, 0, add_type(type)});
    return m_num_imported_functions++;
}

uint32_t ModuleBuilder::import_global(
    const std::string& module, const std::string& name, ValType type, bool mut)
{
    m_imports.push_back({module, name, 3, 0, type, mut});
    return m_num_imported_globals++;
}

uint32_t ModuleBuilder::add_function(
    const FuncType& type, const std::vector<ValType>& locals, const Code& body)
{
    m_functions.push_back({add_type(type), locals, body});
    return num_functions() - 1;
}

uint32_t ModuleBuilder::add_global(ValType type, bool mut, uint64_t init_bits)
{
    m_globals.push_back({type, mut, init_bits});
    return m_num_imported_globals + static_cast<uint32_t>(m_globals.size() - 1);
}

void ModuleBuilder::set_memory(uint32_t min_pages, std::optional<uint32_t> max_pages)
{
    m_memory = {min_pages, max_pages};
}

void ModuleBuilder::set_table(uint32_t min, std::optional<uint32_t> max)
{
    m_table = {min, max};
}

void ModuleBuilder::export_function(const std::string& name, uint32_t func_index)
{
    m_exports.push_back({{}, name, 0, func_index});
}

void ModuleBuilder::export_global(const std::string& name, uint32_t global_index)
{
    m_exports.push_back({{}, name, 3, global_index});
}

void ModuleBuilder::export_memory(const std::string& name)
{
    m_exports.push_back({{}, name, 2, 0});
}

void ModuleBuilder::add_element(uint32_t offset, const std::vector<uint32_t>& funcs)
{
    m_elements.push_back({offset, funcs, {}});
}

void ModuleBuilder::add_data(uint32_t offset, const std::vector<uint8_t>& bytes)
{
    m_data.push_back({offset, {}, bytes});
}

std::vector<uint8_t> ModuleBuilder::build() const
{
    std::vector<uint8_t> out{0x00, 0x61, 0x73, 0x6d, 0x01, 0x00, 0x00, 0x00};
    std::vector<uint8_t> s;

    if (!m_types.empty())
    {
        s.clear();
        put_u32(s, static_cast<uint32_t>(m_types.size()));
        for (const auto& t : m_types)
        {
            s.push_back(0x60);
            put_u32(s, static_cast<uint32_t>(t.params.size()));
            for (auto p : t.params)
                s.push_back(type_byte(p));
            put_u32(s, static_cast<uint32_t>(t.results.size()));
            for (auto r : t.results)
                s.push_back(type_byte(r));
        }
        put_section(out, 1, s);
    }
    if (!m_imports.empty())
    {
        s.clear();
        put_u32(s, static_cast<uint32_t>(m_imports.size()));
        for (const auto& i : m_imports)
        {
            put_name(s, i.module);
            put_name(s, i.name);
            s.push_back(i.kind);
            if (i.kind == 0)
                put_u32(s, i.index);
            else
            {
                s.push_back(type_byte(i.type));
                s.push_back(i.mut ? 1 : 0);
            }
        }
        put_section(out, 2, s);
    }
    if (!m_functions.empty())
    {
        s.clear();
        put_u32(s, static_cast<uint32_t>(m_functions.size()));
        for (const auto& f : m_functions)
            put_u32(s, f.type);
        put_section(out, 3, s);
    }
    if (m_table)
    {
        s.clear();
        put_u32(s, 1);
        s.push_back(0x70);
        put_limits(s, m_table->first, m_table->second);
        put_section(out, 4, s);
    }
    if (m_memory)
    {
        s.clear();
        put_u32(s, 1);
        put_limits(s, m_memory->first, m_memory->second);
        put_section(out, 5, s);
    }
    if (!m_globals.empty())
    {
        s.clear();
        put_u32(s, static_cast<uint32_t>(m_globals.size()));
        for (const auto& g : m_globals)
        {
            s.push_back(type_byte(g.type));
            s.push_back(g.mut ? 1 : 0);
            put_const(s, g.type, g.bits);
        }
        put_section(out, 6, s);
    }
    if (!m_exports.empty())
    {
        s.clear();
        put_u32(s, static_cast<uint32_t>(m_exports.size()));
        for (const auto& e : m_exports)
        {
            put_name(s, e.name);
            s.push_back(e.kind);
            put_u32(s, e.index);
        }
        put_section(out, 7, s);
    }
    if (m_start)
    {
        s.clear();
        put_u32(s, *m_start);
        put_section(out, 8, s);
    }
    if (!m_elements.empty())
    {
        s.clear();
        put_u32(s, static_cast<uint32_t>(m_elements.size()));
        for (const auto& e : m_elements)
        {
            put_u32(s, 0);
            put_const(s, ValType::i32, e.offset);
            put_u32(s, static_cast<uint32_t>(e.funcs.size()));
            for (auto f : e.funcs)
                put_u32(s, f);
        }
        put_section(out, 9, s);
    }
    if (!m_functions.empty())
    {
        s.clear();
        put_u32(s, static_cast<uint32_t>(m_functions.size()));
        for (const auto& f : m_functions)
        {
            std::vector<uint8_t> body;
            std::vector<std::pair<uint32_t, ValType>> groups;
            for (auto t : f.locals)
            {
                if (!groups.empty() && groups.back().second == t)
                    ++groups.back().first;
                else
                    groups.emplace_back(1, t);
            }
            put_u32(body, static_cast<uint32_t>(groups.size()));
            for (const auto& [n, t] : groups)
            {
                put_u32(body, n);
                body.push_back(type_byte(t));
            }
            body.insert(body.end(), f.body.bytes().begin(), f.body.bytes().end());
            body.push_back(opcode::end);
            put_u32(s, static_cast<uint32_t>(body.size()));
            s.insert(s.end(), body.begin(), body.end());
        }
        put_section(out, 10, s);
    }
    if (!m_data.empty())
    {
        s.clear();
        put_u32(s, static_cast<uint32_t>(m_data.size()));
        for (const auto& d : m_data)
        {
            put_u32(s, 0);
            put_const(s, ValType::i32, d.offset);
            put_u32(s, static_cast<uint32_t>(d.bytes.size()));
            s.insert(s.end(), d.bytes.begin(), d.bytes.end());
        }
        put_section(out, 11, s);
    }
    return out;
}

}  // namespace detwasm::test
