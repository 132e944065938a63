// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/frontend/decoder.hpp"
#include "detwasm/frontend/leb128.hpp"

#include <cstring>

namespace detwasm
{
namespace
{
constexpr uint8_t kMagic[] = {0x00, 0x61, 0x73, 0x6d};
constexpr uint8_t kVersion[] = {0x01, 0x00, 0x00, 0x00};

[[noreturn]] void unsupported(size_t at, const char* what)
{
    throw ValidationError{ErrorCode::UnsupportedFeature, at, what};
}

ValType read_valtype(ByteReader& r)
{
    const auto at = r.pos();
    const auto byte = r.u8();
    switch (byte)
    {
    case 0x7f:
    case 0x7e:
    case 0x7d:
    case 0x7c:
        return static_cast<ValType>(byte);
    case 0x7b:
        unsupported(at, "v128 value type");
    case 0x70:
    case 0x6f:
        unsupported(at, "reference value type");
    default:
        r.fail("invalid value type", at);
    }
}

Limits read_limits(ByteReader& r, bool is_memory)
{
    const auto at = r.pos();
    const auto flags = r.u8();
    Limits limits;
    switch (flags)
    {
    case 0x00:
        limits.min = r.u32();
        break;
    case 0x01:
        limits.min = r.u32();
        limits.max = r.u32();
        break;
    case 0x02:
    case 0x03:
        if (is_memory)
            unsupported(at, "shared memory");
        r.fail("invalid limits flags", at);
    default:
        if (is_memory && flags <= 0x07)
            unsupported(at, "64-bit memory");
        r.fail("invalid limits flags", at);
    }
    return limits;
}

ConstExpr read_const_expr(ByteReader& r)
{
    ConstExpr expr;
    expr.offset = r.pos();
    const auto op_at = r.pos();
    const auto op = r.u8();
    switch (op)
    {
    case 0x41:
        expr.type = ValType::i32;
        expr.bits = static_cast<uint32_t>(r.s32());
        break;
    case 0x42:
        expr.type = ValType::i64;
        expr.bits = static_cast<uint64_t>(r.s64());
        break;
    case 0x43:
        expr.type = ValType::f32;
        expr.bits = r.fixed_u32();
        break;
    case 0x44:
        expr.type = ValType::f64;
        expr.bits = r.fixed_u64();
        break;
    case 0x23:
        expr.kind = ConstExpr::Kind::GlobalGet;
        expr.bits = r.u32();
        break;
    case 0xd0:
    case 0xd2:
        unsupported(op_at, "reference constant expression");
    default:
        throw ValidationError{ErrorCode::InvalidConstExpr, op_at, "unsupported constant expression"};
    }
    const auto end_at = r.pos();
    if (r.u8() != 0x0b)
        throw ValidationError{
            ErrorCode::InvalidConstExpr, end_at, "constant expression must be a single instruction"};
    return expr;
}

void read_type_section(ByteReader& r, ModuleAST& m)
{
    const auto count = r.u32();
    for (uint32_t i = 0; i < count; ++i)
    {
        TypeEntry entry;
        entry.offset = r.pos();
        const auto form = r.u8();
        if (form != 0x60)
            r.fail("invalid function type form", entry.offset);
        const auto nparams = r.u32();
        if (nparams > r.remaining())
            r.fail("parameter vector exceeds section", entry.offset);
        entry.type.params.reserve(nparams);
        for (uint32_t p = 0; p < nparams; ++p)
            entry.type.params.push_back(read_valtype(r));
        const auto results_at = r.pos();
        const auto nresults = r.u32();
        if (nresults > r.remaining())
            r.fail("result vector exceeds section", results_at);
        for (uint32_t p = 0; p < nresults; ++p)
            entry.type.results.push_back(read_valtype(r));
        if (nresults > 1)
            unsupported(results_at, "multiple results");
        m.types.push_back(std::move(entry));
    }
}

void read_import_section(ByteReader& r, ModuleAST& m)
{
    const auto count = r.u32();
    for (uint32_t i = 0; i < count; ++i)
    {
        Import imp;
        imp.offset = r.pos();
        imp.module_name_offset = r.pos();
        imp.module = r.name();
        imp.item_name_offset = r.pos();
        imp.name = r.name();
        const auto kind_at = r.pos();
        const auto kind = r.u8();
        switch (kind)
        {
        case 0x00:
            imp.kind = ExternalKind::Function;
            imp.type_index = r.u32();
            ++m.num_imported_functions;
            break;
        case 0x01:
            unsupported(kind_at, "imported table");
        case 0x02:
            unsupported(kind_at, "imported memory");
        case 0x03:
        {
            imp.kind = ExternalKind::Global;
            imp.global.type = read_valtype(r);
            const auto mut_at = r.pos();
            const auto mut = r.u8();
            if (mut == 0x01)
                unsupported(mut_at, "imported mutable global");
            if (mut != 0x00)
                r.fail("invalid mutability", mut_at);
            ++m.num_imported_globals;
            break;
        }
        default:
            r.fail("invalid import kind", kind_at);
        }
        m.imports.push_back(std::move(imp));
    }
}

void read_function_section(ByteReader& r, ModuleAST& m)
{
    const auto count = r.u32();
    if (count > r.remaining())
        r.fail("function vector exceeds section", r.pos());
    m.functions.reserve(count);
    for (uint32_t i = 0; i < count; ++i)
    {
        FunctionEntry f;
        f.offset = r.pos();
        f.type_index = r.u32();
        m.functions.push_back(f);
    }
}

void read_table_section(ByteReader& r, ModuleAST& m)
{
    const auto count = r.u32();
    for (uint32_t i = 0; i < count; ++i)
    {
        TableEntry t;
        t.offset = r.pos();
        const auto type = r.u8();
        if (type == 0x6f)
            unsupported(t.offset, "externref table");
        if (type != 0x70)
            r.fail("invalid table element type", t.offset);
        t.limits = read_limits(r, false);
        if (!m.tables.empty())
            unsupported(t.offset, "multiple tables");
        m.tables.push_back(t);
    }
}

void read_memory_section(ByteReader& r, ModuleAST& m)
{
    const auto count = r.u32();
    for (uint32_t i = 0; i < count; ++i)
    {
        MemoryEntry mem;
        mem.offset = r.pos();
        mem.limits = read_limits(r, true);
        if (!m.memories.empty())
            unsupported(mem.offset, "multiple memories");
        m.memories.push_back(mem);
    }
}

void read_global_section(ByteReader& r, ModuleAST& m)
{
    const auto count = r.u32();
    for (uint32_t i = 0; i < count; ++i)
    {
        GlobalEntry g;
        g.offset = r.pos();
        g.type.type = read_valtype(r);
        const auto mut_at = r.pos();
        const auto mut = r.u8();
        if (mut > 1)
            r.fail("invalid mutability", mut_at);
        g.type.is_mutable = mut == 1;
        g.init = read_const_expr(r);
        m.globals.push_back(g);
    }
}

void read_export_section(ByteReader& r, ModuleAST& m)
{
    const auto count = r.u32();
    for (uint32_t i = 0; i < count; ++i)
    {
        Export e;
        e.offset = r.pos();
        e.name = r.name();
        const auto kind_at = r.pos();
        const auto kind = r.u8();
        if (kind > 0x03)
            r.fail("invalid export kind", kind_at);
        e.kind = static_cast<ExternalKind>(kind);
        e.index = r.u32();
        m.exports.push_back(std::move(e));
    }
}

void read_element_section(ByteReader& r, ModuleAST& m)
{
    const auto count = r.u32();
    for (uint32_t i = 0; i < count; ++i)
    {
        ElementSegment seg;
        seg.offset = r.pos();
        const auto flags = r.u32();
        if (flags != 0)
            unsupported(seg.offset, "non-MVP element segment");
        seg.offset_expr = read_const_expr(r);
        const auto n = r.u32();
        if (n > r.remaining())
            r.fail("element vector exceeds section", seg.offset);
        seg.func_indices.reserve(n);
        for (uint32_t k = 0; k < n; ++k)
            seg.func_indices.push_back(r.u32());
        m.elements.push_back(std::move(seg));
    }
}

void read_code_section(ByteReader& r, ModuleAST& m)
{
    const auto count_at = r.pos();
    const auto count = r.u32();
    if (count != m.functions.size())
        r.fail("function and code section counts differ", count_at);
    m.codes.reserve(count);
    for (uint32_t i = 0; i < count; ++i)
    {
        CodeEntry code;
        code.offset = r.pos();
        const auto size = r.u32();
        const auto entry_start = r.pos();
        if (size > r.remaining())
            r.fail("code entry exceeds section", code.offset);
        ByteReader body{std::span{m.bytes}, entry_start, entry_start + size};
        const auto ndecls = body.u32();
        if (ndecls > body.remaining())
            body.fail("local declarations exceed body", code.offset);
        for (uint32_t d = 0; d < ndecls; ++d)
        {
            LocalDecl decl;
            decl.count = body.u32();
            decl.type = read_valtype(body);
            code.local_count += decl.count;
            code.locals.push_back(decl);
        }
        code.body_offset = body.pos();
        code.body_end = entry_start + size;
        if (code.body_offset >= code.body_end)
            body.fail("empty function body", code.body_offset);
        r.skip(size);
        m.codes.push_back(std::move(code));
    }
}

void read_data_section(ByteReader& r, ModuleAST& m)
{
    const auto count = r.u32();
    for (uint32_t i = 0; i < count; ++i)
    {
        DataSegment seg;
        seg.offset = r.pos();
        const auto flags = r.u32();
        if (flags != 0)
            unsupported(seg.offset, "non-MVP data segment");
        seg.offset_expr = read_const_expr(r);
        seg.data_size = r.u32();
        seg.data_offset = r.pos();
        r.skip(seg.data_size);
        m.data.push_back(seg);
    }
}
}  // namespace

ModuleAST decode_module(std::span<const uint8_t> bytes)
{
    ModuleAST m;
    m.bytes.assign(bytes.begin(), bytes.end());
    ByteReader r{std::span{m.bytes}};

    if (m.bytes.size() < 4 || std::memcmp(m.bytes.data(), kMagic, 4) != 0)
        r.fail("invalid magic", 0);
    if (m.bytes.size() < 8 || std::memcmp(m.bytes.data() + 4, kVersion, 4) != 0)
        r.fail("unsupported version", 4);
    r.skip(8);

    uint8_t last_id = 0;
    while (!r.at_end())
    {
        SectionInfo info;
        info.offset = r.pos();
        const auto id = r.u8();
        const auto size = r.u32();
        const auto content = r.pos();
        if (size > r.remaining())
            r.fail("section exceeds module", info.offset);
        info.size = size;
        info.item_count_offset = content;

        if (id == 0)
        {
            ByteReader cr{std::span{m.bytes}, content, content + size};
            (void)cr.name();
            r.skip(size);
            continue;
        }
        if (id == 12)
            unsupported(info.offset, "data count section");
        if (id > 12)
            r.fail("unknown section id", info.offset);
        if (id <= last_id)
            r.fail("section out of order or duplicated", info.offset);
        last_id = id;
        info.id = static_cast<SectionId>(id);

        ByteReader sr{std::span{m.bytes}, content, content + size};
        switch (info.id)
        {
        case SectionId::Type:
            read_type_section(sr, m);
            break;
        case SectionId::Import:
            read_import_section(sr, m);
            break;
        case SectionId::Function:
            read_function_section(sr, m);
            break;
        case SectionId::Table:
            read_table_section(sr, m);
            break;
        case SectionId::Memory:
            read_memory_section(sr, m);
            break;
        case SectionId::Global:
            read_global_section(sr, m);
            break;
        case SectionId::Export:
            read_export_section(sr, m);
            break;
        case SectionId::Start:
            m.start_offset = sr.pos();
            m.start = sr.u32();
            break;
        case SectionId::Element:
            read_element_section(sr, m);
            break;
        case SectionId::Code:
            read_code_section(sr, m);
            break;
        case SectionId::Data:
            read_data_section(sr, m);
            break;
        case SectionId::Custom:
            break;
        }
        if (!sr.at_end())
            sr.fail("section size mismatch", sr.pos());
        m.sections.push_back(info);
        r.skip(size);
    }

    if (m.codes.size() != m.functions.size())
        r.fail("function section without matching code section", r.pos());
    return m;
}

}  // namespace detwasm
