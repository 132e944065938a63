// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/runtime/instance.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>

namespace detwasm
{
std::string_view to_string(InstantiationErrorKind kind) noexcept
{
    switch (kind)
    {
    case InstantiationErrorKind::UnresolvedImport: return "UnresolvedImport";
    case InstantiationErrorKind::SignatureMismatch: return "SignatureMismatch";
    case InstantiationErrorKind::SegmentOutOfBounds: return "SegmentOutOfBounds";
    case InstantiationErrorKind::StartTrap: return "StartTrap";
    }
    return "?";
}

Instance::Instance(Executor& executor, const HostRegistry& registry, const InstanceConfig& config)
  : m_executor{executor}, m_config{config}, m_lifecycle{&registry.lifecycle()}
{
    m_ctx.gas_remaining = config.gas_limit;
    m_ctx.max_depth = config.max_depth;
    m_ctx.weight_budget = config.weight_budget;
    m_ctx.instance = this;
}

Instance::~Instance()
{
    if (m_user_data != nullptr && m_lifecycle->destroy)
        m_lifecycle->destroy(m_user_data);
}

uint32_t Instance::memory_grow(uint32_t delta_pages)
{
    if (!m_memory)
        return kGrowFailed;
    const auto r = m_memory->grow(delta_pages);
    m_ctx.memory_base = m_memory->base();
    m_ctx.memory_size = m_memory->size();
    return r;
}

uint64_t Instance::memory_hash() const noexcept
{
    return fnv1a64(m_memory ? std::span<const uint8_t>{m_memory->bytes()} : std::span<const uint8_t>{});
}

void Instance::reset_gas(uint64_t limit) noexcept
{
    m_config.gas_limit = limit;
    m_ctx.gas_remaining = limit;
}

namespace
{
[[noreturn]] void fail(InstantiationErrorKind kind, const std::string& detail)
{
    throw InstantiationError{kind, detail};
}

uint64_t eval_const(const ConstExpr& e, std::span<const uint64_t> globals)
{
    return e.kind == ConstExpr::Kind::Const ? e.bits : globals[e.bits];
}
}  // namespace

std::unique_ptr<Instance> create_instance(
    Executor& executor, const HostRegistry& registry, const InstanceConfig& config)
{
    const auto& mod = executor.module();
    const auto& ast = mod.ast;
    if (const auto need = executor.required_memory_mode(); need && *need != config.memory_mode)
        throw ApiMisuse{"engine code uses " + std::string{to_string(*need)} +
                        " bounds but the instance asks for " +
                        std::string{to_string(config.memory_mode)}};
    auto inst = std::make_unique<Instance>(executor, registry, config);

    // Imports, in declaration order.
    inst->m_imports.resize(mod.num_imported_functions());
    uint32_t func_index = 0;
    for (const auto& imp : ast.imports)
    {
        const auto where = imp.module + "." + imp.name;
        if (imp.kind == ExternalKind::Global)
        {
            const auto v = registry.find_global(imp.module, imp.name);
            if (!v)
                fail(InstantiationErrorKind::UnresolvedImport, where);
            if (v->type != imp.global.type)
                fail(InstantiationErrorKind::SignatureMismatch, where);
            inst->m_globals.push_back(normalize_bits(v->type, v->bits));
            continue;
        }
        auto& bound = inst->m_imports[func_index];
        if (auto hook = mod.hook_for(func_index))
            bound.hook = hook;
        else
        {
            bound.host = registry.find_function(imp.module, imp.name);
            if (bound.host == nullptr)
                fail(InstantiationErrorKind::UnresolvedImport, where);
            if (bound.host->signature != mod.func_type(func_index) || !bound.host->callable)
                fail(InstantiationErrorKind::SignatureMismatch, where);
        }
        ++func_index;
    }

    for (const auto& g : ast.globals)
        inst->m_globals.push_back(eval_const(g.init, inst->m_globals));

    if (!ast.memories.empty())
    {
        const auto& lim = ast.memories[0].limits;
        const auto max_pages = std::min<uint32_t>(lim.max.value_or(65536), config.max_memory_pages);
        inst->m_memory = std::make_unique<LinearMemory>(
            config.memory_mode, lim.min, std::max(max_pages, lim.min));
    }
    if (!ast.tables.empty())
        inst->m_table.resize(ast.tables[0].limits.min);

    // Every segment is bounds-checked before any is applied.
    for (const auto& seg : ast.elements)
    {
        const uint64_t at = static_cast<uint32_t>(eval_const(seg.offset_expr, inst->m_globals));
        if (at + seg.func_indices.size() > inst->m_table.size())
            fail(InstantiationErrorKind::SegmentOutOfBounds, "element segment");
    }
    for (const auto& seg : ast.data)
    {
        const uint64_t at = static_cast<uint32_t>(eval_const(seg.offset_expr, inst->m_globals));
        const uint64_t size = inst->m_memory ? inst->m_memory->size() : 0;
        if (at + seg.data_size > size)
            fail(InstantiationErrorKind::SegmentOutOfBounds, "data segment");
    }
    for (const auto& seg : ast.elements)
    {
        auto at = static_cast<uint32_t>(eval_const(seg.offset_expr, inst->m_globals));
        for (auto f : seg.func_indices)
            inst->m_table[at++] = {mod.canonical_type_ids[mod.type_index_of(f)], f};
    }
    for (const auto& seg : ast.data)
    {
        const auto at = static_cast<uint32_t>(eval_const(seg.offset_expr, inst->m_globals));
        if (seg.data_size != 0)
            std::memcpy(inst->m_memory->base() + at, ast.bytes.data() + seg.data_offset, seg.data_size);
    }

    auto& ctx = inst->m_ctx;
    if (inst->m_memory)
    {
        ctx.memory_base = inst->m_memory->base();
        ctx.memory_size = inst->m_memory->size();
    }
    ctx.globals = inst->m_globals.data();
    ctx.table = inst->m_table.data();
    ctx.table_size = inst->m_table.size();
    ctx.func_entries = executor.entry_table();
    ctx.engine = &executor;

    if (registry.lifecycle().init)
        inst->m_user_data = registry.lifecycle().init(*inst);

    if (ast.start)
    {
        const auto r = executor.call(*inst, *ast.start, {});
        if (r.trap)
            throw InstantiationError{InstantiationErrorKind::StartTrap,
                std::string{to_string(r.trap->code)}, r.trap};
    }
    return inst;
}

InvokeResult invoke(Instance& inst, std::string_view export_name, std::span<const Value> args)
{
    const auto& mod = inst.module();
    const auto* exp = mod.find_export(std::string{export_name});
    if (exp == nullptr || exp->kind != ExternalKind::Function)
        throw ApiMisuse{"no exported function named '" + std::string{export_name} + "'"};
    const auto& sig = mod.func_type(exp->index);
    if (args.size() != sig.params.size())
        throw ApiMisuse{"export '" + std::string{export_name} + "' expects " +
                        std::to_string(sig.params.size()) + " arguments"};
    for (size_t i = 0; i < args.size(); ++i)
        if (args[i].type != sig.params[i])
            throw ApiMisuse{"argument " + std::to_string(i) + " of '" + std::string{export_name} +
                            "' must be " + std::string{to_string(sig.params[i])}};
    return inst.executor().call(inst, exp->index, args);
}

HostCallOutcome call_import(Instance& inst, uint32_t func_index, std::span<const uint64_t> args)
{
    const auto& bound = inst.import(func_index);
    if (bound.hook)
    {
        const auto r = evaluate_checked(*bound.hook, args[0], args[1]);
        if (r.overflow)
            return {0, TrapCode::CheckedArithmeticOverflow};
        return {r.value, std::nullopt};
    }

    const auto& host = *bound.host;
    auto& gas = inst.context().gas_remaining;
    if (host.base_gas > gas)
    {
        gas = 0;
        return {0, TrapCode::GasExhausted};
    }
    gas -= host.base_gas;

    const auto& sig = host.signature;
    std::vector<Value> in(sig.params.size());
    for (size_t i = 0; i < in.size(); ++i)
        in[i] = Value{sig.params[i], normalize_bits(sig.params[i], args[i])};
    std::vector<Value> out(sig.results.size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i].type = sig.results[i];

    HostContext hctx{inst};
    HostStatus status;
    try
    {
        status = host.callable(hctx, in, out);
    }
    catch (...)
    {
        status = HostStatus::Error;
    }
    switch (status)
    {
    case HostStatus::Ok:
        break;
    case HostStatus::Error:
        return {0, TrapCode::HostError};
    case HostStatus::GasExhausted:
        gas = 0;
        return {0, TrapCode::GasExhausted};
    }
    if (out.empty())
        return {};
    return {normalize_bits(sig.results[0], out[0].bits), std::nullopt};
}

uint64_t fnv1a64(std::span<const uint8_t> bytes) noexcept
{
    uint64_t h = 0xcbf2'9ce4'8422'2325ull;
    for (auto b : bytes)
    {
        h ^= b;
        h *= 0x0000'0100'0000'01b3ull;
    }
    return h;
}

std::string trace_line(const InvokeResult& result, const Instance& inst)
{
    if (result.trap)
        return "TRAP " + std::string{to_string(result.trap->code)} +
               " gas=" + std::to_string(result.trap->gas_consumed);
    std::string s = "OK";
    for (const auto& v : result.values)
        s += " " + format_value(v);
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, inst.memory_hash());
    return s + " gas=" + std::to_string(inst.gas_consumed()) + " memhash=" + hash;
}

}  // namespace detwasm
