// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/frontend/validator.hpp"
#include "detwasm/frontend/decoder.hpp"
#include "detwasm/frontend/instr.hpp"
#include "detwasm/frontend/opcodes.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace detwasm
{
namespace
{
constexpr uint32_t kMaxWasmPages = 65536;

[[noreturn]] void error(ErrorCode code, size_t at, const std::string& what)
{
    throw ValidationError{code, at, what};
}

/// Strict UTF-8: no overlongs, no surrogates, nothing above U+10FFFF.
bool is_valid_utf8(std::string_view s) noexcept
{
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    const auto* end = p + s.size();
    while (p < end)
    {
        const uint8_t c = *p;
        if (c < 0x80)
        {
            ++p;
            continue;
        }
        size_t n = 0;
        uint8_t lo = 0x80, hi = 0xbf;
        if (c >= 0xc2 && c <= 0xdf)
            n = 1;
        else if (c == 0xe0)
            n = 2, lo = 0xa0;
        else if ((c >= 0xe1 && c <= 0xec) || c == 0xee || c == 0xef)
            n = 2;
        else if (c == 0xed)
            n = 2, hi = 0x9f;
        else if (c == 0xf0)
            n = 3, lo = 0x90;
        else if (c >= 0xf1 && c <= 0xf3)
            n = 3;
        else if (c == 0xf4)
            n = 3, hi = 0x8f;
        else
            return false;
        if (static_cast<size_t>(end - p) < n + 1)
            return false;
        if (p[1] < lo || p[1] > hi)
            return false;
        for (size_t k = 2; k <= n; ++k)
            if ((p[k] & 0xc0) != 0x80)
                return false;
        p += n + 1;
    }
    return true;
}

/// Read-only view of module-level declarations used while checking bodies.
struct ModuleView
{
    const ModuleAST& ast;
    std::vector<uint32_t> func_types;  ///< Type index per function index.
    std::vector<GlobalType> globals;

    explicit ModuleView(const ModuleAST& m) : ast{m}
    {
        for (const auto& imp : m.imports)
        {
            if (imp.kind == ExternalKind::Function)
                func_types.push_back(imp.type_index);
            else if (imp.kind == ExternalKind::Global)
                globals.push_back(imp.global);
        }
        for (const auto& f : m.functions)
            func_types.push_back(f.type_index);
        for (const auto& g : m.globals)
            globals.push_back(g.type);
    }

    const FuncType& type_of(uint32_t func_index) const
    {
        return ast.types[func_types[func_index]].type;
    }
};

struct BodyResult
{
    uint64_t peak_weight = 0;
    uint32_t instructions = 0;
};

/// Operand-stack type checker with weighted depth tracking. Each opcode is
/// checked against the instruction-count and nesting limits before any type rule.
class BodyChecker
{
public:
    BodyChecker(const ModuleView& mod, const FuncType& type, std::vector<ValType> locals,
        const DwasmLimits& limits)
      : m_mod{mod}, m_type{type}, m_locals{std::move(locals)}, m_limits{limits}
    {}

    BodyResult run(const CodeEntry& code)
    {
        ByteReader r{std::span{m_mod.ast.bytes}, code.body_offset, code.body_end};
        m_ctrl.push_back({opcode::block, result_of(m_type), 0, false});

        Instr in;
        while (!m_ctrl.empty())
        {
            if (r.at_end())
                r.fail("function body not terminated", r.pos());
            const auto at = r.pos();
            const auto op = r.peek();

            if (++m_result.instructions > m_limits.max_instructions_per_function)
                error(ErrorCode::InstructionCountExceeded, code.offset,
                    "too many instructions in function");
            if ((op == opcode::block || op == opcode::loop || op == opcode::if_) &&
                m_ctrl.size() > m_limits.max_control_nesting)
                error(ErrorCode::NestingDepthExceeded, at, "control nesting too deep");

            decode_instr(r, in, m_limits.allow_floats);
            check(in);
        }
        if (!r.at_end())
            r.fail("bytes after final end", r.pos());
        return m_result;
    }

private:
    static constexpr uint8_t kUnknown = 0;

    struct Frame
    {
        uint8_t op;
        std::optional<ValType> result;
        size_t height;
        bool unreachable;
    };

    static std::optional<ValType> result_of(const FuncType& t)
    {
        if (t.results.empty())
            return std::nullopt;
        return t.results.front();
    }

    static uint32_t weight(uint8_t t) noexcept
    {
        return t == kUnknown ? 2 : slot_weight(static_cast<ValType>(t));
    }

    [[noreturn]] void mismatch(const char* what) const
    {
        error(ErrorCode::TypeMismatch, m_at, what);
    }

    void push(uint8_t t)
    {
        m_stack.push_back(t);
        m_weight += weight(t);
        m_result.peak_weight = std::max(m_result.peak_weight, m_weight);
    }
    void push(ValType t) { push(static_cast<uint8_t>(t)); }

    uint8_t pop()
    {
        const auto& f = m_ctrl.back();
        if (m_stack.size() == f.height)
        {
            if (f.unreachable)
                return kUnknown;
            mismatch("operand stack underflow");
        }
        const auto t = m_stack.back();
        m_stack.pop_back();
        m_weight -= weight(t);
        return t;
    }

    uint8_t pop(ValType expected)
    {
        const auto t = pop();
        if (t != kUnknown && t != static_cast<uint8_t>(expected))
            mismatch("operand type mismatch");
        return t;
    }

    void pop_label(const std::optional<ValType>& types)
    {
        if (types)
            pop(*types);
    }

    void set_unreachable()
    {
        auto& f = m_ctrl.back();
        while (m_stack.size() > f.height)
        {
            m_weight -= weight(m_stack.back());
            m_stack.pop_back();
        }
        f.unreachable = true;
    }

    const Frame& label(uint32_t depth) const
    {
        if (depth >= m_ctrl.size())
            error(ErrorCode::InvalidIndex, m_at, "branch depth out of range");
        return m_ctrl[m_ctrl.size() - 1 - depth];
    }

    static std::optional<ValType> label_types(const Frame& f)
    {
        return f.op == opcode::loop ? std::nullopt : f.result;
    }

    void require_memory() const
    {
        if (m_mod.ast.memories.empty())
            error(ErrorCode::InvalidIndex, m_at, "no memory");
    }

    ValType local(uint32_t index) const
    {
        if (index >= m_locals.size())
            error(ErrorCode::InvalidIndex, m_at, "local index out of range");
        return m_locals[index];
    }

    const GlobalType& global(uint32_t index) const
    {
        if (index >= m_mod.globals.size())
            error(ErrorCode::InvalidIndex, m_at, "global index out of range");
        return m_mod.globals[index];
    }

    void call_with(const FuncType& t)
    {
        for (auto it = t.params.rbegin(); it != t.params.rend(); ++it)
            pop(*it);
        for (auto v : t.results)
            push(v);
    }

    void end_frame()
    {
        const auto f = m_ctrl.back();
        if (f.op == opcode::if_ && f.result)
            mismatch("if with result requires else");
        pop_frame_results();
        m_ctrl.pop_back();
        if (f.result && !m_ctrl.empty())
            push(*f.result);
    }

    void pop_frame_results()
    {
        const auto& f = m_ctrl.back();
        pop_label(f.result);
        if (m_stack.size() != f.height)
            mismatch("values remaining on stack at block end");
    }

    void check(const Instr& in)
    {
        m_at = in.offset;
        const auto op = in.op;
        switch (op)
        {
        case opcode::unreachable:
            set_unreachable();
            return;
        case opcode::nop:
            return;
        case opcode::block:
        case opcode::loop:
            m_ctrl.push_back({op, in.block_type, m_stack.size(), false});
            return;
        case opcode::if_:
            pop(ValType::i32);
            m_ctrl.push_back({op, in.block_type, m_stack.size(), false});
            return;
        case opcode::else_:
        {
            if (m_ctrl.back().op != opcode::if_)
                error(ErrorCode::MalformedModule, m_at, "else without matching if");
            pop_frame_results();
            auto& f = m_ctrl.back();
            f.op = opcode::else_;
            f.unreachable = false;
            return;
        }
        case opcode::end:
            end_frame();
            return;
        case opcode::br:
            pop_label(label_types(label(in.index)));
            set_unreachable();
            return;
        case opcode::br_if:
        {
            const auto types = label_types(label(in.index));
            pop(ValType::i32);
            pop_label(types);
            if (types)
                push(*types);
            return;
        }
        case opcode::br_table:
        {
            const auto def = label_types(label(in.index));
            pop(ValType::i32);
            for (const auto t : in.targets)
            {
                const auto types = label_types(label(t));
                if (types.has_value() != def.has_value())
                    mismatch("br_table arity mismatch");
                if (types && def && *types != *def)
                    mismatch("br_table label type mismatch");
            }
            pop_label(def);
            set_unreachable();
            return;
        }
        case opcode::return_:
            pop_label(result_of(m_type));
            set_unreachable();
            return;
        case opcode::call:
            if (in.index >= m_mod.func_types.size())
                error(ErrorCode::InvalidIndex, m_at, "function index out of range");
            call_with(m_mod.type_of(in.index));
            return;
        case opcode::call_indirect:
            if (m_mod.ast.tables.empty())
                error(ErrorCode::InvalidIndex, m_at, "no table");
            if (in.index >= m_mod.ast.types.size())
                error(ErrorCode::InvalidIndex, m_at, "type index out of range");
            pop(ValType::i32);
            call_with(m_mod.ast.types[in.index].type);
            return;
        case opcode::drop:
            pop();
            return;
        case opcode::select:
        {
            pop(ValType::i32);
            const auto t1 = pop();
            const auto t2 = pop();
            if (t1 != kUnknown && t2 != kUnknown && t1 != t2)
                mismatch("select operands differ");
            push(t1 == kUnknown ? t2 : t1);
            return;
        }
        case opcode::local_get:
            push(local(in.index));
            return;
        case opcode::local_set:
            pop(local(in.index));
            return;
        case opcode::local_tee:
        {
            const auto t = local(in.index);
            pop(t);
            push(t);
            return;
        }
        case opcode::global_get:
            push(global(in.index).type);
            return;
        case opcode::global_set:
        {
            const auto& g = global(in.index);
            if (!g.is_mutable)
                mismatch("global is immutable");
            pop(g.type);
            return;
        }
        case opcode::memory_size:
            require_memory();
            push(ValType::i32);
            return;
        case opcode::memory_grow:
            require_memory();
            pop(ValType::i32);
            push(ValType::i32);
            return;
        case opcode::i32_const:
            push(ValType::i32);
            return;
        case opcode::i64_const:
            push(ValType::i64);
            return;
        case opcode::f32_const:
            push(ValType::f32);
            return;
        case opcode::f64_const:
            push(ValType::f64);
            return;
        default:
            break;
        }

        if (const auto acc = opcode::memory_access(op))
        {
            require_memory();
            if (in.align > acc->max_align_log2)
                error(ErrorCode::InvalidAlignment, m_at, "alignment exceeds natural alignment");
            if (opcode::is_load(op))
            {
                pop(ValType::i32);
                push(acc->type);
            }
            else
            {
                pop(acc->type);
                pop(ValType::i32);
            }
            return;
        }
        const auto sig = opcode::numeric_sig(op);
        for (uint8_t i = 0; i < sig->arity; ++i)
            pop(sig->in);
        push(sig->out);
    }

    const ModuleView& m_mod;
    const FuncType& m_type;
    std::vector<ValType> m_locals;
    const DwasmLimits& m_limits;

    std::vector<uint8_t> m_stack;
    std::vector<Frame> m_ctrl;
    uint64_t m_weight = 0;
    size_t m_at = 0;
    BodyResult m_result;
};

std::vector<ValType> expand_locals(const FuncType& type, const CodeEntry& code)
{
    std::vector<ValType> locals = type.params;
    locals.reserve(type.params.size() + code.local_count);
    for (const auto& d : code.locals)
        locals.insert(locals.end(), d.count, d.type);
    return locals;
}

uint64_t declared_weight(const std::vector<ValType>& locals)
{
    uint64_t w = 0;
    for (auto t : locals)
        w += slot_weight(t);
    return w;
}

void check_float_type(const FuncType& t, const DwasmLimits& limits, size_t at)
{
    if (limits.allow_floats)
        return;
    for (auto v : t.params)
        if (is_float(v))
            error(ErrorCode::UnsupportedFeature, at, "floating-point type");
    for (auto v : t.results)
        if (is_float(v))
            error(ErrorCode::UnsupportedFeature, at, "floating-point type");
}

/// Type of a constant expression; global.get may refer only to imported globals.
ValType const_expr_type(const ConstExpr& e, const ModuleView& mod, uint32_t num_imported_globals)
{
    if (e.kind == ConstExpr::Kind::Const)
        return e.type;
    if (e.bits >= num_imported_globals)
        error(ErrorCode::InvalidConstExpr, e.offset, "global.get of non-imported global");
    return mod.globals[e.bits].type;
}

void check_limits(const Limits& l, size_t at)
{
    if (l.max && *l.max < l.min)
        error(ErrorCode::InvalidLimits, at, "maximum below minimum");
}
}  // namespace

uint32_t ValidatedModule::type_index_of(uint32_t func_index) const noexcept
{
    if (func_index < ast.num_imported_functions)
    {
        uint32_t n = 0;
        for (const auto& imp : ast.imports)
        {
            if (imp.kind != ExternalKind::Function)
                continue;
            if (n++ == func_index)
                return imp.type_index;
        }
    }
    return ast.functions[func_index - ast.num_imported_functions].type_index;
}

const Import& ValidatedModule::imported_function(uint32_t func_index) const
{
    uint32_t n = 0;
    for (const auto& imp : ast.imports)
    {
        if (imp.kind != ExternalKind::Function)
            continue;
        if (n++ == func_index)
            return imp;
    }
    throw std::out_of_range{"not an imported function"};
}

std::optional<HookKind> ValidatedModule::hook_for(uint32_t func_index) const
{
    const auto it = checked_hooks.find(func_index);
    if (it == checked_hooks.end())
        return std::nullopt;
    return it->second;
}

ValType ValidatedModule::global_type(uint32_t global_index) const noexcept
{
    if (global_index < ast.num_imported_globals)
    {
        uint32_t n = 0;
        for (const auto& imp : ast.imports)
            if (imp.kind == ExternalKind::Global && n++ == global_index)
                return imp.global.type;
    }
    return ast.globals[global_index - ast.num_imported_globals].type.type;
}

bool ValidatedModule::global_is_mutable(uint32_t global_index) const noexcept
{
    if (global_index < ast.num_imported_globals)
        return false;
    return ast.globals[global_index - ast.num_imported_globals].type.is_mutable;
}

const Export* ValidatedModule::find_export(const std::string& name) const
{
    const auto it = export_map.find(name);
    return it == export_map.end() ? nullptr : &ast.exports[it->second];
}

ValidatedModule validate_dwasm(ModuleAST ast, const DwasmLimits& limits)
{
    if (limits.max_params == 0 || limits.max_locals == 0 || limits.max_frame_weight == 0 ||
        limits.max_instructions_per_function == 0 || limits.max_control_nesting == 0 ||
        limits.max_memory_pages == 0 || limits.max_table_entries == 0 ||
        limits.max_imports == 0 || limits.max_exports == 0)
        throw std::invalid_argument{"dWasm limits must be positive"};

    const ModuleView mod{ast};
    ValidatedModule vm;

    auto section_offset = [&](SectionId id) -> size_t {
        for (const auto& s : ast.sections)
            if (s.id == id)
                return s.item_count_offset;
        return 0;
    };
    auto check_func_index = [&](uint32_t idx, size_t at) {
        if (idx >= mod.func_types.size())
            error(ErrorCode::InvalidIndex, at, "function index out of range");
    };

    // Type section.
    for (const auto& t : ast.types)
        check_float_type(t.type, limits, t.offset);

    // Import section.
    if (ast.imports.size() > limits.max_imports)
        error(ErrorCode::ImportCountExceeded, section_offset(SectionId::Import), "too many imports");
    {
        uint32_t func_index = 0;
        for (const auto& imp : ast.imports)
        {
            if (!is_valid_utf8(imp.module))
                error(ErrorCode::InvalidUtf8Identifier, imp.module_name_offset, "module name");
            if (!is_valid_utf8(imp.name))
                error(ErrorCode::InvalidUtf8Identifier, imp.item_name_offset, "item name");
            if (imp.kind == ExternalKind::Global)
            {
                if (!limits.allow_floats && is_float(imp.global.type))
                    error(ErrorCode::UnsupportedFeature, imp.offset, "floating-point global");
                continue;
            }
            if (imp.type_index >= ast.types.size())
                error(ErrorCode::InvalidIndex, imp.offset, "type index out of range");
            const auto& type = ast.types[imp.type_index].type;
            if (type.params.size() > limits.max_params)
                error(ErrorCode::ParamCountExceeded, imp.offset, "too many parameters");
            const auto match = recognize_checked_hook(imp.module, imp.name, type);
            if (match.status == HookRecognition::SignatureMismatch)
                error(ErrorCode::HookSignatureMismatch, imp.offset, "checked hook signature");
            if (match.status == HookRecognition::Hook)
                vm.checked_hooks.emplace(func_index, match.kind);
            ++func_index;
        }
    }

    // Function section.
    for (const auto& f : ast.functions)
        if (f.type_index >= ast.types.size())
            error(ErrorCode::InvalidIndex, f.offset, "type index out of range");

    // Table section.
    for (const auto& t : ast.tables)
    {
        check_limits(t.limits, t.offset);
        if (t.limits.min > limits.max_table_entries ||
            (t.limits.max && *t.limits.max > limits.max_table_entries))
            error(ErrorCode::TableSizeExceeded, t.offset, "table too large");
    }

    // Memory section.
    for (const auto& m : ast.memories)
    {
        check_limits(m.limits, m.offset);
        if (m.limits.min > kMaxWasmPages || (m.limits.max && *m.limits.max > kMaxWasmPages))
            error(ErrorCode::InvalidLimits, m.offset, "memory exceeds 4 GiB");
        if (m.limits.min > limits.max_memory_pages)
            error(ErrorCode::MemoryPagesExceeded, m.offset, "initial memory too large");
    }

    // Global section.
    for (const auto& g : ast.globals)
    {
        if (!limits.allow_floats && is_float(g.type.type))
            error(ErrorCode::UnsupportedFeature, g.offset, "floating-point global");
        if (g.init.kind == ConstExpr::Kind::Const && !limits.allow_floats && is_float(g.init.type))
            error(ErrorCode::UnsupportedFeature, g.init.offset, "floating-point constant");
        if (const_expr_type(g.init, mod, ast.num_imported_globals) != g.type.type)
            error(ErrorCode::TypeMismatch, g.init.offset, "initializer type");
    }

    // Export section.
    if (ast.exports.size() > limits.max_exports)
        error(ErrorCode::ExportCountExceeded, section_offset(SectionId::Export), "too many exports");
    for (size_t i = 0; i < ast.exports.size(); ++i)
    {
        const auto& e = ast.exports[i];
        if (!is_valid_utf8(e.name))
            error(ErrorCode::InvalidUtf8Identifier, e.offset, "export name");
        if (!vm.export_map.emplace(e.name, static_cast<uint32_t>(i)).second)
            error(ErrorCode::DuplicateExport, e.offset, "duplicate export name");
        switch (e.kind)
        {
        case ExternalKind::Function:
            check_func_index(e.index, e.offset);
            break;
        case ExternalKind::Table:
            if (e.index >= ast.tables.size())
                error(ErrorCode::InvalidIndex, e.offset, "table index out of range");
            break;
        case ExternalKind::Memory:
            if (e.index >= ast.memories.size())
                error(ErrorCode::InvalidIndex, e.offset, "memory index out of range");
            break;
        case ExternalKind::Global:
            if (e.index >= mod.globals.size())
                error(ErrorCode::InvalidIndex, e.offset, "global index out of range");
            if (mod.globals[e.index].is_mutable)
                error(ErrorCode::UnsupportedFeature, e.offset, "exported mutable global");
            break;
        }
    }

    // Start section.
    if (ast.start)
    {
        check_func_index(*ast.start, ast.start_offset);
        const auto& t = mod.type_of(*ast.start);
        if (!t.params.empty() || !t.results.empty())
            error(ErrorCode::TypeMismatch, ast.start_offset, "start function must be () -> ()");
    }

    // Element section.
    for (const auto& seg : ast.elements)
    {
        if (ast.tables.empty())
            error(ErrorCode::InvalidIndex, seg.offset, "no table");
        if (const_expr_type(seg.offset_expr, mod, ast.num_imported_globals) != ValType::i32)
            error(ErrorCode::TypeMismatch, seg.offset_expr.offset, "element offset must be i32");
        for (auto idx : seg.func_indices)
            check_func_index(idx, seg.offset);
    }

    // Code section: each function fully, in index order.
    vm.frame_weights.reserve(ast.functions.size());
    for (size_t i = 0; i < ast.functions.size(); ++i)
    {
        const auto& f = ast.functions[i];
        const auto& code = ast.codes[i];
        const auto& type = ast.types[f.type_index].type;
        if (type.params.size() > limits.max_params)
            error(ErrorCode::ParamCountExceeded, f.offset, "too many parameters");
        if (code.local_count > limits.max_locals)
            error(ErrorCode::LocalCountExceeded, code.offset, "too many locals");
        if (!limits.allow_floats)
            for (const auto& d : code.locals)
                if (is_float(d.type))
                    error(ErrorCode::UnsupportedFeature, code.offset, "floating-point local");

        auto locals = expand_locals(type, code);
        const auto declared = declared_weight(locals);
        BodyChecker checker{mod, type, std::move(locals), limits};
        const auto body = checker.run(code);
        const auto weight = declared + body.peak_weight;
        if (weight > limits.max_frame_weight)
            error(ErrorCode::FrameWeightExceeded, code.offset, "frame weight too large");
        vm.frame_weights.push_back(static_cast<uint32_t>(weight));
    }

    // Data section.
    for (const auto& seg : ast.data)
    {
        if (ast.memories.empty())
            error(ErrorCode::InvalidIndex, seg.offset, "no memory");
        if (const_expr_type(seg.offset_expr, mod, ast.num_imported_globals) != ValType::i32)
            error(ErrorCode::TypeMismatch, seg.offset_expr.offset, "data offset must be i32");
    }

    vm.canonical_type_ids.resize(ast.types.size());
    for (size_t i = 0; i < ast.types.size(); ++i)
    {
        size_t j = 0;
        while (ast.types[j].type != ast.types[i].type)
            ++j;
        vm.canonical_type_ids[i] = static_cast<uint32_t>(j);
    }

    vm.ast = std::move(ast);
    return vm;
}

std::shared_ptr<const ValidatedModule> load_module(
    std::span<const uint8_t> bytes, const DwasmLimits& limits)
{
    return std::make_shared<const ValidatedModule>(validate_dwasm(decode_module(bytes), limits));
}

uint32_t compute_frame_weight(const ModuleAST& ast, uint32_t defined_index)
{
    const ModuleView mod{ast};
    const auto& type = ast.types[ast.functions[defined_index].type_index].type;
    const auto& code = ast.codes[defined_index];
    DwasmLimits unlimited;
    unlimited.max_instructions_per_function = UINT32_MAX;
    unlimited.max_control_nesting = UINT32_MAX;
    auto locals = expand_locals(type, code);
    const auto declared = declared_weight(locals);
    BodyChecker checker{mod, type, std::move(locals), unlimited};
    return static_cast<uint32_t>(declared + checker.run(code).peak_weight);
}

}  // namespace detwasm
