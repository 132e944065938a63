// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/dmir/hooks.hpp"
#include "detwasm/frontend/errors.hpp"
#include "detwasm/frontend/module.hpp"
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace detwasm
{
/// Static determinism limits. The first five defaults are the dWasm values;
/// the remaining four are configuration.
struct DwasmLimits
{
    uint32_t max_params = 1024;
    uint32_t max_locals = 10240;
    uint32_t max_frame_weight = 40960;
    uint32_t max_instructions_per_function = 10240;
    uint32_t max_control_nesting = 1024;
    uint32_t max_memory_pages = 4096;
    uint32_t max_table_entries = 65536;
    uint32_t max_imports = 1024;
    uint32_t max_exports = 1024;

    /// When false, any floating-point type or instruction is rejected as UnsupportedFeature.
    bool allow_floats = true;
};

/// A module that passed every dWasm check, with per-function static metadata.
struct ValidatedModule
{
    ModuleAST ast;

    /// Weighted frame size for each defined function (indexed by defined-function index).
    std::vector<uint32_t> frame_weights;

    /// Recognized checked-arithmetic hooks keyed by function index of the import.
    std::map<uint32_t, HookKind> checked_hooks;

    /// For each type index: index of the first structurally equal type, used as
    /// the canonical signature id for call_indirect checks.
    std::vector<uint32_t> canonical_type_ids;

    std::unordered_map<std::string, uint32_t> export_map;  ///< Name -> index into ast.exports.

    uint32_t num_functions() const noexcept
    {
        return ast.num_imported_functions + static_cast<uint32_t>(ast.functions.size());
    }
    uint32_t num_imported_functions() const noexcept { return ast.num_imported_functions; }
    bool is_imported_function(uint32_t func_index) const noexcept
    {
        return func_index < ast.num_imported_functions;
    }
    uint32_t type_index_of(uint32_t func_index) const noexcept;
    const FuncType& func_type(uint32_t func_index) const noexcept
    {
        return ast.types[type_index_of(func_index)].type;
    }
    const Import& imported_function(uint32_t func_index) const;
    std::optional<HookKind> hook_for(uint32_t func_index) const;
    ValType global_type(uint32_t global_index) const noexcept;
    bool global_is_mutable(uint32_t global_index) const noexcept;
    uint32_t num_globals() const noexcept
    {
        return ast.num_imported_globals + static_cast<uint32_t>(ast.globals.size());
    }
    const Export* find_export(const std::string& name) const;
};

/// Runs standard MVP validation plus the dWasm limits in a fixed order:
/// module sections in binary order, items in index order, function bodies in
/// instruction order. Within one function: parameter count, local count,
/// then the body walk (instruction count and nesting before type rules at each
/// opcode), then frame weight. Throws the first ValidationError encountered.
ValidatedModule validate_dwasm(ModuleAST ast, const DwasmLimits& limits = {});

/// Convenience: decode_module() followed by validate_dwasm().
std::shared_ptr<const ValidatedModule> load_module(
    std::span<const uint8_t> bytes, const DwasmLimits& limits = {});

/// Weighted frame size of defined function `defined_index`: params + locals +
/// peak weighted operand-stack depth over all program points.
uint32_t compute_frame_weight(const ModuleAST& ast, uint32_t defined_index);

}  // namespace detwasm
