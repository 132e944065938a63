// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/common/types.hpp"
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace detwasm
{
enum class ExternalKind : uint8_t
{
    Function = 0,
    Table = 1,
    Memory = 2,
    Global = 3,
};

struct Limits
{
    uint32_t min = 0;
    std::optional<uint32_t> max;
};

struct GlobalType
{
    ValType type = ValType::i32;
    bool is_mutable = false;
};

/// A constant initializer expression (MVP: one const or global.get, then `end`).
struct ConstExpr
{
    enum class Kind : uint8_t
    {
        Const,
        GlobalGet,
    };
    Kind kind = Kind::Const;
    ValType type = ValType::i32;  ///< Type of the constant (Const only).
    uint64_t bits = 0;            ///< Constant bits, or global index for GlobalGet.
    size_t offset = 0;
};

struct TypeEntry
{
    FuncType type;
    size_t offset = 0;
};

struct Import
{
    std::string module;
    std::string name;
    ExternalKind kind = ExternalKind::Function;
    uint32_t type_index = 0;  ///< Function imports.
    GlobalType global;        ///< Global imports.
    size_t offset = 0;
    size_t module_name_offset = 0;
    size_t item_name_offset = 0;
};

struct FunctionEntry
{
    uint32_t type_index = 0;
    size_t offset = 0;  ///< Offset of the type-use in the function section.
};

struct TableEntry
{
    Limits limits;
    size_t offset = 0;
};

struct MemoryEntry
{
    Limits limits;
    size_t offset = 0;
};

struct GlobalEntry
{
    GlobalType type;
    ConstExpr init;
    size_t offset = 0;
};

struct Export
{
    std::string name;
    ExternalKind kind = ExternalKind::Function;
    uint32_t index = 0;
    size_t offset = 0;
};

struct ElementSegment
{
    uint32_t table_index = 0;
    ConstExpr offset_expr;
    std::vector<uint32_t> func_indices;
    size_t offset = 0;
};

struct DataSegment
{
    uint32_t memory_index = 0;
    ConstExpr offset_expr;
    size_t data_offset = 0;  ///< Position of the payload in the module bytes.
    size_t data_size = 0;
    size_t offset = 0;
};

struct LocalDecl
{
    uint32_t count = 0;
    ValType type = ValType::i32;
};

struct CodeEntry
{
    std::vector<LocalDecl> locals;
    uint64_t local_count = 0;  ///< Sum of all declaration counts (may exceed limits).
    size_t offset = 0;         ///< Start of the entry (its size field).
    size_t body_offset = 0;    ///< First instruction byte.
    size_t body_end = 0;       ///< One past the final `end`.
};

/// The section a module-level item was decoded from, in binary order.
enum class SectionId : uint8_t
{
    Custom = 0,
    Type = 1,
    Import = 2,
    Function = 3,
    Table = 4,
    Memory = 5,
    Global = 6,
    Export = 7,
    Start = 8,
    Element = 9,
    Code = 10,
    Data = 11,
};

struct SectionInfo
{
    SectionId id = SectionId::Custom;
    size_t offset = 0;  ///< Offset of the section id byte.
    size_t size = 0;
    size_t item_count_offset = 0;
};

/// Decoded module. Items keep their byte offsets so validation can report the
/// first violation deterministically.
struct ModuleAST
{
    std::vector<uint8_t> bytes;
    std::vector<SectionInfo> sections;  ///< Non-custom sections in binary order.

    std::vector<TypeEntry> types;
    std::vector<Import> imports;
    std::vector<FunctionEntry> functions;
    std::vector<TableEntry> tables;
    std::vector<MemoryEntry> memories;
    std::vector<GlobalEntry> globals;
    std::vector<Export> exports;
    std::optional<uint32_t> start;
    size_t start_offset = 0;
    std::vector<ElementSegment> elements;
    std::vector<CodeEntry> codes;
    std::vector<DataSegment> data;

    uint32_t num_imported_functions = 0;
    uint32_t num_imported_globals = 0;

    std::span<const uint8_t> body(const CodeEntry& code) const noexcept
    {
        return std::span{bytes}.subspan(code.body_offset, code.body_end - code.body_offset);
    }
};

}  // namespace detwasm
