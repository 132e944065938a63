// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/common/types.hpp"
#include "detwasm/frontend/leb128.hpp"
#include <cstdint>
#include <optional>
#include <vector>

namespace detwasm
{
/// One decoded body instruction with its immediates.
struct Instr
{
    uint8_t op = 0;
    size_t offset = 0;

    /// Label depth, function, local, global or type index depending on `op`.
    uint32_t index = 0;
    /// Block result type for block/loop/if.
    std::optional<ValType> block_type;
    /// br_table targets; `index` holds the default label.
    std::vector<uint32_t> targets;
    uint32_t align = 0;
    uint32_t mem_offset = 0;
    /// Constant bits for *.const (32-bit values zero-extended).
    uint64_t imm = 0;
};

/// Decodes the instruction at the reader position. Post-MVP opcodes raise
/// UnsupportedFeature, unknown opcodes and non-zero reserved bytes MalformedModule.
/// With `allow_floats` false every float opcode is UnsupportedFeature.
void decode_instr(ByteReader& r, Instr& out, bool allow_floats = true);

/// True for opcodes that mention f32/f64 in their type.
bool is_float_opcode(uint8_t op) noexcept;

}  // namespace detwasm
