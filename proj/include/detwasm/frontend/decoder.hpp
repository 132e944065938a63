// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/frontend/errors.hpp"
#include "detwasm/frontend/module.hpp"
#include <cstdint>
#include <span>

namespace detwasm
{
/// Decodes the binary structure of a module. Function bodies are kept as byte
/// ranges; their instructions are checked by validate_dwasm().
///
/// Throws ValidationError{MalformedModule} for bad magic/version, truncation,
/// non-canonical LEB128 encodings, misordered or oversized sections, and
/// non-zero reserved bytes; ValidationError{UnsupportedFeature} for post-MVP
/// encodings found in module-level sections.
ModuleAST decode_module(std::span<const uint8_t> bytes);

}  // namespace detwasm
