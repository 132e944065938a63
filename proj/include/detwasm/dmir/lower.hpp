// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/dmir/dmir.hpp"
#include "detwasm/frontend/validator.hpp"

namespace detwasm::dmir
{
/// Lowers defined function `func_index` (an index into the full function index
/// space, imports first) into an unmetered dMIR function. Structured control
/// becomes an explicit CFG; operand-stack slots become virtual registers;
/// calls to recognized hook imports become CheckedArith.
Function lower_to_dmir(const ValidatedModule& module, uint32_t func_index);

}  // namespace detwasm::dmir
