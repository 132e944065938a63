// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/dmir/dmir.hpp"

namespace detwasm::dmir
{
struct PassConfig
{
    bool constant_folding = true;
    bool dead_code_elimination = true;
    bool block_merging = true;
    /// Merge gas charges within one block across effect-free instructions.
    bool gas_coalescing = true;
};

/// Runs the enabled passes to a fixpoint. Results, traps and gas are unchanged;
/// gas charges are never duplicated, reordered with effects, or split.
void run_passes(Function& f, const PassConfig& config = {});

}  // namespace detwasm::dmir
