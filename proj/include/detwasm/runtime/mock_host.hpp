// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/runtime/host.hpp"

namespace detwasm
{
/// Deterministic host functions for tests and the command-line tool, all in
/// module `env`:
///   mix(i64, i64) -> i64    base gas 5; (a * 0x9e3779b97f4a7c15) ^ (b >> 3)
///   burn(i32) -> i32        base gas 1, plus (a mod 64) more; returns a * 3 + 1
///   fail(i32) -> i32        base gas 1; a host error when a is odd, else a
HostRegistry mock_host_registry();

}  // namespace detwasm
