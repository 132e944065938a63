// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Native calling convention of generated code:
//   r15 = VMContext*, r14 = linear memory base, rbx = remaining gas,
//   rbp = frame pointer. Arguments are passed on the stack (argument i at
//   [rsp + 8*i] at the call, [rbp + 16 + 8*i] in the callee), the result is
//   returned in rax. 32-bit values are zero-extended to 64 bits. rbx, rbp,
//   r12-r15 are preserved; everything else is clobbered by calls.

#include "detwasm/common/trap.hpp"
#include "detwasm/runtime/instance.hpp"
#include "detwasm/runtime/vmcontext.hpp"
#include <cstdint>
#include <optional>
#include <span>

namespace detwasm
{
struct NativeResult
{
    uint64_t value = 0;
    std::optional<Trap> trap;
};

/// Calls native function `entry` for `inst` with raw argument bits. Traps from
/// generated code, helpers and guard-page faults unwind back here; the call
/// stack accounting is restored in either outcome.
NativeResult run_native(Instance& inst, const void* entry, std::span<const uint64_t> args);

/// Entered by lazy stubs with eax = function index. Resolves the slot and
/// continues into the compiled entry as if it had been called directly.
const void* resolver_thunk();

/// Entered by import stubs with eax = function index; dispatches to the host.
const void* host_thunk();

using StubResolver = const void* (*)(VMContext* ctx, uint32_t func_index);

/// Installs the function the resolver thunk calls. Set once by the engine.
void set_stub_resolver(StubResolver fn) noexcept;

/// True while the current thread runs generated code (not host or compiler code).
bool in_guest_code() noexcept;

/// Installs the process-wide access-fault handler (idempotent).
void install_fault_handler();

}  // namespace detwasm

extern "C" {
/// Ends the current native invocation with a trap. Never returns.
[[noreturn]] void detwasm_raise_trap(
    detwasm::VMContext* ctx, uint32_t code, uint64_t detail, uint64_t gas);
uint64_t detwasm_host_call(detwasm::VMContext* ctx, uint32_t func_index, const uint64_t* args);
uint32_t detwasm_memory_grow(detwasm::VMContext* ctx, uint32_t delta);
const void* detwasm_resolve(detwasm::VMContext* ctx, uint32_t func_index);
}
