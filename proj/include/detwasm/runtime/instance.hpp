// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/common/trap.hpp"
#include "detwasm/common/types.hpp"
#include "detwasm/frontend/validator.hpp"
#include "detwasm/runtime/host.hpp"
#include "detwasm/runtime/memory.hpp"
#include "detwasm/runtime/vmcontext.hpp"
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace detwasm
{
struct InstanceConfig
{
    BoundsStrategy memory_mode = BoundsStrategy::GuardPage;
    uint64_t gas_limit = 10'000'000'000;
    uint32_t max_depth = 1024;
    /// Weighted slots (4 bytes each): 2,097,152 slots is 8 MiB.
    uint64_t weight_budget = 2'097'152;
    /// Growth ceiling when the module declares no smaller maximum.
    uint32_t max_memory_pages = 4096;
};

/// Results of one invocation, or the trap that ended it.
struct InvokeResult
{
    std::vector<Value> values;
    std::optional<Trap> trap;

    bool ok() const noexcept { return !trap.has_value(); }
};

/// Caller error: unknown export, wrong arity or argument types. Not a trap.
class ApiMisuse : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

enum class InstantiationErrorKind : uint8_t
{
    UnresolvedImport,
    SignatureMismatch,
    SegmentOutOfBounds,
    StartTrap,
};

std::string_view to_string(InstantiationErrorKind kind) noexcept;

class InstantiationError : public std::runtime_error
{
public:
    InstantiationError(InstantiationErrorKind kind, const std::string& detail,
        std::optional<Trap> trap = std::nullopt)
      : std::runtime_error{detail}, m_kind{kind}, m_trap{trap}
    {}

    InstantiationErrorKind kind() const noexcept { return m_kind; }
    const std::optional<Trap>& trap() const noexcept { return m_trap; }

private:
    InstantiationErrorKind m_kind;
    std::optional<Trap> m_trap;
};

/// Runs functions of one module for instances. Implemented by the engine.
class Executor
{
public:
    virtual ~Executor() = default;
    virtual const ValidatedModule& module() const noexcept = 0;
    /// Entry table installed into each instance context; null when the
    /// executor does not run native code.
    virtual const uintptr_t* entry_table() const noexcept = 0;
    /// Bounds strategy instances must use, when generated code depends on it.
    virtual std::optional<BoundsStrategy> required_memory_mode() const noexcept
    {
        return std::nullopt;
    }
    /// Calls `func_index` with arguments already checked against its signature.
    virtual InvokeResult call(Instance& inst, uint32_t func_index, std::span<const Value> args) = 0;
};

/// A bound import: either a host function or an inline-compiled hook.
struct BoundImport
{
    const HostFunction* host = nullptr;
    std::optional<HookKind> hook;
};

class Instance
{
public:
    Instance(Executor& executor, const HostRegistry& registry, const InstanceConfig& config);
    ~Instance();
    Instance(const Instance&) = delete;
    Instance& operator=(const Instance&) = delete;

    const ValidatedModule& module() const noexcept { return m_executor.module(); }
    Executor& executor() const noexcept { return m_executor; }
    const InstanceConfig& config() const noexcept { return m_config; }

    VMContext& context() noexcept { return m_ctx; }
    const VMContext& context() const noexcept { return m_ctx; }

    LinearMemory* memory() const noexcept { return m_memory.get(); }
    /// Grows memory and refreshes the context; same contract as memory.grow.
    uint32_t memory_grow(uint32_t delta_pages);
    /// 64-bit FNV-1a over the accessible memory bytes (offset basis if none).
    uint64_t memory_hash() const noexcept;

    std::span<uint64_t> globals() noexcept { return m_globals; }
    std::span<const TableElement> table() const noexcept { return m_table; }
    const BoundImport& import(uint32_t func_index) const { return m_imports.at(func_index); }
    void* host_user_data() const noexcept { return m_user_data; }

    uint64_t gas_limit() const noexcept { return m_config.gas_limit; }
    uint64_t gas_remaining() const noexcept { return m_ctx.gas_remaining; }
    uint64_t gas_consumed() const noexcept { return m_config.gas_limit - m_ctx.gas_remaining; }
    /// Starts a fresh budget of `limit` units.
    void reset_gas(uint64_t limit) noexcept;

    /// Builds a trap record from the current gas state.
    Trap make_trap(TrapCode code, std::optional<uint64_t> detail = std::nullopt) const noexcept
    {
        return Trap{code, gas_consumed(), detail};
    }

private:
    friend std::unique_ptr<Instance> create_instance(
        Executor&, const HostRegistry&, const InstanceConfig&);

    Executor& m_executor;
    InstanceConfig m_config;
    VMContext m_ctx;
    std::unique_ptr<LinearMemory> m_memory;
    std::vector<uint64_t> m_globals;
    std::vector<TableElement> m_table;
    std::vector<BoundImport> m_imports;
    const HostLifecycle* m_lifecycle = nullptr;
    void* m_user_data = nullptr;
};

/// Resolves imports, allocates memory per mode, applies segments, initializes
/// globals and host context, then runs the start function under the gas limit.
std::unique_ptr<Instance> create_instance(
    Executor& executor, const HostRegistry& registry, const InstanceConfig& config = {});

/// Calls an exported function. Throws ApiMisuse on a bad name or arguments.
InvokeResult invoke(Instance& inst, std::string_view export_name, std::span<const Value> args);

/// Outcome of a host or hook import call made by guest code.
struct HostCallOutcome
{
    uint64_t result = 0;
    std::optional<TrapCode> trap;
};

/// Shared import dispatch used by every execution mode. Arguments and result
/// are raw bits; gas is taken from and returned to the instance context.
HostCallOutcome call_import(Instance& inst, uint32_t func_index, std::span<const uint64_t> args);

/// 64-bit FNV-1a.
uint64_t fnv1a64(std::span<const uint8_t> bytes) noexcept;

/// Trace line: `OK <v>... gas=<n> memhash=<hex64>` or `TRAP <code> gas=<n>`.
std::string trace_line(const InvokeResult& result, const Instance& inst);

}  // namespace detwasm
