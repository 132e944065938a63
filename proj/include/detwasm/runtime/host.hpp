// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/common/types.hpp"
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>

namespace detwasm
{
class Instance;

/// What a host callable hands back to the guest.
enum class HostStatus : uint8_t
{
    Ok,
    Error,         ///< Surfaces as Trap{HostError}.
    GasExhausted,  ///< Surfaces as Trap{GasExhausted}; remaining gas is zero.
};

/// View of the calling instance given to host callables.
class HostContext
{
public:
    explicit HostContext(Instance& inst) noexcept : m_inst{inst} {}

    Instance& instance() const noexcept { return m_inst; }
    uint64_t gas_remaining() const noexcept;
    /// Charges `amount`. When fewer units remain, drains the counter to zero and
    /// returns false; the callable should then return HostStatus::GasExhausted.
    bool consume_gas(uint64_t amount) noexcept;
    /// Accessible linear memory (empty if the module has none).
    std::span<uint8_t> memory() const noexcept;
    /// The per-instance handle created by the registry's init callback.
    void* user_data() const noexcept;

private:
    Instance& m_inst;
};

using HostCallable =
    std::function<HostStatus(HostContext&, std::span<const Value> args, std::span<Value> results)>;

struct HostFunction
{
    FuncType signature;
    /// Charged before the callable runs.
    uint64_t base_gas = 0;
    HostCallable callable;
};

struct HostLifecycle
{
    std::function<void*(Instance&)> init;
    std::function<void(void*)> destroy;
};

/// Binds (module, name) imports to native implementations. Immutable once an
/// engine or instance uses it.
class HostRegistry
{
public:
    void add_function(std::string module, std::string name, HostFunction fn);
    void add_global(std::string module, std::string name, Value value);
    void set_lifecycle(HostLifecycle lifecycle) { m_lifecycle = std::move(lifecycle); }

    const HostFunction* find_function(const std::string& module, const std::string& name) const;
    std::optional<Value> find_global(const std::string& module, const std::string& name) const;
    const HostLifecycle& lifecycle() const noexcept { return m_lifecycle; }

private:
    std::map<std::pair<std::string, std::string>, HostFunction> m_functions;
    std::map<std::pair<std::string, std::string>, Value> m_globals;
    HostLifecycle m_lifecycle;
};

}  // namespace detwasm
