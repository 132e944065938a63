// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/runtime/host.hpp"
#include "detwasm/runtime/instance.hpp"

namespace detwasm
{
uint64_t HostContext::gas_remaining() const noexcept
{
    return m_inst.context().gas_remaining;
}

bool HostContext::consume_gas(uint64_t amount) noexcept
{
    auto& gas = m_inst.context().gas_remaining;
    if (amount > gas)
    {
        gas = 0;
        return false;
    }
    gas -= amount;
    return true;
}

std::span<uint8_t> HostContext::memory() const noexcept
{
    auto* mem = m_inst.memory();
    return mem ? mem->bytes() : std::span<uint8_t>{};
}

void* HostContext::user_data() const noexcept
{
    return m_inst.host_user_data();
}

void HostRegistry::add_function(std::string module, std::string name, HostFunction fn)
{
    m_functions.insert_or_assign({std::move(module), std::move(name)}, std::move(fn));
}

void HostRegistry::add_global(std::string module, std::string name, Value value)
{
    m_globals.insert_or_assign({std::move(module), std::move(name)}, value);
}

const HostFunction* HostRegistry::find_function(
    const std::string& module, const std::string& name) const
{
    const auto it = m_functions.find({module, name});
    return it == m_functions.end() ? nullptr : &it->second;
}

std::optional<Value> HostRegistry::find_global(
    const std::string& module, const std::string& name) const
{
    const auto it = m_globals.find({module, name});
    if (it == m_globals.end())
        return std::nullopt;
    return it->second;
}

}  // namespace detwasm
