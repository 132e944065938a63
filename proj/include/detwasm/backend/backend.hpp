// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/backend/code_memory.hpp"
#include "detwasm/dmir/dmir.hpp"
#include "detwasm/dmir/passes.hpp"
#include "detwasm/frontend/validator.hpp"
#include "detwasm/runtime/memory.hpp"
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace detwasm
{
enum class Tier : uint8_t
{
    Tier1_FLAT = 1,
    Tier2_FLAS = 2,
};

std::string_view to_string(Tier tier) noexcept;

struct BackendConfig
{
    BoundsStrategy bounds = BoundsStrategy::GuardPage;
    /// Passes run by FLAS before code generation.
    dmir::PassConfig passes;
    /// Largest artifact either tier may produce for one function.
    size_t max_code_bytes = size_t{16} << 20;
};

/// Artifact would exceed BackendConfig::max_code_bytes.
class ResourceLimit : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Immutable native code for one defined function.
struct ExecutableFunction
{
    uint32_t func_index = 0;
    Tier tier = Tier::Tier1_FLAT;
    const void* entry = nullptr;
    size_t code_size_bytes = 0;
    std::chrono::nanoseconds compile_time{0};
    CodeRegion code;
};

/// Single pass over metered dMIR; every virtual register lives in a stack slot.
std::unique_ptr<ExecutableFunction> compile_flat(
    const dmir::Function& f, const ValidatedModule& module, const BackendConfig& config);

/// Runs the dMIR passes on a copy of `f`, then allocates registers by linear
/// scan and generates code with folded compares and immediate operands.
std::unique_ptr<ExecutableFunction> compile_flas(
    const dmir::Function& f, const ValidatedModule& module, const BackendConfig& config);

/// One metrics record: `{"func_index":..,"tier":..,"compile_us":..,"code_size_bytes":..}`.
std::string metrics_json(const ExecutableFunction& fn);

}  // namespace detwasm
