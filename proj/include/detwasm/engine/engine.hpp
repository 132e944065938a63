// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/backend/backend.hpp"
#include "detwasm/dmir/dmir.hpp"
#include "detwasm/dmir/gas.hpp"
#include "detwasm/runtime/instance.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace detwasm
{
enum class ExecMode : uint8_t
{
    Interp,
    EagerFLAT,
    EagerFLAS,
    Lazy,
};

/// "interp", "flat", "flas", "lazy".
std::string_view to_string(ExecMode mode) noexcept;
std::optional<ExecMode> parse_mode(std::string_view name) noexcept;

/// Order in which background workers upgrade functions.
enum class CompilePriority : uint8_t
{
    Fifo,            ///< Ascending function index.
    SizeDescending,  ///< Largest function body (bytes) first; ties by index.
};

/// Function indices of the defined functions of `module`, in upgrade order.
std::vector<uint32_t> background_priority(
    const ValidatedModule& module, CompilePriority policy = CompilePriority::Fifo);

struct EngineConfig
{
    ExecMode mode = ExecMode::Lazy;
    BackendConfig backend;
    dmir::CostModel cost = dmir::CostModel::uniform();
    /// Background compile threads for Lazy mode. Defaults to one per CPU minus
    /// one, at least one. Zero starts no threads; queued upgrades then run only
    /// through pump_background().
    std::optional<unsigned> workers;
    CompilePriority priority = CompilePriority::Fifo;
    /// Test double: flips the low bit of every integer result in EagerFLAS mode.
    bool miscompile_for_testing = false;
};

struct EngineStats
{
    uint64_t stubs_resolved = 0;
    uint64_t background_compiled = 0;
    uint64_t switches = 0;
    /// Engine creation to the return of the first invocation.
    std::optional<uint64_t> latency_first_invoke_us;
    /// Background upgrade order chosen by the priority policy.
    std::vector<uint32_t> priority_order;
    /// Invocations by the tier of the invoked function's slot when entered:
    /// index 0 stub, 1 FLAT, 2 FLAS.
    std::array<uint64_t, 3> invokes_by_tier{};
};

/// `{"stubs_resolved":..,"background_compiled":..,"switches":..,"latency_first_invoke_us":..}`.
std::string to_json(const EngineStats& stats);

class Engine final : public Executor
{
public:
    Engine(std::shared_ptr<const ValidatedModule> module, const EngineConfig& config);
    ~Engine() override;
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    const ValidatedModule& module() const noexcept override { return *m_module; }
    const uintptr_t* entry_table() const noexcept override;
    std::optional<BoundsStrategy> required_memory_mode() const noexcept override;
    InvokeResult call(Instance& inst, uint32_t func_index, std::span<const Value> args) override;

    ExecMode mode() const noexcept { return m_config.mode; }
    const EngineConfig& config() const noexcept { return m_config; }

    /// Metered dMIR of the defined functions, by defined-function index.
    /// Lowers any function Lazy mode has not needed yet.
    std::span<const dmir::Function> functions() const;
    /// Metered dMIR of one defined function, lowered on first use.
    const dmir::Function& function(uint32_t func_index) const;

    /// Current tier of a defined function's slot; nullopt while it is a stub.
    std::optional<Tier> tier(uint32_t func_index) const;
    /// Artifacts currently published, one per compiled slot.
    std::vector<const ExecutableFunction*> published() const;

    /// Compiles a stubbed function at tier 1 and publishes it. Returns the
    /// entry now in the slot, which may be an artifact another caller won.
    const void* resolve_stub(uint32_t func_index);
    /// Publishes a tier-2 artifact. No-op (returns false) if already at tier 2.
    bool hot_switch(uint32_t func_index, std::unique_ptr<ExecutableFunction> tier2);
    /// Runs up to `max_jobs` queued upgrades on the calling thread.
    size_t pump_background(size_t max_jobs = SIZE_MAX);
    /// Cancels queued upgrades and waits for running ones. Idempotent.
    void shutdown();

    EngineStats stats() const;

private:
    friend std::unique_ptr<Engine> create_engine(
        std::shared_ptr<const ValidatedModule>, const EngineConfig&);

    uint32_t defined(uint32_t func_index) const noexcept
    {
        return func_index - m_module->num_imported_functions();
    }
    void build_stubs();
    void start_background();
    void worker_loop();
    bool run_one_job();
    void publish(uint32_t func_index, std::unique_ptr<ExecutableFunction> fn);

    std::shared_ptr<const ValidatedModule> m_module;
    EngineConfig m_config;
    std::chrono::steady_clock::time_point m_created;
    mutable std::vector<dmir::Function> m_functions;
    mutable std::unique_ptr<std::once_flag[]> m_lowered;

    std::unique_ptr<std::atomic<uintptr_t>[]> m_slots;
    std::unique_ptr<std::atomic<uint8_t>[]> m_tiers;
    CodeRegion m_stubs;
    std::vector<const void*> m_stub_entries;

    mutable std::mutex m_publish_mutex;
    std::vector<std::unique_ptr<ExecutableFunction>> m_artifacts;  ///< Every artifact ever published.
    std::vector<const ExecutableFunction*> m_current;

    std::mutex m_queue_mutex;
    std::condition_variable m_queue_cv;
    std::deque<uint32_t> m_queue;
    bool m_stopping = false;
    std::vector<std::thread> m_workers;
    std::vector<uint32_t> m_priority_order;

    std::atomic<uint64_t> m_stubs_resolved{0};
    std::atomic<uint64_t> m_background_compiled{0};
    std::atomic<uint64_t> m_switches{0};
    std::atomic<bool> m_first_invoke_done{false};
    std::atomic<uint64_t> m_latency_us{0};
    std::array<std::atomic<uint64_t>, 3> m_invokes_by_tier{};
};

/// Lowers and meters every defined function, then prepares slots per mode:
/// eager modes compile everything before returning; Lazy installs stubs and
/// starts background tier-2 compilation.
std::unique_ptr<Engine> create_engine(
    std::shared_ptr<const ValidatedModule> module, const EngineConfig& config = {});

}  // namespace detwasm
