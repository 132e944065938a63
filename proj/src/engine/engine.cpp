// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/engine/engine.hpp"
#include "detwasm/backend/native.hpp"
#include "detwasm/backend/x64_assembler.hpp"
#include "detwasm/dmir/lower.hpp"
#include "detwasm/engine/interpreter.hpp"

#include <pthread.h>
#include <sched.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>
#include <numeric>

namespace detwasm
{
namespace
{
const void* resolve_from_stub(VMContext* ctx, uint32_t func_index)
{
    auto* engine = static_cast<Engine*>(static_cast<Executor*>(ctx->engine));
    return engine->resolve_stub(func_index);
}

unsigned default_workers()
{
    const auto n = std::thread::hardware_concurrency();
    return n > 1 ? n - 1 : 1;
}

uint64_t elapsed_us(std::chrono::steady_clock::time_point since)
{
    return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - since).count());
}
}  // namespace

std::string_view to_string(ExecMode mode) noexcept
{
    switch (mode)
    {
    case ExecMode::Interp: return "interp";
    case ExecMode::EagerFLAT: return "flat";
    case ExecMode::EagerFLAS: return "flas";
    case ExecMode::Lazy: return "lazy";
    }
    return "?";
}

std::optional<ExecMode> parse_mode(std::string_view name) noexcept
{
    for (auto m : {ExecMode::Interp, ExecMode::EagerFLAT, ExecMode::EagerFLAS, ExecMode::Lazy})
        if (to_string(m) == name)
            return m;
    return std::nullopt;
}

std::vector<uint32_t> background_priority(const ValidatedModule& module, CompilePriority policy)
{
    const auto first = module.num_imported_functions();
    std::vector<uint32_t> order(module.ast.functions.size());
    std::iota(order.begin(), order.end(), first);
    if (policy == CompilePriority::SizeDescending)
    {
        std::vector<size_t> sizes(order.size());
        for (size_t i = 0; i < order.size(); ++i)
            sizes[i] = module.ast.codes[i].body_end - module.ast.codes[i].body_offset;
        std::stable_sort(order.begin(), order.end(),
            [&](uint32_t a, uint32_t b) { return sizes[a - first] > sizes[b - first]; });
    }
    return order;
}

std::string to_json(const EngineStats& s)
{
    return "{\"stubs_resolved\":" + std::to_string(s.stubs_resolved) +
           ",\"background_compiled\":" + std::to_string(s.background_compiled) +
           ",\"switches\":" + std::to_string(s.switches) + ",\"latency_first_invoke_us\":" +
           (s.latency_first_invoke_us ? std::to_string(*s.latency_first_invoke_us) : "null") + "}";
}

Engine::Engine(std::shared_ptr<const ValidatedModule> module, const EngineConfig& config)
  : m_module{std::move(module)}, m_config{config}, m_created{std::chrono::steady_clock::now()}
{
}

Engine::~Engine()
{
    shutdown();
}

const uintptr_t* Engine::entry_table() const noexcept
{
    static_assert(sizeof(std::atomic<uintptr_t>) == sizeof(uintptr_t));
    if (m_config.mode == ExecMode::Interp)
        return nullptr;
    return reinterpret_cast<const uintptr_t*>(m_slots.get());
}

std::optional<BoundsStrategy> Engine::required_memory_mode() const noexcept
{
    if (m_config.mode == ExecMode::Interp)
        return std::nullopt;
    return m_config.backend.bounds;
}

const dmir::Function& Engine::function(uint32_t func_index) const
{
    if (func_index < m_module->num_imported_functions() || func_index >= m_module->num_functions())
        throw std::out_of_range{"not a defined function index"};
    const auto d = defined(func_index);
    std::call_once(m_lowered[d], [&] {
        auto fn = dmir::lower_to_dmir(*m_module, func_index);
        dmir::insert_gas_metering(fn, m_config.cost);
        m_functions[d] = std::move(fn);
    });
    return m_functions[d];
}

std::span<const dmir::Function> Engine::functions() const
{
    for (uint32_t f = m_module->num_imported_functions(); f < m_module->num_functions(); ++f)
        function(f);
    return m_functions;
}

std::optional<Tier> Engine::tier(uint32_t func_index) const
{
    if (m_config.mode == ExecMode::Interp || func_index < m_module->num_imported_functions())
        return std::nullopt;
    const auto t = m_tiers[defined(func_index)].load(std::memory_order_acquire);
    if (t == 0)
        return std::nullopt;
    return static_cast<Tier>(t);
}

std::vector<const ExecutableFunction*> Engine::published() const
{
    std::lock_guard lock{m_publish_mutex};
    std::vector<const ExecutableFunction*> out;
    for (const auto* f : m_current)
        if (f != nullptr)
            out.push_back(f);
    return out;
}

void Engine::build_stubs()
{
    using namespace x64;
    const auto n = m_module->num_functions();
    const auto imports = m_module->num_imported_functions();
    Assembler a;
    std::vector<size_t> offsets(n);
    for (uint32_t i = 0; i < n; ++i)
    {
        a.align(16);
        offsets[i] = a.code().size();
        a.mov_imm(rax, i);
        a.mov_imm(rcx, reinterpret_cast<uint64_t>(i < imports ? host_thunk() : resolver_thunk()));
        a.jmp(rcx);
    }
    a.finish();
    m_stubs = CodeRegion{a.code()};
    m_stub_entries.resize(n);
    for (uint32_t i = 0; i < n; ++i)
        m_stub_entries[i] = m_stubs.data() + offsets[i];
}

void Engine::publish(uint32_t func_index, std::unique_ptr<ExecutableFunction> fn)
{
    const auto d = defined(func_index);
    m_current[d] = fn.get();
    m_slots[func_index].store(reinterpret_cast<uintptr_t>(fn->entry), std::memory_order_release);
    m_tiers[d].store(static_cast<uint8_t>(fn->tier), std::memory_order_release);
    m_artifacts.push_back(std::move(fn));
}

const void* Engine::resolve_stub(uint32_t func_index)
{
    const auto d = defined(func_index);
    if (m_tiers[d].load(std::memory_order_acquire) == 0)
    {
        auto fn = compile_flat(function(func_index), *m_module, m_config.backend);
        std::lock_guard lock{m_publish_mutex};
        if (m_tiers[d].load(std::memory_order_relaxed) == 0)
        {
            publish(func_index, std::move(fn));
            m_stubs_resolved.fetch_add(1, std::memory_order_relaxed);
        }
    }
    return reinterpret_cast<const void*>(m_slots[func_index].load(std::memory_order_acquire));
}

bool Engine::hot_switch(uint32_t func_index, std::unique_ptr<ExecutableFunction> tier2)
{
    const auto d = defined(func_index);
    std::lock_guard lock{m_publish_mutex};
    if (m_tiers[d].load(std::memory_order_relaxed) == static_cast<uint8_t>(Tier::Tier2_FLAS))
        return false;
    publish(func_index, std::move(tier2));
    m_switches.fetch_add(1, std::memory_order_relaxed);
    return true;
}

bool Engine::run_one_job()
{
    uint32_t func_index = 0;
    {
        std::lock_guard lock{m_queue_mutex};
        if (m_stopping || m_queue.empty())
            return false;
        func_index = m_queue.front();
        m_queue.pop_front();
    }
    const auto d = defined(func_index);
    if (m_tiers[d].load(std::memory_order_acquire) != static_cast<uint8_t>(Tier::Tier2_FLAS))
        hot_switch(func_index, compile_flas(function(func_index), *m_module, m_config.backend));
    m_background_compiled.fetch_add(1, std::memory_order_relaxed);
    return true;
}

size_t Engine::pump_background(size_t max_jobs)
{
    size_t done = 0;
    while (done < max_jobs && run_one_job())
        ++done;
    return done;
}

void Engine::worker_loop()
{
    // Upgrades only use otherwise idle CPU time.
    sched_param param{};
    pthread_setschedparam(pthread_self(), SCHED_IDLE, &param);
    while (true)
    {
        {
            std::unique_lock lock{m_queue_mutex};
            m_queue_cv.wait(lock, [&] { return m_stopping || !m_queue.empty(); });
            if (m_stopping)
                return;
        }
        run_one_job();
    }
}

void Engine::start_background()
{
    m_priority_order = background_priority(*m_module, m_config.priority);
    m_queue.assign(m_priority_order.begin(), m_priority_order.end());
    // Decided before the first worker can touch the queue.
    const auto n = m_queue.empty() ? 0u : m_config.workers.value_or(default_workers());
    for (unsigned i = 0; i < n; ++i)
        m_workers.emplace_back([this] { worker_loop(); });
}

void Engine::shutdown()
{
    {
        std::lock_guard lock{m_queue_mutex};
        m_stopping = true;
        m_queue.clear();
    }
    m_queue_cv.notify_all();
    for (auto& t : m_workers)
        t.join();
    m_workers.clear();
}

EngineStats Engine::stats() const
{
    EngineStats s;
    s.stubs_resolved = m_stubs_resolved.load();
    s.background_compiled = m_background_compiled.load();
    s.switches = m_switches.load();
    if (m_first_invoke_done.load())
        s.latency_first_invoke_us = m_latency_us.load();
    s.priority_order = m_priority_order;
    for (size_t i = 0; i < s.invokes_by_tier.size(); ++i)
        s.invokes_by_tier[i] = m_invokes_by_tier[i].load();
    return s;
}

InvokeResult Engine::call(Instance& inst, uint32_t func_index, std::span<const Value> args)
{
    std::vector<uint64_t> raw(args.size());
    for (size_t i = 0; i < args.size(); ++i)
        raw[i] = args[i].bits;

    uint64_t value = 0;
    std::optional<Trap> trap;
    if (func_index < m_module->num_imported_functions())
    {
        const auto out = call_import(inst, func_index, raw);
        value = out.result;
        if (out.trap)
            trap = inst.make_trap(*out.trap);
    }
    else if (m_config.mode == ExecMode::Interp)
    {
        auto r = interpret(inst, m_functions, func_index, raw);  // all lowered at creation
        value = r.value;
        trap = r.trap;
    }
    else
    {
        const auto t = m_tiers[defined(func_index)].load(std::memory_order_acquire);
        m_invokes_by_tier[t].fetch_add(1, std::memory_order_relaxed);
        const auto* entry =
            reinterpret_cast<const void*>(m_slots[func_index].load(std::memory_order_acquire));
        auto r = run_native(inst, entry, raw);
        value = r.value;
        trap = r.trap;
    }

    if (!m_first_invoke_done.load(std::memory_order_relaxed))
    {
        m_latency_us.store(elapsed_us(m_created));
        m_first_invoke_done.store(true);
    }

    InvokeResult result;
    result.trap = trap;
    if (!trap)
    {
        const auto& sig = m_module->func_type(func_index);
        for (auto t : sig.results)
        {
            auto bits = normalize_bits(t, value);
            if (m_config.miscompile_for_testing && m_config.mode == ExecMode::EagerFLAS &&
                !is_float(t))
                bits ^= 1;
            result.values.push_back(Value{t, bits});
        }
    }
    return result;
}

std::unique_ptr<Engine> create_engine(
    std::shared_ptr<const ValidatedModule> module, const EngineConfig& config)
{
    auto engine = std::unique_ptr<Engine>{new Engine{std::move(module), config}};
    auto& e = *engine;
    const auto& mod = *e.m_module;
    const auto imports = mod.num_imported_functions();
    const auto n = mod.num_functions();

    // Lazy mode lowers each function when it is first compiled.
    e.m_functions.resize(n - imports);
    e.m_lowered = std::make_unique<std::once_flag[]>(n - imports);
    if (config.mode != ExecMode::Lazy)
        e.functions();
    if (config.mode == ExecMode::Interp)
        return engine;

    set_stub_resolver(&resolve_from_stub);
    e.build_stubs();
    e.m_slots = std::make_unique<std::atomic<uintptr_t>[]>(n);
    e.m_tiers = std::make_unique<std::atomic<uint8_t>[]>(n - imports);
    e.m_current.assign(n - imports, nullptr);
    for (uint32_t f = 0; f < n; ++f)
        e.m_slots[f].store(reinterpret_cast<uintptr_t>(e.m_stub_entries[f]));
    for (uint32_t d = 0; d < n - imports; ++d)
        e.m_tiers[d].store(0);

    if (config.mode == ExecMode::Lazy)
    {
        e.start_background();
        return engine;
    }
    const bool flas = config.mode == ExecMode::EagerFLAS;
    for (uint32_t f = imports; f < n; ++f)
    {
        const auto& fn = e.function(f);
        e.publish(f, flas ? compile_flas(fn, mod, config.backend) :
                            compile_flat(fn, mod, config.backend));
    }
    return engine;
}

}  // namespace detwasm
