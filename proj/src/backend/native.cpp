// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/backend/native.hpp"
#include "detwasm/backend/code_memory.hpp"
#include "detwasm/backend/x64_assembler.hpp"

#include <atomic>
#include <csetjmp>
#include <csignal>
#include <mutex>
#include <new>
#include <pthread.h>
#include <sys/mman.h>
#include <ucontext.h>

#if defined(__SANITIZE_ADDRESS__) || defined(__SANITIZE_THREAD__)
#define DETWASM_SANITIZED 1
#elif defined(__has_feature)
#if __has_feature(address_sanitizer) || __has_feature(thread_sanitizer)
#define DETWASM_SANITIZED 1
#endif
#endif

namespace detwasm
{
namespace
{
#ifdef DETWASM_SANITIZED
// Sanitizers track the thread stack; guest code stays on it.
constexpr bool kSwitchStacks = false;
#else
constexpr bool kSwitchStacks = true;
#endif

constexpr size_t kGuestStackSize = size_t{1} << 30;
/// Headroom below the deepest guest frame for helpers, the resolver and signal delivery.
constexpr size_t kStackMargin = size_t{1} << 20;

struct Activation
{
    sigjmp_buf env;
    VMContext* ctx = nullptr;
    const LinearMemory* memory = nullptr;
    Activation* prev = nullptr;
    TrapCode code = TrapCode::Unreachable;
    uint64_t detail = 0;
    volatile bool in_guest = false;
};

thread_local Activation* t_active = nullptr;
std::atomic<StubResolver> g_resolver{nullptr};
struct sigaction g_previous_segv;

/// Lazily mapped stack for guest code: deep recursion limits depend only on
/// the configured depth and weight budget, not on the host thread's stack.
struct GuestStack
{
    uint8_t* base = nullptr;

    ~GuestStack()
    {
        if (base != nullptr)
            ::munmap(base, kGuestStackSize);
    }

    uint8_t* top()
    {
        if (base == nullptr)
        {
            void* p = ::mmap(nullptr, kGuestStackSize, PROT_READ | PROT_WRITE,
                MAP_PRIVATE | MAP_ANONYMOUS | MAP_NORESERVE | MAP_STACK, -1, 0);
            if (p == MAP_FAILED)
                throw std::bad_alloc{};
            base = static_cast<uint8_t*>(p);
            ::mprotect(base, 4096, PROT_NONE);
        }
        return base + kGuestStackSize;
    }
};

thread_local GuestStack t_guest_stack;

uintptr_t host_stack_limit()
{
    thread_local uintptr_t limit = [] {
        pthread_attr_t attr;
        void* addr = nullptr;
        size_t size = 0;
        if (::pthread_getattr_np(::pthread_self(), &attr) == 0)
        {
            ::pthread_attr_getstack(&attr, &addr, &size);
            ::pthread_attr_destroy(&attr);
        }
        return reinterpret_cast<uintptr_t>(addr) + kStackMargin;
    }();
    return limit;
}

void fault_handler(int sig, siginfo_t* info, void* ucontext)
{
    auto* act = t_active;
    if (act != nullptr && act->in_guest && act->memory != nullptr &&
        act->memory->is_guard_address(info->si_addr))
    {
        const auto* uc = static_cast<ucontext_t*>(ucontext);
        act->code = TrapCode::MemoryAccessOutOfBounds;
        act->detail = static_cast<uint64_t>(uc->uc_mcontext.gregs[REG_RAX]);
        act->ctx->gas_remaining = static_cast<uint64_t>(uc->uc_mcontext.gregs[REG_RBX]);
        act->in_guest = false;
        siglongjmp(act->env, 1);
    }

    // Not a guest access: hand over to whoever was installed before us.
    const auto& prev = g_previous_segv;
    if ((prev.sa_flags & SA_SIGINFO) != 0 && prev.sa_sigaction != nullptr)
    {
        prev.sa_sigaction(sig, info, ucontext);
        return;
    }
    if (prev.sa_handler != SIG_DFL && prev.sa_handler != SIG_IGN && prev.sa_handler != nullptr)
    {
        prev.sa_handler(sig);
        return;
    }
    // Restore the default action; the faulting instruction re-executes and
    // terminates the process.
    ::signal(sig, SIG_DFL);
}

using EntryThunk = uint64_t (*)(
    VMContext* ctx, const void* fn, const uint64_t* args, uint64_t nargs, void* stack_top);

struct Thunks
{
    CodeRegion region;
    EntryThunk entry = nullptr;
    const void* resolver = nullptr;
    const void* host = nullptr;
};

const Thunks& thunks()
{
    static const Thunks t = [] {
        using namespace x64;
        Assembler a;

        // entry(ctx=rdi, fn=rsi, args=rdx, nargs=rcx, stack_top=r8)
        const auto entry = a.size();
        a.push(rbp);
        a.mov(8, rbp, rsp);
        a.push(rbx);
        a.push(r12);
        a.push(r13);
        a.push(r14);
        a.push(r15);
        a.alu_imm(Alu::Sub, 8, rsp, 8);
        a.mov(8, r15, rdi);
        auto same_stack = a.new_label();
        a.test(8, r8, r8);
        a.jcc(kE, same_stack);
        a.mov(8, rsp, r8);
        a.bind(same_stack);
        a.lea(rax, Mem{kNoGp, rcx, 3, 15});
        a.alu_imm(Alu::And, 8, rax, -16);
        a.alu(Alu::Sub, 8, rsp, rax);
        auto copy = a.new_label(), copied = a.new_label();
        a.alu(Alu::Xor, 4, r9, r9);
        a.bind(copy);
        a.alu(Alu::Cmp, 8, r9, rcx);
        a.jcc(kAE, copied);
        a.mov(8, r10, ptr(rdx, r9, 3));
        a.mov(8, ptr(rsp, r9, 3), r10);
        a.alu_imm(Alu::Add, 8, r9, 1);
        a.jmp(copy);
        a.bind(copied);
        a.mov(8, rbx, ptr(r15, vmctx::kGasRemaining));
        a.mov(8, r14, ptr(r15, vmctx::kMemoryBase));
        a.call(rsi);
        a.mov(8, ptr(r15, vmctx::kGasRemaining), rbx);
        a.lea(rsp, ptr(rbp, -40));
        a.pop(r15);
        a.pop(r14);
        a.pop(r13);
        a.pop(r12);
        a.pop(rbx);
        a.pop(rbp);
        a.ret();

        // resolver: eax = function index, caller's arguments untouched on the stack.
        a.align(16);
        const auto resolver = a.size();
        a.push(rbp);
        a.mov(8, rbp, rsp);
        a.mov(8, ptr(r15, vmctx::kGasRemaining), rbx);
        a.mov(8, rdi, r15);
        a.mov(4, rsi, rax);
        a.mov_imm(rax, reinterpret_cast<uint64_t>(&detwasm_resolve));
        a.call(rax);
        a.mov(8, rbx, ptr(r15, vmctx::kGasRemaining));
        a.mov(8, r14, ptr(r15, vmctx::kMemoryBase));
        a.pop(rbp);
        a.jmp(rax);

        // host: eax = function index; arguments at [rbp + 16].
        a.align(16);
        const auto host = a.size();
        a.push(rbp);
        a.mov(8, rbp, rsp);
        a.mov(8, ptr(r15, vmctx::kGasRemaining), rbx);
        a.mov(8, rdi, r15);
        a.mov(4, rsi, rax);
        a.lea(rdx, ptr(rbp, 16));
        a.mov_imm(rax, reinterpret_cast<uint64_t>(&detwasm_host_call));
        a.call(rax);
        a.mov(8, rbx, ptr(r15, vmctx::kGasRemaining));
        a.mov(8, r14, ptr(r15, vmctx::kMemoryBase));
        a.pop(rbp);
        a.ret();

        a.finish();
        Thunks t;
        t.region = CodeRegion{a.code()};
        t.entry = reinterpret_cast<EntryThunk>(t.region.data() + entry);
        t.resolver = t.region.data() + resolver;
        t.host = t.region.data() + host;
        return t;
    }();
    return t;
}
}  // namespace

void install_fault_handler()
{
    static std::once_flag once;
    std::call_once(once, [] {
        struct sigaction sa{};
        sa.sa_sigaction = fault_handler;
        sa.sa_flags = SA_SIGINFO | SA_NODEFER | SA_ONSTACK;
        sigemptyset(&sa.sa_mask);
        ::sigaction(SIGSEGV, &sa, &g_previous_segv);
    });
}

void set_stub_resolver(StubResolver fn) noexcept
{
    g_resolver.store(fn);
}

bool in_guest_code() noexcept
{
    return t_active != nullptr && t_active->in_guest;
}

const void* resolver_thunk()
{
    return thunks().resolver;
}

const void* host_thunk()
{
    return thunks().host;
}

NativeResult run_native(Instance& inst, const void* entry, std::span<const uint64_t> args)
{
    install_fault_handler();
    const auto& t = thunks();
    auto& ctx = inst.context();

    Activation act;
    act.ctx = &ctx;
    act.memory = inst.memory();
    act.prev = t_active;
    const auto depth = ctx.depth;
    const auto weight = ctx.weight_used;
    const auto limit = ctx.stack_limit;

    void* top = nullptr;
    if (act.prev != nullptr)
        ;  // Nested call: stay on the current stack with the current limit.
    else if (kSwitchStacks)
    {
        top = t_guest_stack.top();
        ctx.stack_limit = reinterpret_cast<uintptr_t>(t_guest_stack.base) + kStackMargin;
    }
    else
        ctx.stack_limit = host_stack_limit();

    NativeResult r;
    t_active = &act;
    if (sigsetjmp(act.env, 0) == 0)
    {
        act.in_guest = true;
        r.value = t.entry(&ctx, entry, args.data(), args.size(), top);
        act.in_guest = false;
    }
    else
    {
        const auto code = act.code;
        r.trap = inst.make_trap(code, trap_has_detail(code) ? std::optional{act.detail} : std::nullopt);
        ctx.depth = depth;
        ctx.weight_used = weight;
    }
    t_active = act.prev;
    ctx.stack_limit = limit;
    return r;
}

}  // namespace detwasm

using namespace detwasm;

extern "C" void detwasm_raise_trap(VMContext* ctx, uint32_t code, uint64_t detail, uint64_t gas)
{
    auto* act = t_active;
    const auto c = static_cast<TrapCode>(code);
    ctx->gas_remaining = c == TrapCode::GasExhausted ? 0 : gas;
    act->code = c;
    act->detail = detail;
    act->in_guest = false;
    siglongjmp(act->env, 1);
}

extern "C" uint64_t detwasm_host_call(VMContext* ctx, uint32_t func_index, const uint64_t* args)
{
    auto* act = t_active;
    act->in_guest = false;
    HostCallOutcome out;
    {
        auto& inst = *ctx->instance;
        const auto n = inst.module().func_type(func_index).params.size();
        out = call_import(inst, func_index, {args, n});
    }
    if (out.trap)
        detwasm_raise_trap(ctx, static_cast<uint32_t>(*out.trap), 0, ctx->gas_remaining);
    act->in_guest = true;
    return out.result;
}

extern "C" uint32_t detwasm_memory_grow(VMContext* ctx, uint32_t delta)
{
    auto* act = t_active;
    act->in_guest = false;
    const auto r = ctx->instance->memory_grow(delta);
    act->in_guest = true;
    return r;
}

extern "C" const void* detwasm_resolve(VMContext* ctx, uint32_t func_index)
{
    auto* act = t_active;
    act->in_guest = false;
    const auto* entry = g_resolver.load()(ctx, func_index);
    act->in_guest = true;
    return entry;
}
