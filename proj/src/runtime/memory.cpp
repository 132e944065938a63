// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/runtime/memory.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string_view>
#include <sys/mman.h>

namespace detwasm
{
std::string_view to_string(BoundsStrategy s) noexcept
{
    return s == BoundsStrategy::GuardPage ? "guard" : "software";
}

LinearMemory::LinearMemory(BoundsStrategy mode, uint32_t initial_pages, uint32_t max_pages)
  : m_mode{mode}, m_max_pages{max_pages}
{
    if (initial_pages > max_pages)
        throw std::bad_alloc{};
    if (mode == BoundsStrategy::GuardPage)
    {
        void* p = ::mmap(nullptr, kReservationSize, PROT_NONE,
            MAP_PRIVATE | MAP_ANONYMOUS | MAP_NORESERVE, -1, 0);
        if (p == MAP_FAILED)
            throw std::bad_alloc{};
        m_base = static_cast<uint8_t*>(p);
        if (initial_pages != 0 &&
            ::mprotect(m_base, uint64_t{initial_pages} * kPageSize, PROT_READ | PROT_WRITE) != 0)
        {
            ::munmap(m_base, kReservationSize);
            throw std::bad_alloc{};
        }
    }
    else
    {
        m_capacity = uint64_t{initial_pages} * kPageSize;
        // Keep a non-null base even for zero pages.
        m_base = static_cast<uint8_t*>(std::calloc(m_capacity == 0 ? 1 : m_capacity, 1));
        if (m_base == nullptr)
            throw std::bad_alloc{};
    }
    m_pages = initial_pages;
}

LinearMemory::~LinearMemory()
{
    if (m_mode == BoundsStrategy::GuardPage)
        ::munmap(m_base, kReservationSize);
    else
        std::free(m_base);
}

uint32_t LinearMemory::grow(uint32_t delta_pages)
{
    const auto old = m_pages;
    const uint64_t wanted = uint64_t{old} + delta_pages;
    if (wanted > m_max_pages)
        return kGrowFailed;
    if (delta_pages == 0)
        return old;

    if (m_mode == BoundsStrategy::GuardPage)
    {
        // Fresh reservation pages are zero-filled on first touch.
        if (::mprotect(m_base + size(), uint64_t{delta_pages} * kPageSize,
                PROT_READ | PROT_WRITE) != 0)
            return kGrowFailed;
    }
    else
    {
        const auto bytes = wanted * kPageSize;
        if (bytes > m_capacity)
        {
            auto* p = static_cast<uint8_t*>(std::realloc(m_base, bytes));
            if (p == nullptr)
                return kGrowFailed;
            m_base = p;
            m_capacity = bytes;
        }
        std::memset(m_base + size(), 0, uint64_t{delta_pages} * kPageSize);
    }
    m_pages = static_cast<uint32_t>(wanted);
    return old;
}

bool LinearMemory::is_guard_address(const void* addr) const noexcept
{
    if (m_mode != BoundsStrategy::GuardPage)
        return false;
    const auto a = reinterpret_cast<uintptr_t>(addr);
    const auto b = reinterpret_cast<uintptr_t>(m_base);
    return a >= b + size() && a < b + kReservationSize;
}

}  // namespace detwasm
