// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace detwasm
{
inline constexpr uint64_t kPageSize = 65536;
inline constexpr uint32_t kGrowFailed = 0xFFFF'FFFFu;

enum class BoundsStrategy : uint8_t
{
    GuardPage,
    SoftwareCheck,
};

std::string_view to_string(BoundsStrategy s) noexcept;

/// Linear memory. In GuardPage mode the accessible pages sit at the start of a
/// PROT_NONE reservation large enough that any 32-bit base plus 32-bit offset
/// plus access width stays inside it; the base never moves. In SoftwareCheck
/// mode the buffer is a plain allocation that may move on growth.
class LinearMemory
{
public:
    /// Bytes reserved in GuardPage mode: 2^32 (base) + 2^32 (offset) + one page.
    static constexpr uint64_t kReservationSize = (uint64_t{1} << 33) + kPageSize;

    LinearMemory(BoundsStrategy mode, uint32_t initial_pages, uint32_t max_pages);
    ~LinearMemory();
    LinearMemory(const LinearMemory&) = delete;
    LinearMemory& operator=(const LinearMemory&) = delete;

    BoundsStrategy mode() const noexcept { return m_mode; }
    uint32_t pages() const noexcept { return m_pages; }
    uint32_t max_pages() const noexcept { return m_max_pages; }
    uint64_t size() const noexcept { return uint64_t{m_pages} * kPageSize; }
    uint8_t* base() const noexcept { return m_base; }
    std::span<uint8_t> bytes() const noexcept { return {m_base, size()}; }

    /// Returns the previous page count, or kGrowFailed leaving memory unchanged.
    uint32_t grow(uint32_t delta_pages);

    /// True if `addr` lies in the reservation but outside the accessible bytes.
    bool is_guard_address(const void* addr) const noexcept;

private:
    BoundsStrategy m_mode;
    uint32_t m_pages = 0;
    uint32_t m_max_pages = 0;
    uint8_t* m_base = nullptr;
    uint64_t m_capacity = 0;  ///< SoftwareCheck: allocated bytes.
};

}  // namespace detwasm
