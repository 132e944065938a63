// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/backend/code_memory.hpp"

#include <algorithm>
#include <cstring>
#include <new>
#include <sys/mman.h>
#include <unistd.h>
#include <utility>

namespace detwasm
{
CodeRegion::CodeRegion(std::span<const uint8_t> code)
{
    const auto page = static_cast<size_t>(::sysconf(_SC_PAGESIZE));
    const auto mapped = (std::max<size_t>(code.size(), 1) + page - 1) / page * page;
    void* p = ::mmap(nullptr, mapped, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
    if (p == MAP_FAILED)
        throw std::bad_alloc{};
    std::memcpy(p, code.data(), code.size());
    if (::mprotect(p, mapped, PROT_READ | PROT_EXEC) != 0)
    {
        ::munmap(p, mapped);
        throw std::bad_alloc{};
    }
    m_data = static_cast<uint8_t*>(p);
    m_size = code.size();
    m_mapped = mapped;
}

CodeRegion::~CodeRegion()
{
    if (m_data != nullptr)
        ::munmap(m_data, m_mapped);
}

CodeRegion::CodeRegion(CodeRegion&& other) noexcept
  : m_data{std::exchange(other.m_data, nullptr)},
    m_size{std::exchange(other.m_size, 0)},
    m_mapped{std::exchange(other.m_mapped, 0)}
{}

CodeRegion& CodeRegion::operator=(CodeRegion&& other) noexcept
{
    if (this != &other)
    {
        if (m_data != nullptr)
            ::munmap(m_data, m_mapped);
        m_data = std::exchange(other.m_data, nullptr);
        m_size = std::exchange(other.m_size, 0);
        m_mapped = std::exchange(other.m_mapped, 0);
    }
    return *this;
}

}  // namespace detwasm
