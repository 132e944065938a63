// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/frontend/errors.hpp"
#include <cstdint>
#include <cstring>
#include <span>
#include <string>

namespace detwasm
{
/// Bounds-checked cursor over module bytes. All failures are MalformedModule at
/// the offset where the offending encoding starts.
class ByteReader
{
public:
    ByteReader(std::span<const uint8_t> bytes, size_t pos = 0, size_t end = SIZE_MAX) noexcept
      : m_bytes{bytes}, m_pos{pos}, m_end{end < bytes.size() ? end : bytes.size()}
    {}

    size_t pos() const noexcept { return m_pos; }
    size_t end() const noexcept { return m_end; }
    bool at_end() const noexcept { return m_pos >= m_end; }
    size_t remaining() const noexcept { return m_end - m_pos; }

    [[noreturn]] void fail(const char* what, size_t at) const
    {
        throw ValidationError{ErrorCode::MalformedModule, at, what};
    }

    uint8_t u8()
    {
        if (m_pos >= m_end)
            fail("unexpected end", m_pos);
        return m_bytes[m_pos++];
    }

    uint8_t peek() const
    {
        if (m_pos >= m_end)
            fail("unexpected end", m_pos);
        return m_bytes[m_pos];
    }

    void skip(size_t n)
    {
        if (n > remaining())
            fail("unexpected end", m_pos);
        m_pos += n;
    }

    uint32_t u32() { return static_cast<uint32_t>(uleb(32)); }
    uint64_t u64() { return uleb(64); }
    int32_t s32() { return static_cast<int32_t>(sleb(32)); }
    int64_t s64() { return sleb(64); }

    uint32_t fixed_u32()
    {
        const auto start = m_pos;
        if (remaining() < 4)
            fail("unexpected end", start);
        uint32_t v;
        std::memcpy(&v, &m_bytes[m_pos], 4);
        m_pos += 4;
        return v;
    }

    uint64_t fixed_u64()
    {
        const auto start = m_pos;
        if (remaining() < 8)
            fail("unexpected end", start);
        uint64_t v;
        std::memcpy(&v, &m_bytes[m_pos], 8);
        m_pos += 8;
        return v;
    }

    std::string name()
    {
        const auto len = u32();
        const auto start = m_pos;
        skip(len);
        return {reinterpret_cast<const char*>(&m_bytes[start]), len};
    }

private:
    uint64_t uleb(unsigned bits)
    {
        const auto start = m_pos;
        const unsigned max_bytes = (bits + 6) / 7;
        uint64_t result = 0;
        for (unsigned i = 0;; ++i)
        {
            if (m_pos >= m_end)
                fail("truncated LEB128", start);
            const uint8_t byte = m_bytes[m_pos++];
            const unsigned shift = 7 * i;
            if (i == max_bytes - 1)
            {
                // Unused high bits of the final byte must be zero and no continuation.
                const unsigned used = bits - shift;
                if ((byte & 0x80) != 0 || (byte >> used) != 0)
                    fail("invalid LEB128 padding", start);
                result |= uint64_t{byte} << shift;
                return result;
            }
            result |= uint64_t{byte & 0x7fu} << shift;
            if ((byte & 0x80) == 0)
                return result;
        }
    }

    int64_t sleb(unsigned bits)
    {
        const auto start = m_pos;
        const unsigned max_bytes = (bits + 6) / 7;
        uint64_t result = 0;
        for (unsigned i = 0;; ++i)
        {
            if (m_pos >= m_end)
                fail("truncated LEB128", start);
            const uint8_t byte = m_bytes[m_pos++];
            const unsigned shift = 7 * i;
            if (i == max_bytes - 1)
            {
                if ((byte & 0x80) != 0)
                    fail("invalid LEB128 length", start);
                // Unused payload bits must replicate the sign bit.
                const unsigned used = bits - shift;
                const unsigned payload = byte & 0x7fu;
                const unsigned sign = (payload >> (used - 1)) & 1u;
                const unsigned upper = payload >> used;
                if (upper != (sign != 0 ? (0x7fu >> used) : 0u))
                    fail("invalid LEB128 padding", start);
                result |= uint64_t{payload & ((1u << used) - 1)} << shift;
                if (sign != 0 && shift + used < 64)
                    result |= ~uint64_t{0} << (shift + used);
                return static_cast<int64_t>(result);
            }
            result |= uint64_t{byte & 0x7fu} << shift;
            if ((byte & 0x80) == 0)
            {
                const unsigned total = shift + 7;
                if (total < 64 && (byte & 0x40) != 0)
                    result |= ~uint64_t{0} << total;
                return static_cast<int64_t>(result);
            }
        }
    }

    std::span<const uint8_t> m_bytes;
    size_t m_pos;
    size_t m_end;
};

}  // namespace detwasm
