// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace detwasm::dmir
{
/// Dense bit set sized at construction, for dataflow over registers.
class BitSet
{
public:
    BitSet() = default;
    explicit BitSet(size_t n, bool value = false)
      : m_words((n + 63) / 64, value ? ~uint64_t{0} : 0), m_size{n}
    {
        trim();
    }

    size_t size() const noexcept { return m_size; }
    bool test(size_t i) const noexcept { return (m_words[i / 64] >> (i % 64)) & 1; }
    void set(size_t i) noexcept { m_words[i / 64] |= uint64_t{1} << (i % 64); }
    void reset(size_t i) noexcept { m_words[i / 64] &= ~(uint64_t{1} << (i % 64)); }

    /// In-place union; returns true if anything changed.
    bool unite(const BitSet& o) noexcept
    {
        bool changed = false;
        for (size_t i = 0; i < m_words.size(); ++i)
        {
            const auto w = m_words[i] | o.m_words[i];
            changed |= w != m_words[i];
            m_words[i] = w;
        }
        return changed;
    }

    /// In-place intersection; returns true if anything changed.
    bool intersect(const BitSet& o) noexcept
    {
        bool changed = false;
        for (size_t i = 0; i < m_words.size(); ++i)
        {
            const auto w = m_words[i] & o.m_words[i];
            changed |= w != m_words[i];
            m_words[i] = w;
        }
        return changed;
    }

    /// Removes every element of `o`.
    void subtract(const BitSet& o) noexcept
    {
        for (size_t i = 0; i < m_words.size(); ++i)
            m_words[i] &= ~o.m_words[i];
    }

    template <typename F>
    void for_each(F&& f) const
    {
        for (size_t w = 0; w < m_words.size(); ++w)
        {
            auto bits = m_words[w];
            while (bits != 0)
            {
                f(w * 64 + static_cast<size_t>(std::countr_zero(bits)));
                bits &= bits - 1;
            }
        }
    }

    friend bool operator==(const BitSet&, const BitSet&) = default;

private:
    void trim() noexcept
    {
        if (m_size % 64 != 0 && !m_words.empty())
            m_words.back() &= (uint64_t{1} << (m_size % 64)) - 1;
    }

    std::vector<uint64_t> m_words;
    size_t m_size = 0;
};

}  // namespace detwasm::dmir
