// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace detwasm
{
/// Page-aligned executable copy of generated code. Written once while
/// writable, then switched to read+execute; never writable and executable at once.
class CodeRegion
{
public:
    CodeRegion() noexcept = default;
    explicit CodeRegion(std::span<const uint8_t> code);
    ~CodeRegion();
    CodeRegion(CodeRegion&& other) noexcept;
    CodeRegion& operator=(CodeRegion&& other) noexcept;
    CodeRegion(const CodeRegion&) = delete;
    CodeRegion& operator=(const CodeRegion&) = delete;

    const uint8_t* data() const noexcept { return m_data; }
    size_t size() const noexcept { return m_size; }

private:
    uint8_t* m_data = nullptr;
    size_t m_size = 0;
    size_t m_mapped = 0;
};

}  // namespace detwasm
