// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace detwasm
{
/// Reasons a module is rejected. The (code, offset) pair of the first violation is
/// part of the deterministic contract; the detail text is not.
enum class ErrorCode
{
    MalformedModule,
    ParamCountExceeded,
    LocalCountExceeded,
    FrameWeightExceeded,
    InstructionCountExceeded,
    NestingDepthExceeded,
    InvalidUtf8Identifier,
    UnsupportedFeature,
    TypeMismatch,
    InvalidIndex,
    InvalidAlignment,
    InvalidLimits,
    InvalidConstExpr,
    DuplicateExport,
    HookSignatureMismatch,
    MemoryPagesExceeded,
    TableSizeExceeded,
    ImportCountExceeded,
    ExportCountExceeded,
};

std::string_view to_string(ErrorCode code) noexcept;

class ValidationError : public std::runtime_error
{
public:
    ValidationError(ErrorCode code, size_t offset, const std::string& detail)
      : std::runtime_error{detail}, m_code{code}, m_offset{offset}
    {}

    ErrorCode code() const noexcept { return m_code; }
    size_t offset() const noexcept { return m_offset; }

    /// The single deterministic line: `EVALID <code> offset=<n>`.
    std::string line() const;

private:
    ErrorCode m_code;
    size_t m_offset;
};

}  // namespace detwasm
