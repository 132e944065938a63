// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/frontend/errors.hpp"

namespace detwasm
{
std::string_view to_string(ErrorCode code) noexcept
{
    switch (code)
    {
    case ErrorCode::MalformedModule:
        return "MalformedModule";
    case ErrorCode::ParamCountExceeded:
        return "ParamCountExceeded";
    case ErrorCode::LocalCountExceeded:
        return "LocalCountExceeded";
    case ErrorCode::FrameWeightExceeded:
        return "FrameWeightExceeded";
    case ErrorCode::InstructionCountExceeded:
        return "InstructionCountExceeded";
    case ErrorCode::NestingDepthExceeded:
        return "NestingDepthExceeded";
    case ErrorCode::InvalidUtf8Identifier:
        return "InvalidUtf8Identifier";
    case ErrorCode::UnsupportedFeature:
        return "UnsupportedFeature";
    case ErrorCode::TypeMismatch:
        return "TypeMismatch";
    case ErrorCode::InvalidIndex:
        return "InvalidIndex";
    case ErrorCode::InvalidAlignment:
        return "InvalidAlignment";
    case ErrorCode::InvalidLimits:
        return "InvalidLimits";
    case ErrorCode::InvalidConstExpr:
        return "InvalidConstExpr";
    case ErrorCode::DuplicateExport:
        return "DuplicateExport";
    case ErrorCode::HookSignatureMismatch:
        return "HookSignatureMismatch";
    case ErrorCode::MemoryPagesExceeded:
        return "MemoryPagesExceeded";
    case ErrorCode::TableSizeExceeded:
        return "TableSizeExceeded";
    case ErrorCode::ImportCountExceeded:
        return "ImportCountExceeded";
    case ErrorCode::ExportCountExceeded:
        return "ExportCountExceeded";
    }
    return "Unknown";
}

std::string ValidationError::line() const
{
    std::string s = "EVALID ";
    s += to_string(m_code);
    s += " offset=";
    s += std::to_string(m_offset);
    return s;
}

}  // namespace detwasm
