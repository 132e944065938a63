// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/dmir/hooks.hpp"

#include <array>
#include <type_traits>
#include <utility>

namespace detwasm
{
namespace
{
constexpr std::string_view kPrefix = "checked_";

constexpr std::array<std::pair<std::string_view, HookIntType>, 4> kTypes{{
    {"i32", HookIntType::i32},
    {"u32", HookIntType::u32},
    {"i64", HookIntType::i64},
    {"u64", HookIntType::u64},
}};

constexpr std::array<std::pair<std::string_view, HookOp>, 3> kOps{{
    {"add", HookOp::add},
    {"sub", HookOp::sub},
    {"mul", HookOp::mul},
}};

template <typename T>
CheckedResult checked(HookOp op, T a, T b) noexcept
{
    T r{};
    bool overflow = false;
    switch (op)
    {
    case HookOp::add:
        overflow = __builtin_add_overflow(a, b, &r);
        break;
    case HookOp::sub:
        overflow = __builtin_sub_overflow(a, b, &r);
        break;
    case HookOp::mul:
        overflow = __builtin_mul_overflow(a, b, &r);
        break;
    }
    using U = std::make_unsigned_t<T>;
    return {static_cast<uint64_t>(static_cast<U>(r)), overflow};
}
}  // namespace

std::string to_string(HookKind kind)
{
    std::string s{kTypes[static_cast<size_t>(kind.int_type)].first};
    s += '_';
    s += kOps[static_cast<size_t>(kind.op)].first;
    return s;
}

HookMatch recognize_checked_hook(
    std::string_view import_module, std::string_view import_name, const FuncType& signature)
{
    if (import_module != "env" || !import_name.starts_with(kPrefix))
        return {};
    auto rest = import_name.substr(kPrefix.size());
    if (rest.size() != 7 || rest[3] != '_')
        return {};

    HookKind kind;
    bool type_ok = false;
    for (const auto& [name, t] : kTypes)
    {
        if (rest.substr(0, 3) == name)
        {
            kind.int_type = t;
            type_ok = true;
        }
    }
    bool op_ok = false;
    for (const auto& [name, op] : kOps)
    {
        if (rest.substr(4) == name)
        {
            kind.op = op;
            op_ok = true;
        }
    }
    if (!type_ok || !op_ok)
        return {};

    const auto st = kind.storage_type();
    const FuncType expected{{st, st}, {st}};
    if (signature != expected)
        return {HookRecognition::SignatureMismatch, kind};
    return {HookRecognition::Hook, kind};
}

CheckedResult evaluate_checked(HookKind kind, uint64_t a, uint64_t b) noexcept
{
    switch (kind.int_type)
    {
    case HookIntType::i32:
        return checked<int32_t>(kind.op, static_cast<int32_t>(a), static_cast<int32_t>(b));
    case HookIntType::u32:
        return checked<uint32_t>(kind.op, static_cast<uint32_t>(a), static_cast<uint32_t>(b));
    case HookIntType::i64:
        return checked<int64_t>(kind.op, static_cast<int64_t>(a), static_cast<int64_t>(b));
    case HookIntType::u64:
        return checked<uint64_t>(kind.op, a, b);
    }
    return {};
}

}  // namespace detwasm
