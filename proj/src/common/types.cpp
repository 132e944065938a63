// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/common/types.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace detwasm
{
std::string_view to_string(ValType t) noexcept
{
    switch (t)
    {
    case ValType::i32:
        return "i32";
    case ValType::i64:
        return "i64";
    case ValType::f32:
        return "f32";
    case ValType::f64:
        return "f64";
    }
    return "?";
}

std::string to_string(const FuncType& type)
{
    std::string s = "(";
    for (size_t i = 0; i < type.params.size(); ++i)
    {
        if (i != 0)
            s += ", ";
        s += to_string(type.params[i]);
    }
    s += ") -> ";
    if (type.results.empty())
        s += "()";
    else
        s += to_string(type.results[0]);
    return s;
}

std::string format_value(const Value& v)
{
    char buf[40];
    switch (v.type)
    {
    case ValType::i32:
        std::snprintf(buf, sizeof(buf), "%d", v.as_i32());
        break;
    case ValType::i64:
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v.as_i64()));
        break;
    case ValType::f32:
        std::snprintf(buf, sizeof(buf), "f32:0x%08x", v.as_u32());
        break;
    case ValType::f64:
        std::snprintf(buf, sizeof(buf), "f64:0x%016llx", static_cast<unsigned long long>(v.bits));
        break;
    }
    return buf;
}

namespace
{
template <typename T>
T parse_integer(std::string_view text)
{
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+'))
    {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    int base = 10;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X'))
    {
        base = 16;
        text.remove_prefix(2);
    }
    uint64_t magnitude = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), magnitude, base);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw std::invalid_argument{"invalid integer literal"};
    return static_cast<T>(negative ? (0 - magnitude) : magnitude);
}
}  // namespace

Value parse_value_literal(std::string_view literal)
{
    const auto colon = literal.find(':');
    if (colon == std::string_view::npos)
        throw std::invalid_argument{"argument literal must have the form type:value"};
    const auto type = literal.substr(0, colon);
    const auto text = literal.substr(colon + 1);
    const bool hex = text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');

    if (type == "i32")
    {
        const auto v = parse_integer<uint64_t>(text);
        if (static_cast<int64_t>(v) < INT32_MIN || (v > UINT32_MAX && static_cast<int64_t>(v) >= 0))
            throw std::invalid_argument{"i32 literal out of range"};
        return Value::from_u32(static_cast<uint32_t>(v));
    }
    if (type == "i64")
        return Value::from_u64(parse_integer<uint64_t>(text));
    if (type == "f32")
    {
        if (hex)
            return {ValType::f32, parse_integer<uint64_t>(text) & 0xffff'ffffu};
        return Value::from_f32(std::stof(std::string{text}));
    }
    if (type == "f64")
    {
        if (hex)
            return {ValType::f64, parse_integer<uint64_t>(text)};
        return Value::from_f64(std::stod(std::string{text}));
    }
    throw std::invalid_argument{"unknown value type in literal"};
}
}  // namespace detwasm
