// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

// Each validation limit L: a module at L is accepted, at L+1 rejected with
// the limit's error code at the offset the rule names. Expected offsets come
// from walking the section layout directly, not from the decoder.

#include "harness.hpp"
#include "support/module_builder.hpp"

#include "detwasm/frontend/errors.hpp"

#include <map>
#include <sstream>

namespace detwasm::acceptance
{
namespace
{
using namespace detwasm::test;

struct Leb
{
    uint64_t value;
    size_t length;
};

Leb read_leb(const std::vector<uint8_t>& b, size_t at)
{
    uint64_t v = 0;
    size_t n = 0;
    for (unsigned shift = 0;; shift += 7)
    {
        const auto byte = b.at(at + n++);
        v |= uint64_t{byte & 0x7fu} << shift;
        if ((byte & 0x80) == 0)
            return {v, n};
    }
}

/// Offset of the first entry of each section (just past its item count).
std::map<uint8_t, size_t> first_entries(const std::vector<uint8_t>& b)
{
    std::map<uint8_t, size_t> out;
    size_t at = 8;
    while (at < b.size())
    {
        const auto id = b[at];
        const auto size = read_leb(b, at + 1);
        const auto content = at + 1 + size.length;
        out[id] = content + read_leb(b, content).length;
        at = content + size.value;
    }
    return out;
}

constexpr uint8_t kFunctionSection = 3;
constexpr uint8_t kCodeSection = 10;

/// Start of the first function body's instructions (past size and locals).
size_t first_body_start(const std::vector<uint8_t>& b)
{
    const auto entry = first_entries(b).at(kCodeSection);
    const auto size = read_leb(b, entry);
    auto at = entry + size.length;
    const auto groups = read_leb(b, at);
    at += groups.length;
    for (uint64_t g = 0; g < groups.value; ++g)
        at += read_leb(b, at).length + 1;
    return at;
}

std::vector<uint8_t> params_module(uint32_t n)
{
    ModuleBuilder mb;
    mb.add_function(FuncType{std::vector<ValType>(n, ValType::i32), {}}, {}, Code{});
    return mb.build();
}

std::vector<uint8_t> locals_module(uint32_t n)
{
    ModuleBuilder mb;
    mb.add_function(FuncType{}, std::vector<ValType>(n, ValType::i32), Code{});
    return mb.build();
}

/// 1024 i64 params + 10240 i64 locals + 9216 live i64 operands = 40960 slots;
/// `extra` adds one i32 operand beneath them.
std::vector<uint8_t> weight_module(bool extra)
{
    ModuleBuilder mb;
    const std::vector<ValType> wide(1024, ValType::i64);
    const FuncType sink{wide, {}};
    Code c;
    if (extra)
        c.i32_const(0);
    for (int i = 0; i < 9216; ++i)
        c.i64_const(i);
    for (int i = 0; i < 9; ++i)
        c.call(1);
    if (extra)
        c.op(opcode::drop);
    mb.add_function(FuncType{wide, {}}, std::vector<ValType>(10240, ValType::i64), c);
    mb.add_function(sink, {}, Code{});
    return mb.build();
}

/// `n` instructions counting the final `end`.
std::vector<uint8_t> instructions_module(uint32_t n)
{
    ModuleBuilder mb;
    Code c;
    for (uint32_t i = 0; i + 1 < n; ++i)
        c.op(opcode::nop);
    mb.add_function(FuncType{}, {}, c);
    return mb.build();
}

std::vector<uint8_t> nesting_module(uint32_t depth)
{
    ModuleBuilder mb;
    Code c;
    for (uint32_t i = 0; i < depth; ++i)
        c.begin(opcode::block);
    for (uint32_t i = 0; i < depth; ++i)
        c.end();
    mb.add_function(FuncType{}, {}, c);
    return mb.build();
}

/// Empty when the module validates, otherwise the error line.
std::string validate_line(const std::vector<uint8_t>& bytes)
{
    try
    {
        load_module(bytes);
        return {};
    }
    catch (const ValidationError& e)
    {
        return e.line();
    }
}
}  // namespace

Outcome limit_boundaries()
{
    struct Case
    {
        const char* name;
        uint32_t limit;
        std::vector<uint8_t> at, over;
        ErrorCode code;
        size_t offset;
    };
    std::vector<Case> cases;
    {
        auto over = params_module(1025);
        const auto off = first_entries(over).at(kFunctionSection);
        cases.push_back({"params", 1024, params_module(1024), std::move(over), ErrorCode::ParamCountExceeded, off});
    }
    {
        auto over = locals_module(10241);
        const auto off = first_entries(over).at(kCodeSection);
        cases.push_back({"locals", 10240, locals_module(10240), std::move(over), ErrorCode::LocalCountExceeded, off});
    }
    {
        auto over = weight_module(true);
        const auto off = first_entries(over).at(kCodeSection);
        cases.push_back({"frame weight", 40960, weight_module(false), std::move(over), ErrorCode::FrameWeightExceeded, off});
    }
    {
        auto over = instructions_module(10241);
        const auto off = first_entries(over).at(kCodeSection);
        cases.push_back({"instructions", 10240, instructions_module(10240), std::move(over),
            ErrorCode::InstructionCountExceeded, off});
    }
    {
        auto over = nesting_module(1025);
        // The 1025th `block` opcode, two bytes per `block` (opcode, block type).
        const auto off = first_body_start(over) + 2 * 1024;
        cases.push_back({"nesting", 1024, nesting_module(1024), std::move(over), ErrorCode::NestingDepthExceeded, off});
    }

    bool pass = true;
    std::ostringstream d;
    for (const auto& c : cases)
    {
        if (&c != &cases.front())
            d << "; ";
        const auto accepted = validate_line(c.at);
        const auto rejected = validate_line(c.over);
        const auto again = validate_line(c.over);
        const auto want = "EVALID " + std::string{to_string(c.code)} + " offset=" + std::to_string(c.offset);
        const bool ok = accepted.empty() && rejected == want && again == rejected;
        pass &= ok;
        d << c.name << " " << c.limit << (ok ? " ok" : " FAILED");
        if (!ok)
            d << " [at L: '" << accepted << "', at L+1: '" << rejected << "', want '" << want << "']";
    }
    return {pass, d.str()};
}

}  // namespace detwasm::acceptance
