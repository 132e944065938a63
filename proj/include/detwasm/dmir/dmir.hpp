// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "detwasm/common/trap.hpp"
#include "detwasm/common/types.hpp"
#include "detwasm/dmir/hooks.hpp"
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace detwasm::dmir
{
using Reg = uint32_t;
using BlockId = uint32_t;

inline constexpr Reg kNoReg = UINT32_MAX;
inline constexpr BlockId kNoBlock = UINT32_MAX;

enum class Op : uint8_t
{
    Const,  ///< dst = imm
    Copy,   ///< dst = a
    Select, ///< dst = c ? a : b, args {a, b, c}

    // Integer binary, `type` is the operand/result type.
    Add,
    Sub,
    Mul,
    DivS,  ///< Traps IntegerDivideByZero / IntegerOverflow.
    DivU,
    RemS,
    RemU,
    And,
    Or,
    Xor,
    Shl,
    ShrS,
    ShrU,
    Rotl,
    Rotr,

    // Integer unary.
    Clz,
    Ctz,
    Popcnt,

    // Integer tests; `src_type` is the operand type, result i32.
    Eqz,
    Eq,
    Ne,
    LtS,
    LtU,
    GtS,
    GtU,
    LeS,
    LeU,
    GeS,
    GeU,

    // Float binary. Arithmetic results that are NaN become the canonical NaN.
    FAdd,
    FSub,
    FMul,
    FDiv,
    FMin,
    FMax,
    FCopysign,

    // Float unary.
    FAbs,
    FNeg,
    FCeil,
    FFloor,
    FTrunc,
    FNearest,
    FSqrt,

    // Float compares; `src_type` is the operand type, result i32.
    FEq,
    FNe,
    FLt,
    FGt,
    FLe,
    FGe,

    // Conversions: `type` is the result, `src_type` the operand.
    Wrap,
    ExtendS,
    ExtendU,
    TruncS,  ///< Traps InvalidConversionToInteger.
    TruncU,
    ConvertS,
    ConvertU,
    Demote,
    Promote,
    Reinterpret,

    Load,        ///< dst = mem[a + imm], `width` bytes, `sign_extend`.
    Store,       ///< mem[a + imm] = b, low `width` bytes; `type` is the value type.
    MemorySize,  ///< dst = page count.
    MemoryGrow,  ///< dst = previous pages or 0xFFFFFFFF, args {delta}.
    GlobalGet,   ///< dst = globals[imm]
    GlobalSet,   ///< globals[imm] = a

    Call,          ///< Function index in imm; args are call arguments.
    CallIndirect,  ///< Canonical type id in imm; args are call arguments then table index.
    CheckedArith,  ///< dst = hook(a, b) or trap CheckedArithmeticOverflow.
    GasCharge,     ///< Charge imm units; traps GasExhausted when fewer remain.

    // Terminators.
    Br,      ///< targets {t}
    CondBr,  ///< args {c}, targets {if_nonzero, if_zero}
    Switch,  ///< args {i}, targets {case0.., default}
    Return,  ///< args {} or {v}
    Trap,    ///< imm = TrapCode
};

inline constexpr unsigned kNumOps = static_cast<unsigned>(Op::Trap) + 1;

std::string_view to_string(Op op) noexcept;

constexpr bool is_terminator(Op op) noexcept
{
    return op >= Op::Br;
}

/// Instructions that may trap (or have effects) and so are never removed or folded.
constexpr bool may_trap(Op op) noexcept
{
    switch (op)
    {
    case Op::DivS:
    case Op::DivU:
    case Op::RemS:
    case Op::RemU:
    case Op::TruncS:
    case Op::TruncU:
    case Op::Load:
    case Op::Store:
    case Op::Call:
    case Op::CallIndirect:
    case Op::CheckedArith:
    case Op::GasCharge:
        return true;
    default:
        return is_terminator(op);
    }
}

/// True when the instruction has no effect beyond writing its destination and
/// cannot trap; such instructions may be removed if their result is unused.
constexpr bool is_pure(Op op) noexcept
{
    switch (op)
    {
    case Op::Store:
    case Op::MemoryGrow:
    case Op::GlobalSet:
        return false;
    case Op::MemorySize:
    case Op::GlobalGet:
        return true;
    default:
        return !may_trap(op);
    }
}

struct Instr
{
    Op op = Op::Const;
    ValType type = ValType::i32;      ///< Result type (operand type for stores).
    ValType src_type = ValType::i32;  ///< Operand type for tests and conversions.
    uint8_t width = 0;                ///< Access width of loads and stores.
    bool sign_extend = false;
    HookKind hook;
    Reg dst = kNoReg;
    std::vector<Reg> args;
    uint64_t imm = 0;
    std::vector<BlockId> targets;

    bool has_dst() const noexcept { return dst != kNoReg; }
};

struct Block
{
    std::vector<Instr> instrs;  ///< Ends with exactly one terminator.
    bool loop_header = false;

    const Instr& terminator() const { return instrs.back(); }
    Instr& terminator() { return instrs.back(); }
};

/// Control-flow graph of typed virtual registers for one defined function.
/// Registers 0..num_params-1 hold the arguments; the next num_locals registers
/// are the declared locals, zero at entry. Block 0 is the entry.
struct Function
{
    uint32_t func_index = 0;
    FuncType signature;
    uint32_t num_params = 0;
    uint32_t num_locals = 0;
    uint32_t frame_weight = 0;
    std::vector<ValType> reg_types;
    std::vector<Block> blocks;

    Reg new_reg(ValType t)
    {
        reg_types.push_back(t);
        return static_cast<Reg>(reg_types.size() - 1);
    }
    uint32_t num_regs() const noexcept { return static_cast<uint32_t>(reg_types.size()); }
    /// Params and locals: defined at entry and possibly reassigned.
    uint32_t num_entry_regs() const noexcept { return num_params + num_locals; }
    size_t instruction_count() const noexcept;
};

/// Canonical text form, one instruction per line: `rN = <op>.<type> args`.
std::string print(const Function& f);

/// Checks the structural invariants: one terminator per block at the end, valid
/// targets and registers, def-before-use on every path. Returns an empty string
/// when well formed, otherwise a description of the first violation.
std::string verify(const Function& f);

/// Successor block ids of a block, in terminator order.
std::vector<BlockId> successors(const Block& b);

}  // namespace detwasm::dmir
