// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

#include "detwasm/dmir/gas.hpp"

#include <stdexcept>

namespace detwasm::dmir
{
CostModel CostModel::uniform() noexcept
{
    CostModel m;
    m.op_costs.fill(1);
    m.op_costs[static_cast<size_t>(Op::GasCharge)] = 0;
    return m;
}

uint64_t CostModel::instr_cost(const Function& f, const Instr& in) const noexcept
{
    switch (in.op)
    {
    case Op::GasCharge:
        return 0;
    case Op::Br:
        return f.blocks[in.targets[0]].loop_header ? loop_edge_cost : forward_branch_cost;
    case Op::Call:
    case Op::CallIndirect:
        return uint64_t{op_costs[static_cast<size_t>(in.op)]} + call_overhead;
    default:
        return op_costs[static_cast<size_t>(in.op)];
    }
}

uint64_t CostModel::block_cost(const Function& f, const Block& b) const noexcept
{
    uint64_t c = 0;
    for (const auto& in : b.instrs)
        c += instr_cost(f, in);
    return c;
}

void insert_gas_metering(Function& f, const CostModel& cost)
{
    for (auto& b : f.blocks)
    {
        for (const auto& in : b.instrs)
            if (in.op == Op::GasCharge)
                throw std::logic_error{"insert_gas_metering: function already metered"};
        const auto c = cost.block_cost(f, b);
        if (c == 0)
            continue;
        Instr charge;
        charge.op = Op::GasCharge;
        charge.imm = c;
        b.instrs.insert(b.instrs.begin(), std::move(charge));
    }
}

}  // namespace detwasm::dmir
