// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

// Every corpus case under 4 modes x 2 bounds strategies must produce one
// trace line. Results are also checked against reference results computed
// offline with wasmtime (tests/oracle), except where the engine's own gas or
// depth limits end the run.

#include "harness.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace detwasm::acceptance
{
namespace
{
std::vector<std::string> split(const std::string& s)
{
    std::istringstream in{s};
    std::vector<std::string> out;
    for (std::string w; in >> w;)
        out.push_back(w);
    return out;
}

/// Compares an engine trace with one oracle record; empty string when equal.
std::string oracle_mismatch(const std::string& trace, const nlohmann::json& expected, bool floats)
{
    const auto t = split(trace);
    if (expected.contains("trap"))
    {
        const auto want = expected["trap"].get<std::string>();
        if (t[0] != "TRAP")
            return "expected trap " + want;
        // wasmtime names an out-of-range float-to-int conversion IntegerOverflow.
        if (t[1] == want || (floats && want == "IntegerOverflow" && t[1] == "InvalidConversionToInteger"))
            return {};
        return "expected trap " + want;
    }
    if (t[0] != "OK")
        return "expected values";
    std::vector<std::string> values(t.begin() + 1, t.end() - 2);
    if (values != expected["values"].get<std::vector<std::string>>())
        return "values differ";
    if (t.back() != "memhash=" + expected["memhash"].get<std::string>())
        return "memory differs";
    return {};
}

struct Tally
{
    size_t programs = 0;
    size_t cases = 0;
    size_t mismatches = 0;
    size_t oracle_checked = 0;
    size_t oracle_skipped = 0;
    size_t oracle_mismatches = 0;
    std::set<std::string> traps;
    std::string first_problem;
};

void run_suite(const std::filesystem::path& dir, Tally& tally)
{
    const auto manifest = nlohmann::json::parse(std::ifstream{dir / "manifest.json"});
    const auto oracle = nlohmann::json::parse(std::ifstream{dir / "oracle.json"});
    const auto& programs = manifest["programs"];
    for (size_t p = 0; p < programs.size(); ++p)
    {
        const auto& prog = programs[p];
        const auto& expected = oracle["programs"][p];
        const auto file = prog["file"].get<std::string>();
        const auto invoke_name = prog["invoke"].get<std::string>();
        const bool floats = prog["floats"].get<bool>();
        const auto module = load_module(read_bytes(dir / file));
        ++tally.programs;

        std::vector<Runner> runners;
        for (auto mode : kModes)
            for (auto bounds : kBounds)
                runners.emplace_back(module, mode, bounds);

        const auto& invocations = prog["invocations"];
        for (size_t i = 0; i < invocations.size(); ++i)
        {
            std::vector<Value> args;
            for (const auto& a : invocations[i]["args"])
                args.push_back(parse_value_literal(a.get<std::string>()));
            const auto gas = invocations[i]["gas_limit"].get<uint64_t>();
            ++tally.cases;

            std::vector<std::string> traces;
            for (auto& r : runners)
                traces.push_back(r.trace(invoke_name, args, gas));
            for (size_t k = 1; k < traces.size(); ++k)
                if (traces[k] != traces[0])
                {
                    ++tally.mismatches;
                    if (tally.first_problem.empty())
                        tally.first_problem = file + ":" + invoke_name + " " +
                                              std::string{to_string(kModes[k / 2])} + " '" +
                                              traces[k] + "' vs '" + traces[0] + "'";
                    break;
                }

            const auto words = split(traces[0]);
            if (words[0] == "TRAP")
                tally.traps.insert(words[1]);
            if (expected["runs"].is_null() ||
                (words[0] == "TRAP" && (words[1] == "GasExhausted" || words[1] == "WasmCallStackExceed")))
            {
                ++tally.oracle_skipped;
                continue;
            }
            ++tally.oracle_checked;
            const auto why = oracle_mismatch(traces[0], expected["runs"][i], floats);
            if (!why.empty())
            {
                ++tally.oracle_mismatches;
                if (tally.first_problem.empty())
                    tally.first_problem = file + ":" + invoke_name + " oracle: " + why + " in '" +
                                          traces[0] + "'";
            }
        }
    }
}
}  // namespace

Outcome cross_mode_determinism()
{
    const auto t0 = std::chrono::steady_clock::now();
    Tally tally;
    run_suite(data_dir() / "corpus", tally);
    run_suite(data_dir() / "fixtures", tally);
    const auto secs = elapsed_us(t0) / 1e6;

    std::set<std::string> missing;
    for (unsigned c = 0; c < kNumTrapCodes; ++c)
    {
        const std::string name{to_string(static_cast<TrapCode>(c))};
        if (!tally.traps.contains(name))
            missing.insert(name);
    }
    std::ostringstream d;
    d << tally.programs << " programs, " << tally.cases << " cases x 8 configurations, "
      << tally.mismatches << " mismatches; oracle agreed on " << tally.oracle_checked - tally.oracle_mismatches
      << "/" << tally.oracle_checked << " (" << tally.oracle_skipped << " limit-bound skipped); "
      << tally.traps.size() << "/" << kNumTrapCodes << " trap codes seen";
    for (const auto& m : missing)
        d << " missing:" << m;
    if (!tally.first_problem.empty())
        d << "; first problem: " << tally.first_problem;
    const bool pass = tally.programs >= 200 && tally.mismatches == 0 && tally.oracle_mismatches == 0 &&
                      missing.empty() && secs < 300;
    return {pass, d.str()};
}

}  // namespace detwasm::acceptance
