// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

// Writes generated programs as .wasm files plus manifest.json, so that an
// independent engine can compute reference results for them.
//
// usage: export_corpus <dir> <integer-only count> <float count>

#include "support/program_gen.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace detwasm;

int main(int argc, char** argv)
{
    if (argc != 4)
    {
        std::fprintf(stderr, "usage: %s <dir> <int-count> <float-count>\n", argv[0]);
        return 4;
    }
    const std::filesystem::path dir{argv[1]};
    const auto n_int = std::strtoull(argv[2], nullptr, 10);
    const auto n_float = std::strtoull(argv[3], nullptr, 10);
    std::filesystem::create_directories(dir);

    nlohmann::json programs = nlohmann::json::array();
    for (uint64_t i = 0; i < n_int + n_float; ++i)
    {
        const bool floats = i >= n_int;
        test::GenOptions opt;
        opt.floats = floats;
        // Seeds are spread so the two halves never share a program shape.
        const uint64_t seed = floats ? 1'000'000 + i : 500'000 + i;
        const auto p = test::generate_program(seed, opt);
        char name[32];
        std::snprintf(name, sizeof name, "p%04llu.wasm", static_cast<unsigned long long>(i));
        std::ofstream{dir / name, std::ios::binary}.write(
            reinterpret_cast<const char*>(p.wasm.data()), static_cast<std::streamsize>(p.wasm.size()));
        nlohmann::json invocations = nlohmann::json::array();
        for (const auto& inv : p.invocations)
        {
            nlohmann::json args = nlohmann::json::array();
            for (const auto& v : inv.args)
                args.push_back(std::string{to_string(v.type)} + ":" + format_value(v));
            invocations.push_back({{"args", args}, {"gas_limit", inv.gas_limit}});
        }
        programs.push_back({{"file", name}, {"seed", seed}, {"floats", floats},
            {"invoke", p.entry}, {"invocations", invocations}});
    }
    std::ofstream{dir / "manifest.json"} << nlohmann::json{{"programs", programs}}.dump(1) << "\n";
    return 0;
}
