// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: validate, run, diff, bench, dump-dmir.
//
// Exit codes: 0 ok, 1 I/O or internal error, 2 validation error, 3 trap,
// 4 API misuse (bad export, arguments, imports or flags), 5 diff mismatch.

#include "detwasm/dmir/lower.hpp"
#include "detwasm/dmir/passes.hpp"
#include "detwasm/engine/engine.hpp"
#include "detwasm/frontend/decoder.hpp"
#include "detwasm/frontend/errors.hpp"
#include "detwasm/frontend/validator.hpp"
#include "detwasm/runtime/mock_host.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>

namespace
{
using namespace detwasm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

enum Exit : int
{
    kOk = 0,
    kIoError = 1,
    kValidation = 2,
    kTrap = 3,
    kMisuse = 4,
    kMismatch = 5,
};

struct IoError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

std::vector<uint8_t> read_file(const std::string& path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw IoError{"cannot read " + path};
    return {std::istreambuf_iterator<char>{in}, {}};
}

struct RunConfig
{
    std::string path;
    std::string mode = "interp";
    std::string invoke;
    std::vector<std::string> args;
    uint64_t gas_limit = 10'000'000'000;
    std::string memory_mode = "guard";
    uint32_t max_depth = 1024;
    uint64_t weight_budget = 2'097'152;
    bool trace = true;
    std::string metrics;
    std::optional<unsigned> workers;
};

BoundsStrategy parse_bounds(const std::string& name)
{
    if (name == "guard")
        return BoundsStrategy::GuardPage;
    if (name == "software")
        return BoundsStrategy::SoftwareCheck;
    throw ApiMisuse{"memory mode must be guard or software"};
}

/// DETWASM_MEMORY_MODE, when set, wins over the flag so CI can force a mode.
BoundsStrategy effective_bounds(const std::string& flag)
{
    if (const char* env = std::getenv("DETWASM_MEMORY_MODE"); env != nullptr && *env != '\0')
        return parse_bounds(env);
    return parse_bounds(flag);
}

ExecMode to_mode(const std::string& name)
{
    const auto m = parse_mode(name);
    if (!m)
        throw ApiMisuse{"mode must be one of interp, flat, flas, lazy"};
    return *m;
}

std::vector<Value> parse_args(const std::vector<std::string>& literals)
{
    std::vector<Value> out;
    for (const auto& l : literals)
    {
        try
        {
            out.push_back(parse_value_literal(l));
        }
        catch (const std::exception& e)
        {
            throw ApiMisuse{"bad argument '" + l + "': " + e.what()};
        }
    }
    return out;
}

struct Outcome
{
    std::string trace;
    bool trapped = false;
    uint64_t first_invoke_us = 0;
    uint64_t exec_us = 0;
    size_t code_size = 0;
    std::string stats;
    std::vector<std::string> function_metrics;
};

Outcome execute(std::shared_ptr<const ValidatedModule> mod, ExecMode mode, BoundsStrategy bounds,
    const RunConfig& rc, const std::vector<Value>& args, bool miscompile = false)
{
    EngineConfig ec;
    ec.mode = mode;
    ec.backend.bounds = bounds;
    ec.workers = rc.workers;
    ec.miscompile_for_testing = miscompile;
    auto engine = create_engine(std::move(mod), ec);

    InstanceConfig ic;
    ic.memory_mode = bounds;
    ic.gas_limit = rc.gas_limit;
    ic.max_depth = rc.max_depth;
    ic.weight_budget = rc.weight_budget;
    const auto hosts = mock_host_registry();
    Outcome o;
    try
    {
        auto inst = create_instance(*engine, hosts, ic);
        const auto t0 = Clock::now();
        const auto r = invoke(*inst, rc.invoke, args);
        o.exec_us = static_cast<uint64_t>(
            std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0).count());
        o.trace = trace_line(r, *inst);
        o.trapped = !r.ok();
    }
    catch (const InstantiationError& e)
    {
        if (e.kind() != InstantiationErrorKind::StartTrap)
            throw;
        o.trace = "TRAP " + std::string{to_string(e.trap()->code)} +
                  " gas=" + std::to_string(e.trap()->gas_consumed);
        o.trapped = true;
    }
    const auto stats = engine->stats();
    o.first_invoke_us = stats.latency_first_invoke_us.value_or(0);
    o.stats = to_json(stats);
    for (const auto* f : engine->published())
    {
        o.code_size += f->code_size_bytes;
        o.function_metrics.push_back(metrics_json(*f));
    }
    engine->shutdown();
    return o;
}

int cmd_validate(const std::string& path)
{
    const auto bytes = read_file(path);
    try
    {
        load_module(bytes);
    }
    catch (const ValidationError& e)
    {
        std::cout << e.line() << "\n";
        return kValidation;
    }
    std::cout << "OK\n";
    return kOk;
}

int cmd_run(const RunConfig& rc)
{
    const auto mod = load_module(read_file(rc.path));
    const auto mode = to_mode(rc.mode);
    const auto bounds = effective_bounds(rc.memory_mode);
    const auto args = parse_args(rc.args);
    const auto o = execute(mod, mode, bounds, rc, args);
    if (rc.trace)
        std::cout << o.trace << "\n";
    if (!rc.metrics.empty())
    {
        nlohmann::json entry{{"name", fs::path{rc.path}.stem().string() + ":" + rc.invoke},
            {"mode", rc.mode}, {"latency_first_invoke_us", o.first_invoke_us},
            {"exec_latency_us", o.exec_us},
            {"processing_time_us", o.first_invoke_us + o.exec_us},
            {"code_size_bytes", o.code_size}, {"stats", nlohmann::json::parse(o.stats)}};
        nlohmann::json functions = nlohmann::json::array();
        for (const auto& m : o.function_metrics)
            functions.push_back(nlohmann::json::parse(m));
        entry["functions"] = functions;
        std::ofstream out{rc.metrics, std::ios::app};
        if (!out)
            throw IoError{"cannot write " + rc.metrics};
        out << entry.dump() << "\n";
    }
    return o.trapped ? kTrap : kOk;
}

int cmd_diff(const RunConfig& rc, bool miscompile)
{
    const auto mod = load_module(read_file(rc.path));
    const auto args = parse_args(rc.args);
    std::vector<std::pair<std::string, std::string>> lines;
    for (auto mode : {ExecMode::Interp, ExecMode::EagerFLAT, ExecMode::EagerFLAS, ExecMode::Lazy})
        for (auto bounds : {BoundsStrategy::GuardPage, BoundsStrategy::SoftwareCheck})
        {
            const auto o = execute(mod, mode, bounds, rc, args, miscompile);
            lines.emplace_back(
                std::string{to_string(mode)} + "/" + std::string{to_string(bounds)}, o.trace);
        }
    const bool same = std::all_of(lines.begin(), lines.end(),
        [&](const auto& l) { return l.second == lines.front().second; });
    if (same)
    {
        std::cout << "DETERMINISTIC\n";
        return kOk;
    }
    std::cout << "MISMATCH\n";
    for (const auto& [name, trace] : lines)
        std::cout << name << ": " << trace << "\n";
    return kMismatch;
}

uint64_t median(std::vector<uint64_t> v)
{
    if (v.empty())
        return 0;
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

int cmd_bench(const std::string& dir, const std::vector<std::string>& modes, unsigned reps,
    const std::string& out_path, const std::string& memory_mode)
{
    const auto manifest_path = fs::path{dir} / "manifest.json";
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty())
    {
        file.open(out_path);
        if (!file)
            throw IoError{"cannot write " + out_path};
        out = &file;
    }
    if (!fs::exists(manifest_path))
        return kOk;  // An empty suite yields an empty report.
    std::ifstream mf{manifest_path};
    nlohmann::json manifest;
    try
    {
        manifest = nlohmann::json::parse(mf);
    }
    catch (const std::exception& e)
    {
        throw IoError{"bad manifest: " + std::string{e.what()}};
    }

    const auto bounds = effective_bounds(memory_mode);
    const auto hosts = mock_host_registry();
    int status = kOk;
    for (const auto& c : manifest.value("cases", nlohmann::json::array()))
    {
        const auto name = c.at("name").get<std::string>();
        for (const auto& mode_name : modes)
        {
            nlohmann::json entry{{"name", name}, {"mode", mode_name}};
            try
            {
                const auto bytes = read_file((fs::path{dir} / c.at("file").get<std::string>()).string());
                const auto mod = load_module(bytes);
                const auto args = parse_args(c.value("args", std::vector<std::string>{}));
                const auto invoke_name = c.at("invoke").get<std::string>();
                EngineConfig ec;
                ec.mode = to_mode(mode_name);
                ec.backend.bounds = bounds;
                InstanceConfig ic;
                ic.memory_mode = bounds;
                ic.gas_limit = c.value("gas_limit", uint64_t{10'000'000'000});

                std::vector<uint64_t> first, exec;
                size_t code_size = 0;
                std::string trace;
                for (unsigned r = 0; r < reps; ++r)
                {
                    // Fresh engine: creation through the first invocation.
                    auto engine = create_engine(mod, ec);
                    auto inst = create_instance(*engine, hosts, ic);
                    auto res = invoke(*inst, invoke_name, args);
                    first.push_back(engine->stats().latency_first_invoke_us.value_or(0));
                    trace = trace_line(res, *inst);
                    if (r == 0)
                    {
                        // Warm runs on the first engine measure steady-state execution.
                        for (unsigned k = 0; k < reps; ++k)
                        {
                            inst->reset_gas(ic.gas_limit);
                            const auto t0 = Clock::now();
                            invoke(*inst, invoke_name, args);
                            exec.push_back(static_cast<uint64_t>(
                                std::chrono::duration_cast<std::chrono::microseconds>(
                                    Clock::now() - t0).count()));
                        }
                        code_size = 0;
                        for (const auto* f : engine->published())
                            code_size += f->code_size_bytes;
                    }
                    engine->shutdown();
                }
                const auto f = median(first), x = median(exec);
                entry["latency_first_invoke_us"] = f;
                entry["exec_latency_us"] = x;
                entry["processing_time_us"] = f + x;
                entry["code_size_bytes"] = code_size;
                entry["trace"] = trace;
            }
            catch (const ValidationError& e)
            {
                entry["error"] = e.line();
                status = status == kOk ? kValidation : status;
            }
            catch (const std::exception& e)
            {
                entry["error"] = e.what();
                status = status == kOk ? kIoError : status;
            }
            *out << entry.dump() << "\n";
        }
    }
    return status;
}

int cmd_dump(const std::string& path, std::optional<uint32_t> func, bool metered, bool optimized)
{
    const auto mod = load_module(read_file(path));
    const auto first = mod->num_imported_functions();
    for (uint32_t f = first; f < mod->num_functions(); ++f)
    {
        if (func && *func != f)
            continue;
        auto fn = dmir::lower_to_dmir(*mod, f);
        if (metered || optimized)
            dmir::insert_gas_metering(fn, dmir::CostModel::uniform());
        if (optimized)
            dmir::run_passes(fn);
        std::cout << dmir::print(fn);
    }
    return kOk;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"detwasm: deterministic WebAssembly execution engine"};
    app.require_subcommand(1);

    RunConfig rc;
    auto add_run_flags = [&](CLI::App* cmd, bool with_mode) {
        cmd->add_option("module", rc.path, "Path to a .wasm module")->required();
        if (with_mode)
            cmd->add_option("--mode", rc.mode, "interp, flat, flas or lazy");
        cmd->add_option("--invoke", rc.invoke, "Exported function to call")->required();
        cmd->add_option("--args", rc.args, "Arguments as type:value literals");
        cmd->add_option("--gas-limit", rc.gas_limit, "Gas units available");
        cmd->add_option("--memory-mode", rc.memory_mode, "guard or software");
        cmd->add_option("--max-depth", rc.max_depth, "Maximum call depth");
        cmd->add_option("--weight-budget", rc.weight_budget, "Frame weight budget (4-byte slots)");
        cmd->add_option("--workers", rc.workers, "Background compile threads (lazy mode)");
    };

    auto* validate = app.add_subcommand("validate", "Check dWasm rules");
    std::string validate_path;
    validate->add_option("module", validate_path, "Path to a .wasm module")->required();

    auto* run = app.add_subcommand("run", "Invoke an export and print the trace line");
    add_run_flags(run, true);
    bool no_trace = false;
    run->add_flag("--no-trace", no_trace, "Suppress the trace line");
    run->add_option("--metrics", rc.metrics, "Append a JSON metrics record to this file");

    auto* diff = app.add_subcommand("diff", "Compare traces across every mode and bounds strategy");
    add_run_flags(diff, false);
    bool miscompile = false;
    diff->add_flag("--test-miscompile", miscompile, "Corrupt FLAS results (harness self-test)")
        ->group("");

    auto* bench = app.add_subcommand("bench", "Measure latency and code size over a suite");
    std::string suite;
    std::vector<std::string> modes{"interp", "flat", "flas", "lazy"};
    unsigned reps = 30;
    std::string bench_out;
    std::string bench_memory = "guard";
    bench->add_option("suite", suite, "Directory with manifest.json")->required();
    bench->add_option("--modes", modes, "Modes to measure")->delimiter(',');
    bench->add_option("--reps", reps, "Repetitions per measurement (median reported)");
    bench->add_option("--out", bench_out, "Write JSON lines here instead of stdout");
    bench->add_option("--memory-mode", bench_memory, "guard or software");

    auto* dump = app.add_subcommand("dump-dmir", "Print the dMIR of defined functions");
    std::string dump_path;
    std::optional<uint32_t> dump_func;
    bool dump_metered = false, dump_optimized = false;
    dump->add_option("module", dump_path, "Path to a .wasm module")->required();
    dump->add_option("--func", dump_func, "Function index");
    dump->add_flag("--metered", dump_metered, "Include gas charges");
    dump->add_flag("--optimized", dump_optimized, "Metered and after the optimization passes");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return kMisuse;
    }

    try
    {
        if (*validate)
            return cmd_validate(validate_path);
        if (*run)
        {
            rc.trace = !no_trace;
            return cmd_run(rc);
        }
        if (*diff)
            return cmd_diff(rc, miscompile);
        if (*bench)
            return cmd_bench(suite, modes, std::max(1u, reps), bench_out, bench_memory);
        if (*dump)
            return cmd_dump(dump_path, dump_func, dump_metered, dump_optimized);
    }
    catch (const ValidationError& e)
    {
        std::cout << e.line() << "\n";
        return kValidation;
    }
    catch (const IoError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    }
    catch (const ApiMisuse& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kMisuse;
    }
    catch (const InstantiationError& e)
    {
        std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return kMisuse;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    }
    return kOk;
}
