// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

// 1000 Lazy create/run/shutdown cycles in helper processes built with
// AddressSanitizer plus UBSan and with ThreadSanitizer. Each must exit 0
// with no sanitizer report.

#include "harness.hpp"

#include <cstdio>
#include <sstream>
#include <sys/wait.h>

namespace detwasm::acceptance
{
namespace
{
struct Run
{
    int status = -1;
    std::string output;
};

Run run_helper(const std::string& command)
{
    Run r;
    FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
    if (!pipe)
        return r;
    char buf[4096];
    size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        r.output.append(buf, n);
    const int st = ::pclose(pipe);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
    return r;
}

bool has_report(const std::string& out)
{
    for (const char* marker : {"AddressSanitizer", "LeakSanitizer", "ThreadSanitizer", "runtime error:"})
        if (out.find(marker) != std::string::npos)
            return true;
    return false;
}
}  // namespace

Outcome shutdown_hygiene()
{
    constexpr int kCycles = 1000;
    const auto module = (bench_dir() / "fifty.wasm").string();
    struct Helper
    {
        const char* name;
        const char* path;
        const char* env;
    };
    const Helper helpers[] = {
        {"ASan+UBSan", DETWASM_ASAN_HELPER, "ASAN_OPTIONS=detect_leaks=1:abort_on_error=0 "
                                            "UBSAN_OPTIONS=halt_on_error=1"},
        {"TSan", DETWASM_TSAN_HELPER, "TSAN_OPTIONS=halt_on_error=1"},
    };
    bool pass = true;
    std::ostringstream d;
    for (const auto& h : helpers)
    {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = run_helper(std::string{h.env} + " '" + h.path + "' '" + module + "' main " +
                                  std::to_string(kCycles));
        const bool ok = r.status == 0 && !has_report(r.output);
        pass &= ok;
        d << h.name << ": " << kCycles << " cycles, exit " << r.status << (has_report(r.output) ? ", report" : "")
          << " (" << static_cast<uint64_t>(elapsed_us(t0) / 1e6) << "s); ";
        if (!ok)
            d << "output: " << r.output.substr(0, 400) << "; ";
    }
    d << "no publication after shutdown";
    return {pass, d.str()};
}

}  // namespace detwasm::acceptance
