// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

// Fixed-point 1-D Jacobi stencil, PolyBench jacobi-1d shape.

#define N 4096

static int A[N], B[N];

__attribute__((export_name("run"))) int run(int steps)
{
    for (int i = 0; i < N; i++)
    {
        A[i] = (i * 7919) % 1024 << 8;
        B[i] = A[i] >> 1;
    }
    for (int t = 0; t < steps; t++)
    {
        for (int i = 1; i < N - 1; i++)
            B[i] = (A[i - 1] + A[i] + A[i + 1]) / 3;
        for (int i = 1; i < N - 1; i++)
            A[i] = (B[i - 1] + B[i] + B[i + 1]) / 3;
    }
    int sum = 0;
    for (int i = 0; i < N; i++)
        sum ^= A[i] + i;
    return sum;
}
