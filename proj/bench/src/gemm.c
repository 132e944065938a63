// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

// Integer matrix multiply, C = alpha*A*B + beta*C, PolyBench gemm shape.

#define N 64

static int A[N][N], B[N][N], C[N][N];

__attribute__((export_name("run"))) int run(int n)
{
    if (n > N)
        n = N;
    for (int i = 0; i < n; i++)
        for (int j = 0; j < n; j++)
        {
            A[i][j] = (i * j + 1) % n;
            B[i][j] = (i * (j + 1) + 2) % n;
            C[i][j] = (i + j) % n;
        }
    for (int i = 0; i < n; i++)
        for (int j = 0; j < n; j++)
        {
            int acc = 3 * C[i][j];
            for (int k = 0; k < n; k++)
                acc += 2 * A[i][k] * B[k][j];
            C[i][j] = acc;
        }
    int sum = 0;
    for (int i = 0; i < n; i++)
        for (int j = 0; j < n; j++)
            sum = sum * 31 + C[i][j];
    return sum;
}
