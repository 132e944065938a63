// detwasm: deterministic WebAssembly execution engine
// Copyright 2026 The detwasm Authors.
// SPDX-License-Identifier: Apache-2.0

// All-pairs shortest paths, PolyBench floyd-warshall shape.

#define N 96

static int path[N][N];

__attribute__((export_name("run"))) int run(int n)
{
    if (n > N)
        n = N;
    for (int i = 0; i < n; i++)
        for (int j = 0; j < n; j++)
        {
            path[i][j] = i * j % 7 + 1;
            if ((i + j) % 13 == 0 || (i + j) % 7 == 0 || (i + j) % 11 == 0)
                path[i][j] = 999;
        }
    for (int k = 0; k < n; k++)
        for (int i = 0; i < n; i++)
            for (int j = 0; j < n; j++)
                if (path[i][k] + path[k][j] < path[i][j])
                    path[i][j] = path[i][k] + path[k][j];
    int sum = 0;
    for (int i = 0; i < n; i++)
        for (int j = 0; j < n; j++)
            sum += path[i][j];
    return sum;
}
