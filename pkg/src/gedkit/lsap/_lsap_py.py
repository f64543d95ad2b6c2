"""Shortest augmenting path LSAP solver, numpy fallback.

Mirrors the compiled kernel operation for operation so both return the same
assignment and duals.
"""

from __future__ import annotations

import numpy as np


def solve_rows(C: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve a rectangular LSAP with n <= m rows.

    Returns (col4row, u, v). Every row is assigned; u and v are feasible duals
    (C - u[:, None] - v[None, :] >= 0) that are tight on assigned cells.
    Columns that stay unassigned keep v = 0.
    """
    n, m = C.shape
    u = np.zeros(n)
    v = np.zeros(m)
    col4row = np.full(n, -1, dtype=np.int64)
    row4col = np.full(m, -1, dtype=np.int64)
    for cur in range(n):
        shortest = np.full(m, np.inf)
        path = np.full(m, -1, dtype=np.int64)
        scanned_col = np.zeros(m, dtype=bool)
        scanned_rows = []
        min_val = 0.0
        i = cur
        sink = -1
        while sink == -1:
            scanned_rows.append(i)
            r = min_val + C[i] - u[i] - v
            better = (~scanned_col) & (r < shortest)
            path[better] = i
            shortest[better] = r[better]
            masked = np.where(scanned_col, np.inf, shortest)
            lowest = masked.min()
            if not np.isfinite(lowest):
                raise ValueError("cost matrix is infeasible")
            ties = np.flatnonzero(masked == lowest)
            free = ties[row4col[ties] == -1]
            j = int(free[0]) if free.size else int(ties[0])
            min_val = lowest
            scanned_col[j] = True
            if row4col[j] == -1:
                sink = j
            else:
                i = int(row4col[j])
        u[cur] += min_val
        for i in scanned_rows[1:]:
            u[i] += min_val - shortest[col4row[i]]
        sc = np.flatnonzero(scanned_col)
        v[sc] -= min_val - shortest[sc]
        j = sink
        while True:
            i = int(path[j])
            row4col[j] = i
            col4row[i], j = j, int(col4row[i])
            if i == cur:
                break
    return col4row, u, v
