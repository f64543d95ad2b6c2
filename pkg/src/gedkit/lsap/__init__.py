"""Linear sum assignment with duals.

The compiled kernel is used when the extension was built; otherwise the numpy
fallback with identical semantics is selected at import.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from . import _lsap_py

try:
    from . import _lsap as _kernel  # type: ignore[attr-defined]

    KERNEL = "compiled"
except ImportError:  # pragma: no cover - depends on the build
    _kernel = _lsap_py
    KERNEL = "python"

__all__ = ["KERNEL", "LsapSolution", "solve_lsap", "solve_rows"]


def solve_rows(C: np.ndarray, kernel: str | None = None):
    """Raw kernel call for n <= m; see _lsap_py.solve_rows."""
    impl = _lsap_py if kernel == "python" else _kernel
    return impl.solve_rows(np.ascontiguousarray(C, dtype=np.float64))


@dataclass(frozen=True)
class LsapSolution:
    """Optimal maximum matching of a rectangular cost matrix, with duals.

    row_to_col[i] is the column of row i or -1; col_to_row is the mirror.
    """

    row_to_col: np.ndarray
    col_to_row: np.ndarray
    cost: float
    u: np.ndarray
    v: np.ndarray

    def slack(self, C: np.ndarray) -> np.ndarray:
        return np.asarray(C, dtype=np.float64) - self.u[:, None] - self.v[None, :]

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, int(k)) for i, k in enumerate(self.row_to_col) if k >= 0]


def solve_lsap(C, kernel: str | None = None) -> LsapSolution:
    """Minimum-cost maximum matching of a rectangular matrix.

    Rows or columns in excess stay unassigned. Runs in O(min^2 * max).
    """
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2:
        raise ValidationError("cost matrix must be two-dimensional")
    if not np.all(np.isfinite(C)):
        raise ValidationError("cost matrix contains NaN or infinite entries")
    n, m = C.shape
    if n == 0 or m == 0:
        return LsapSolution(np.full(n, -1, dtype=np.int64), np.full(m, -1, dtype=np.int64), 0.0,
                            np.zeros(n), np.zeros(m))
    if n <= m:
        col4row, u, v = solve_rows(C, kernel)
        row_to_col = col4row
        col_to_row = np.full(m, -1, dtype=np.int64)
        col_to_row[col4row] = np.arange(n)
    else:
        row4col, v, u = solve_rows(C.T, kernel)
        col_to_row = row4col
        row_to_col = np.full(n, -1, dtype=np.int64)
        row_to_col[row4col] = np.arange(m)
    rows = np.flatnonzero(row_to_col >= 0)
    cost = float(C[rows, row_to_col[rows]].sum())
    return LsapSolution(row_to_col, col_to_row, cost, u, v)
