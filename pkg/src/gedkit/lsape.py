"""Error-correcting assignment (LSAPE): FLWC, EBP, greedy and enumeration of optima."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ValidationError
from .graph import EPS_INDEX, NodeMap
from .lsap import solve_lsap


@dataclass(frozen=True)
class LsapeInstance:
    """An (n+1)x(m+1) nonnegative cost matrix.

    Rows 0..n-1 and columns 0..m-1 hold substitution costs, column m holds
    deletion costs, row n holds insertion costs, and the corner is 0.
    """

    C: np.ndarray

    def __post_init__(self):
        C = np.array(self.C, dtype=np.float64)
        if C.ndim != 2 or C.shape[0] < 1 or C.shape[1] < 1:
            raise ValidationError("LSAPE matrix must be two-dimensional with at least one row and column")
        if not np.all(np.isfinite(C)):
            raise ValidationError("LSAPE matrix contains NaN or infinite entries")
        if np.any(C < 0):
            raise ValidationError("LSAPE matrix has negative entries")
        if C[-1, -1] != 0:
            raise ValidationError("corner entry of an LSAPE matrix must be 0")
        C.setflags(write=False)
        object.__setattr__(self, "C", C)

    @property
    def n(self) -> int:
        return self.C.shape[0] - 1

    @property
    def m(self) -> int:
        return self.C.shape[1] - 1

    @property
    def sub(self) -> np.ndarray:
        return self.C[:-1, :-1]

    @property
    def dele(self) -> np.ndarray:
        return self.C[:-1, -1]

    @property
    def ins(self) -> np.ndarray:
        return self.C[-1, :-1]

    def transpose(self) -> LsapeInstance:
        return LsapeInstance(self.C.T.copy())

    def is_triangular(self) -> bool:
        return bool(np.all(self.sub <= self.dele[:, None] + self.ins[None, :]))

    def cost(self, pi: NodeMap) -> float:
        n, m = self.n, self.m
        total = 0.0
        for i, k in enumerate(pi.forward):
            total += self.C[i, m if k == EPS_INDEX else k]
        for k in pi.insertions:
            total += self.C[n, k]
        return float(total)


@dataclass(frozen=True)
class LsapeSolution:
    matching: NodeMap
    cost: float


def _transposed_map(pi: NodeMap) -> NodeMap:
    return NodeMap(pi.backward, pi.forward)


def flwc_reduce(inst: LsapeInstance, triangular: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Reduce an LSAPE instance with n <= m to an n x m LSAP instance.

    Returns (C_bar, delta) where delta[i, k] is 1 when substituting i by k is
    no more expensive than deleting i and inserting k. With triangular=True
    the caller guarantees that this holds everywhere, and deletion costs are
    not read; if also n == m, insertion costs are not read either.
    """
    n, m = inst.n, inst.m
    if n > m:
        raise ValidationError("flwc_reduce expects n <= m; transpose first")
    sub = inst.sub
    shift = n < m
    if triangular:
        delta = np.ones((n, m), dtype=np.int8)
        if not shift:
            return sub.copy(), delta
        return sub - inst.ins[None, :], delta
    fact = inst.dele[:, None] + inst.ins[None, :]
    tri = sub <= fact
    delta = tri.astype(np.int8)
    C_bar = np.where(tri, sub, fact)
    if shift:
        C_bar = C_bar - inst.ins[None, :]
    return C_bar, delta


def _lift(row_to_col: np.ndarray, delta: np.ndarray, n: int, m: int) -> NodeMap:
    forward = []
    for i in range(n):
        k = int(row_to_col[i])
        forward.append(k if k >= 0 and delta[i, k] else EPS_INDEX)
    return NodeMap.from_forward(forward, m)


def flwc_solve(inst: LsapeInstance, triangular: bool | None = None, kernel: str | None = None) -> LsapeSolution:
    """Optimal LSAPE solution through one min(n,m) x max(n,m) LSAP."""
    transposed = inst.n > inst.m
    work = inst.transpose() if transposed else inst
    n, m = work.n, work.m
    if n == 0:
        pi = NodeMap.from_forward([], m)
    else:
        tri = work.is_triangular() if triangular is None else triangular
        C_bar, delta = flwc_reduce(work, tri)
        sol = solve_lsap(C_bar, kernel)
        pi = _lift(sol.row_to_col, delta, n, m)
    if transposed:
        pi = _transposed_map(pi)
    return LsapeSolution(pi, inst.cost(pi))


def ebp_matrix(inst: LsapeInstance) -> tuple[np.ndarray, float]:
    """The (n+m)x(m+n) LSAP blow-up and the omega used on forbidden cells."""
    n, m = inst.n, inst.m
    omega = 1.0 + float(inst.C.sum())
    B = np.zeros((n + m, m + n))
    B[:n, :m] = inst.sub
    B[:n, m:] = omega
    B[n:, :m] = omega
    B[np.arange(n), m + np.arange(n)] = inst.dele
    B[n + np.arange(m), np.arange(m)] = inst.ins
    return B, omega


def _collapse_ebp(row_to_col: np.ndarray, n: int, m: int) -> NodeMap:
    forward = []
    for i in range(n):
        k = int(row_to_col[i])
        forward.append(k if k < m else EPS_INDEX)
    return NodeMap.from_forward(forward, m)


def ebp_solve(inst: LsapeInstance, kernel: str | None = None) -> LsapeSolution:
    """Optimal LSAPE solution through the (n+m)x(m+n) LSAP blow-up."""
    n, m = inst.n, inst.m
    if n + m == 0:
        return LsapeSolution(NodeMap((), ()), 0.0)
    B, _ = ebp_matrix(inst)
    sol = solve_lsap(B, kernel)
    pi = _collapse_ebp(sol.row_to_col, n, m)
    return LsapeSolution(pi, inst.cost(pi))


def greedy_solve(inst: LsapeInstance) -> LsapeSolution:
    """Row-wise greedy: each row takes its cheapest still-free column or EPS.

    Deleting row i is preferred only when it beats substituting to column k
    and inserting k afterwards, so 1x1 instances are solved optimally.
    """
    n, m = inst.n, inst.m
    C = inst.C
    free = np.ones(m, dtype=bool)
    forward = []
    for i in range(n):
        row = np.where(free, C[i, :m], np.inf)
        k = int(np.argmin(row)) if m else -1
        if m and row[k] <= C[i, m] + C[n, k]:
            free[k] = False
            forward.append(k)
        else:
            forward.append(EPS_INDEX)
    pi = NodeMap.from_forward(forward, m)
    return LsapeSolution(pi, inst.cost(pi))


def solve_lsape(inst: LsapeInstance, solver: str = "optimal") -> LsapeSolution:
    if solver == "optimal":
        return flwc_solve(inst)
    if solver == "greedy":
        return greedy_solve(inst)
    raise ValidationError(f"unknown LSAPE solver {solver!r}")


def enumerate_optimal(inst: LsapeInstance, K: int, first: LsapeSolution | None = None) -> list[LsapeSolution]:
    """Up to K pairwise distinct optimal LSAPE solutions.

    Uses the duals of the blown-up LSAP: every optimal error-correcting
    matching only uses zero-slack cells, so a depth-first search over the
    zero-slack cells of each row, closed by a cost check, finds all optima.
    The solver's own optimum (or `first`) is always returned first.
    """
    if K < 1:
        raise ValidationError("K must be at least 1")
    n, m = inst.n, inst.m
    head = first if first is not None else flwc_solve(inst)
    out = [head]
    if K == 1 or n + m == 0:
        return out
    B, _ = ebp_matrix(inst)
    sol = solve_lsap(B)
    opt = head.cost
    tol = 1e-9 * (1.0 + float(np.abs(inst.C).max()))
    zero = sol.slack(B) <= tol
    seen = {head.matching.forward}
    for pi in _zero_slack_matchings(zero, n, m):
        if pi.forward in seen:
            continue
        c = inst.cost(pi)
        if abs(c - opt) <= tol * (1 + n + m):
            seen.add(pi.forward)
            out.append(LsapeSolution(pi, c))
            if len(out) >= K:
                break
    return out


def _zero_slack_matchings(zero: np.ndarray, n: int, m: int) -> Iterator[NodeMap]:
    options = []
    for i in range(n):
        opts = [k for k in range(m) if zero[i, k]]
        if zero[i, m + i]:
            opts.append(EPS_INDEX)
        options.append(opts)
    ins_ok = [bool(zero[n + k, k]) for k in range(m)]
    used = [False] * m
    forward = [EPS_INDEX] * n
    # Columns that cannot be inserted optimally must be taken by some row.
    must_cover = sum(1 for ok in ins_ok if not ok)

    def rec(i: int, uncovered: int) -> Iterator[NodeMap]:
        if uncovered > n - i:
            return
        if i == n:
            yield NodeMap.from_forward(forward, m)
            return
        for k in options[i]:
            left = uncovered
            if k != EPS_INDEX:
                if used[k]:
                    continue
                used[k] = True
                left -= not ins_ok[k]
            forward[i] = k
            yield from rec(i + 1, left)
            if k != EPS_INDEX:
                used[k] = False

    yield from rec(0, must_cover)


def lsape_cost(C: np.ndarray, kernel: str | None = None) -> float:
    """Optimal LSAPE cost of a raw (n+1)x(m+1) matrix, without building a matching.

    Skips instance validation; meant for the many small inner instances built
    by the heuristics.
    """
    if C.shape[0] > C.shape[1]:
        C = C.T
    n, m = C.shape[0] - 1, C.shape[1] - 1
    ins_total = float(C[n, :m].sum())
    if n == 0:
        return ins_total
    sub = C[:n, :m]
    fact = C[:n, m][:, None] + C[n, :m][None, :]
    C_bar = np.minimum(sub, fact)
    if n < m:
        C_bar = C_bar - C[n, :m][None, :]
        return solve_lsap(C_bar, kernel).cost + ins_total
    return solve_lsap(C_bar, kernel).cost
