"""Anytime lower bounds by iterated slack redistribution between branch instances."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .costs import EditCostModel, resolve_flags
from .errors import ValidationError
from .graph import EPS_INDEX, LabeledGraph, NodeMap, induced_edit_cost
from .heuristics import BoundReport
from .lsap import solve_lsap


class _Dummy:
    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name

    def __reduce__(self):
        return (_dummy_by_name, (self.name,))


def _dummy_by_name(name: str) -> _Dummy:
    return DUMMY_NODE if name == "DUMMY_NODE" else DUMMY_EDGE


DUMMY_NODE = _Dummy("DUMMY_NODE")
DUMMY_EDGE = _Dummy("DUMMY_EDGE")


class PaddedCosts(EditCostModel):
    """Costs on padded graphs: dummy nodes and edges stand for absence."""

    def __init__(self, base: EditCostModel):
        self.base = base

    def node_sub(self, a, b):
        if a is DUMMY_NODE:
            return 0.0 if b is DUMMY_NODE else self.base.node_ins(b)
        if b is DUMMY_NODE:
            return self.base.node_del(a)
        return self.base.node_sub(a, b)

    def node_del(self, a):
        return 0.0 if a is DUMMY_NODE else self.base.node_del(a)

    def node_ins(self, b):
        return 0.0 if b is DUMMY_NODE else self.base.node_ins(b)

    def edge_sub(self, a, b):
        if a is DUMMY_EDGE:
            return 0.0 if b is DUMMY_EDGE else self.base.edge_ins(b)
        if b is DUMMY_EDGE:
            return self.base.edge_del(a)
        return self.base.edge_sub(a, b)

    def edge_del(self, a):
        return 0.0 if a is DUMMY_EDGE else self.base.edge_del(a)

    def edge_ins(self, b):
        return 0.0 if b is DUMMY_EDGE else self.base.edge_ins(b)


@dataclass(frozen=True)
class PaddedPair:
    G: LabeledGraph
    H: LabeledGraph
    N: int
    costs: PaddedCosts
    n: int  # original sizes
    m: int


def padded_size(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel) -> int:
    if resolve_flags(costs, G, H).quasimetric:
        return max(G.n, H.n)
    return G.n + H.n


def _pad(G: LabeledGraph, N: int) -> LabeledGraph:
    labels = G.node_labels + (DUMMY_NODE,) * (N - G.n)
    edges = {(i, k): (G.edge_label(i, k) if i < G.n and k < G.n and G.has_edge(i, k) else DUMMY_EDGE)
             for i in range(N) for k in range(i + 1, N)}
    return LabeledGraph(labels, edges, G.graph_id, G.class_tag)


def pad_pair(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, N: int | None = None) -> PaddedPair:
    """Equal-size complete graphs whose GED equals that of (G, H)."""
    N = padded_size(G, H, costs) if N is None else N
    if N < max(G.n, H.n):
        raise ValidationError("padded size smaller than a graph")
    return PaddedPair(_pad(G, N), _pad(H, N), N, PaddedCosts(costs), G.n, H.n)


def _tables(P: PaddedPair) -> tuple[np.ndarray, np.ndarray]:
    """Node cost matrix (N x N) and half edge costs C4[i, k, j, l]."""
    N, costs = P.N, P.costs
    V = np.array([[costs.node_sub(a, b) for b in P.H.node_labels] for a in P.G.node_labels]).reshape(N, N)
    labels: dict = {}
    for g in (P.G, P.H):
        for lab in g.edge_labels.values():
            labels.setdefault(lab, len(labels))
    labels.setdefault(DUMMY_EDGE, len(labels))
    inv = list(labels)
    T = np.array([[costs.edge_sub(a, b) for b in inv] for a in inv]).reshape(len(inv), len(inv))

    def ids(g: LabeledGraph) -> np.ndarray:
        M = np.full((N, N), labels[DUMMY_EDGE], dtype=np.int64)
        for (i, k), lab in g.edge_labels.items():
            M[i, k] = M[k, i] = labels[lab]
        return M

    EG, EH = ids(P.G), ids(P.H)
    C4 = 0.5 * T[EG[:, None, :, None], EH[None, :, None, :]]
    return V, C4


def _node_map(pairs: np.ndarray, n: int, m: int) -> NodeMap:
    forward = [EPS_INDEX] * n
    for i in range(n):
        k = int(pairs[i])
        forward[i] = k if k < m else EPS_INDEX
    return NodeMap.from_forward(forward, m)


def branch_tight(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, I: int = 20, eps: float = 2.0 ** -10,
                 time_limit: float | None = None, workers: int = 1, N: int | None = None) -> BoundReport:
    """Monotone lower bounds LB_1 <= LB_2 <= ... and the best induced upper bound.

    Returns LB of the last iteration; lb_sequence lists every LB_r.
    """
    if I < 2:
        raise ValidationError("BRANCH-TIGHT needs at least two iterations")
    if eps < 0:
        raise ValidationError("convergence threshold must be nonnegative")
    start = time.perf_counter()
    P = pad_pair(G, H, costs, N)
    N = P.N
    best_map = NodeMap.from_forward([EPS_INDEX] * G.n, H.n)
    best = induced_edit_cost(G, H, costs, best_map)
    if N <= 1:
        lb = float(_tables(P)[0].sum()) if N == 1 else 0.0
        pi = _node_map(np.zeros(1, dtype=np.int64), G.n, H.n) if N == 1 else best_map
        ub = induced_edit_cost(G, H, costs, pi)
        return BoundReport(lb, ub, pi, time.perf_counter() - start, (lb,), {"iterations": 1, "converged": True, "N": N})
    V, C4 = _tables(P)
    rest = [np.array([j for j in range(N) if j != i], dtype=np.int64) for i in range(N)]
    S4 = np.zeros_like(C4)
    inner_val = np.zeros((N, N))
    s_outer = np.zeros((N, N))
    cells = [(i, k) for i in range(N) for k in range(N)]

    def solve_inner(cell: tuple[int, int]) -> None:
        i, k = cell
        sub = C4[i, k][np.ix_(rest[i], rest[k])]
        sol = solve_lsap(sub)
        inner_val[i, k] = sol.cost
        S4[i, k][np.ix_(rest[i], rest[k])] = sol.slack(sub)

    lbs: list[float] = []
    converged = False
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for r in range(1, I + 1):
            if r > 1:
                # Move slack between the inner instances of (i, k) and (j, l).
                C4 = C4 - S4 - s_outer[:, :, None, None] / (N - 1) + S4.transpose(2, 3, 0, 1) \
                    + s_outer[None, None, :, :] / (N - 1)
            if pool is not None:
                list(pool.map(solve_inner, cells))
            else:
                for cell in cells:
                    solve_inner(cell)
            Cr = V + inner_val
            outer = solve_lsap(Cr)
            s_outer = outer.slack(Cr)
            lbs.append(outer.cost)
            pi = _node_map(outer.row_to_col, G.n, H.n)
            ub = induced_edit_cost(G, H, costs, pi)
            if ub < best:
                best, best_map = ub, pi
            if r >= 2:
                prev = lbs[-2]
                gain = (lbs[-1] - prev) / prev if prev > 0 else (0.0 if lbs[-1] == 0 else np.inf)
                if gain < eps:
                    converged = True
                    break
                if time_limit is not None and time.perf_counter() - start > time_limit:
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    return BoundReport(lbs[-1], best, best_map, time.perf_counter() - start, tuple(lbs),
                       {"iterations": len(lbs), "converged": converged, "N": N})
