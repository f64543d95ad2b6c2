"""LSAPE based bounds: instance builders, the solve-and-bound driver, HED and BRANCH-COMPACT."""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .costs import (
    EditCostModel,
    edge_constants,
    node_cost_matrix,
    uniform_constant,
)
from .errors import BoundViolation, ConfigurationError, ValidationError
from .graph import LabeledGraph, NodeMap, _gamma_counts, induced_edit_cost, label_key
from .lsape import LsapeInstance, enumerate_optimal, lsape_cost, solve_lsape


@dataclass(frozen=True)
class BoundReport:
    """Output of a bound computation.

    upper_bound is the induced cost of node_map. lower_bound is None for
    methods that do not certify one. lb_sequence holds per-iteration lower
    bounds for anytime methods.
    """

    lower_bound: float | None
    upper_bound: float
    node_map: NodeMap
    wall_time: float
    lb_sequence: tuple[float, ...] = ()
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.lower_bound is not None and self.lower_bound > self.upper_bound + 1e-9 * (1 + abs(self.upper_bound)):
            raise BoundViolation(f"lower bound {self.lower_bound} exceeds upper bound {self.upper_bound}")


@dataclass(frozen=True)
class LowerBoundReport:
    """Output of methods that produce a lower bound but no node map."""

    lower_bound: float
    wall_time: float
    upper_bound: None = None
    node_map: None = None


@dataclass(frozen=True)
class MethodInstance:
    """An LSAPE instance and its scaling factor; zeta None means no lower bound."""

    instance: LsapeInstance
    zeta: float | None


Builder = Callable[..., MethodInstance]


# --- helpers -----------------------------------------------------------------


def _fill_rows(n: int, m: int, cell: Callable[[int, int], float], workers: int) -> np.ndarray:
    """Evaluate cell(i, k) over the n x m substitution block.

    Rows are independent, so the result does not depend on the worker count.
    """
    out = np.zeros((n, m))

    def row(i: int) -> None:
        for k in range(m):
            out[i, k] = cell(i, k)

    if workers > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(row, range(n)))
    else:
        for i in range(n):
            row(i)
    return out


def _assemble(sub: np.ndarray, dele: np.ndarray, ins: np.ndarray) -> LsapeInstance:
    n, m = sub.shape
    C = np.zeros((n + 1, m + 1))
    C[:n, :m] = sub
    C[:n, m] = dele
    C[n, :m] = ins
    return LsapeInstance(C)


def _sorted_labels(labels) -> tuple:
    return tuple(sorted(labels, key=label_key))


def _incident_edge_matrix(costs: EditCostModel, A: tuple, B: tuple) -> np.ndarray:
    d, e = len(A), len(B)
    C = np.zeros((d + 1, e + 1))
    for j, a in enumerate(A):
        for l, b in enumerate(B):
            C[j, l] = costs.edge_sub(a, b)
        C[j, e] = costs.edge_del(a)
    for l, b in enumerate(B):
        C[d, l] = costs.edge_ins(b)
    return C


def max_degree(G: LabeledGraph, H: LabeledGraph) -> int:
    return max(G.max_degree(), H.max_degree())


# --- instance builders -------------------------------------------------------


def node_instance(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, **_) -> MethodInstance:
    """Node costs only; edges are ignored."""
    return MethodInstance(LsapeInstance(node_cost_matrix(costs, G, H)), 1.0)


def _half_edge_edits(costs: EditCostModel, G: LabeledGraph, H: LabeledGraph) -> tuple[np.ndarray, np.ndarray]:
    dele = np.array([costs.node_del(G.node_labels[i]) + 0.5 * sum(costs.edge_del(b) for b in G.incident_labels(i))
                     for i in range(G.n)])
    ins = np.array([costs.node_ins(H.node_labels[k]) + 0.5 * sum(costs.edge_ins(b) for b in H.incident_labels(k))
                    for k in range(H.n)])
    return dele, ins


def branch_cell_matrix(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, workers: int = 1) -> np.ndarray:
    """LSAPE cost of every incident-edge instance, indexed by (i, k)."""
    inc_g = [_sorted_labels(G.incident_labels(i)) for i in range(G.n)]
    inc_h = [_sorted_labels(H.incident_labels(k)) for k in range(H.n)]
    # Cells with equal incident label multisets share their value; the cache
    # only stores deterministic results, so concurrent filling is safe.
    cache: dict = {}

    def cell(i: int, k: int) -> float:
        key = (inc_g[i], inc_h[k])
        v = cache.get(key)
        if v is None:
            v = cache[key] = lsape_cost(_incident_edge_matrix(costs, *key))
        return v

    return _fill_rows(G.n, H.n, cell, workers)


def branch_instance(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, workers: int = 1, **_) -> MethodInstance:
    """Node cost plus half the optimal edit cost between incident edge sets."""
    node = node_cost_matrix(costs, G, H)
    edge = branch_cell_matrix(G, H, costs, workers)
    dele, ins = _half_edge_edits(costs, G, H)
    return MethodInstance(_assemble(node[:-1, :-1] + 0.5 * edge, dele, ins), 1.0)


def branch_fast_instance(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, workers: int = 1,
                         **_) -> MethodInstance:
    """BRANCH with the inner LSAPE replaced by Gamma over per-cell minimal costs."""
    n, m = G.n, H.n
    inc_g = [G.incident_labels(i) for i in range(n)]
    inc_h = [H.incident_labels(k) for k in range(m)]
    cnt_g = [Counter(a) for a in inc_g]
    cnt_h = [Counter(b) for b in inc_h]
    del_min = [min((costs.edge_del(a) for a in A), default=0.0) for A in inc_g]
    ins_min = [min((costs.edge_ins(b) for b in B), default=0.0) for B in inc_h]
    sub_cache: dict = {}

    def sub_min(a, b) -> float:
        v = sub_cache.get((a, b))
        if v is None:
            v = sub_cache[(a, b)] = costs.edge_sub(a, b)
        return v

    node = node_cost_matrix(costs, G, H)

    def cell(i: int, k: int) -> float:
        A, B = cnt_g[i], cnt_h[k]
        s = min((sub_min(a, b) for a in A for b in B if a != b), default=0.0)
        # Replacing a paid substitution by deletion plus insertion keeps
        # Gamma below the inner LSAPE optimum for non-triangular costs.
        s = min(s, del_min[i] + ins_min[k])
        common = sum((A & B).values())
        return node[i, k] + 0.5 * _gamma_counts(len(inc_g[i]), len(inc_h[k]), common, s, del_min[i], ins_min[k])

    sub = _fill_rows(n, m, cell, workers)
    dele = np.array([node[i, m] + 0.5 * len(inc_g[i]) * del_min[i] for i in range(n)])
    ins = np.array([node[n, k] + 0.5 * len(inc_h[k]) * ins_min[k] for k in range(m)])
    return MethodInstance(_assemble(sub, dele, ins), 1.0)


def branch_const_instance(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, fallback: bool = False,
                          workers: int = 1, **_) -> MethodInstance:
    """Branch instance for constant edge costs."""
    es, ed, ei = edge_constants(costs, G, H, fallback)
    es = min(es, ed + ei)
    n, m = G.n, H.n
    cnt_g = [Counter(G.incident_labels(i)) for i in range(n)]
    cnt_h = [Counter(H.incident_labels(k)) for k in range(m)]
    node = node_cost_matrix(costs, G, H)

    def cell(i: int, k: int) -> float:
        A, B = cnt_g[i], cnt_h[k]
        common = sum((A & B).values())
        return node[i, k] + 0.5 * _gamma_counts(G.degree(i), H.degree(k), common, es, ed, ei)

    sub = _fill_rows(n, m, cell, workers)
    dele = np.array([node[i, m] + 0.5 * G.degree(i) * ed for i in range(n)])
    ins = np.array([node[n, k] + 0.5 * H.degree(k) * ei for k in range(m)])
    return MethodInstance(_assemble(sub, dele, ins), 1.0)


def star_instance(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, fallback: bool = False,
                  workers: int = 1, **_) -> MethodInstance:
    """Star structures (node label plus neighbor labels) under uniform costs."""
    c = uniform_constant(costs, G, H, fallback)
    n, m = G.n, H.n
    nb_g = [Counter(G.node_labels[j] for j in G.neighbors(i)) for i in range(n)]
    nb_h = [Counter(H.node_labels[l] for l in H.neighbors(k)) for k in range(m)]

    def cell(i: int, k: int) -> float:
        dg, dh = G.degree(i), H.degree(k)
        common = sum((nb_g[i] & nb_h[k]).values())
        diff = G.node_labels[i] != H.node_labels[k]
        return _gamma_counts(dg, dh, common, c, c, c) + c * (diff + max(dg, dh) - min(dg, dh))

    sub = _fill_rows(n, m, cell, workers)
    dele = np.array([c * (1 + 2 * G.degree(i)) for i in range(n)])
    ins = np.array([c * (1 + 2 * H.degree(k)) for k in range(m)])
    zeta = 1.0 / max(4, max_degree(G, H) + 1)
    return MethodInstance(_assemble(sub, dele, ins), zeta)


# --- centralities ------------------------------------------------------------


def degree_centrality(G: LabeledGraph) -> np.ndarray:
    return np.array([float(G.degree(i)) for i in range(G.n)])


def pagerank(G: LabeledGraph, damping: float = 0.85, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Pagerank by power iteration; isolated nodes spread their mass uniformly."""
    n = G.n
    if n == 0:
        return np.zeros(0)
    x = np.full(n, 1.0 / n)
    deg = np.array([G.degree(i) for i in range(n)], dtype=np.float64)
    for _ in range(max_iter):
        nxt = np.zeros(n)
        for i, k in G.edges:
            nxt[k] += x[i] / deg[i]
            nxt[i] += x[k] / deg[k]
        dangling = x[deg == 0].sum()
        nxt = damping * (nxt + dangling / n) + (1 - damping) / n
        done = np.abs(nxt - x).sum() < tol
        x = nxt
        if done:
            break
    return x


CENTRALITY_MEASURES = {"degree": degree_centrality, "pagerank": pagerank}


def centrality_blend(inst: LsapeInstance, G: LabeledGraph, H: LabeledGraph, measure: str,
                     gamma: float) -> LsapeInstance:
    """Blend each cell with the centrality difference of its endpoints."""
    if not 0 <= gamma <= 1:
        raise ValidationError("gamma must lie in [0, 1]")
    try:
        phi = CENTRALITY_MEASURES[measure]
    except KeyError:
        raise ConfigurationError(f"unknown centrality measure {measure!r}") from None
    pg, ph = phi(G), phi(H)
    n, m = G.n, H.n
    C = (1 - gamma) * inst.C
    C[:n, :m] += gamma * np.abs(pg[:, None] - ph[None, :])
    C[:n, m] += gamma * pg
    C[n, :m] += gamma * ph
    return LsapeInstance(C)


# --- paradigm ----------------------------------------------------------------


def run_lsape_method(builder: Builder, G: LabeledGraph, H: LabeledGraph, costs: EditCostModel,
                     solver: str = "optimal", multi_sol_K: int = 1,
                     centrality: tuple[str, float] | None = None, fallback: bool = False,
                     workers: int = 1, **options) -> BoundReport:
    """Build an LSAPE instance, solve it, and derive upper and lower bounds.

    With multi_sol_K > 1, up to that many optimal solutions are enumerated and
    the cheapest induced cost is kept. A centrality (measure, gamma) adds a
    second, blended instance whose solution competes for the upper bound.
    """
    if multi_sol_K < 1:
        raise ValidationError("multi_sol_K must be at least 1")
    if multi_sol_K > 1 and solver != "optimal":
        raise ConfigurationError("enumerating several optima requires the optimal solver")
    start = time.perf_counter()
    built = builder(G, H, costs, fallback=fallback, workers=workers, **options)
    inst = built.instance
    first = solve_lsape(inst, solver)
    candidates = [first.matching]
    if multi_sol_K > 1:
        candidates = [s.matching for s in enumerate_optimal(inst, multi_sol_K, first)]
    if centrality is not None:
        measure, gamma = centrality
        blended = centrality_blend(inst, G, H, measure, gamma)
        candidates.append(solve_lsape(blended, solver).matching)
    best_map, best = None, float("inf")
    for pi in candidates:
        c = induced_edit_cost(G, H, costs, pi)
        if c < best:
            best_map, best = pi, c
    lb = None
    if built.zeta is not None and solver == "optimal":
        lb = built.zeta * first.cost
    return BoundReport(lb, best, best_map, time.perf_counter() - start)


# --- lower bounds without node maps ------------------------------------------


def hed_lower_bound(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, workers: int = 1,
                    **_) -> LowerBoundReport:
    """Half the row minima plus half the column minima of the branch instance."""
    start = time.perf_counter()
    C = branch_instance(G, H, costs, workers=workers).instance.C
    n, m = G.n, H.n
    lb = 0.5 * float(C[:n].min(axis=1).sum()) + 0.5 * float(C[:, :m].min(axis=0).sum())
    return LowerBoundReport(lb, time.perf_counter() - start)


def branch_compact_lower_bound(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, fallback: bool = False,
                               **_) -> LowerBoundReport:
    """Lower bound for uniform costs from exact and label-only branch matches."""
    start = time.perf_counter()
    c = uniform_constant(costs, G, H, fallback)
    bg = sorted(((label_key(G.node_labels[i]), _branch_key(G, i)) for i in range(G.n)))
    bh = sorted(((label_key(H.node_labels[k]), _branch_key(H, k)) for k in range(H.n)))
    rest_g, rest_h, d1 = _merge_equal(bg, bh, lambda b: b)
    _, _, d2 = _merge_equal(rest_g, rest_h, lambda b: b[0])
    lb = 0.5 * c * d2 + c * (max(G.n, H.n) - d1 - d2)
    return LowerBoundReport(lb, time.perf_counter() - start)


def _branch_key(G: LabeledGraph, i: int) -> tuple:
    return tuple(sorted(label_key(b) for b in G.incident_labels(i)))


def _merge_equal(A: list, B: list, key) -> tuple[list, list, int]:
    """Parallel scan over two sorted lists removing pairs with equal keys."""
    rest_a, rest_b = [], []
    i = j = matched = 0
    while i < len(A) and j < len(B):
        ka, kb = key(A[i]), key(B[j])
        if ka == kb:
            matched += 1
            i += 1
            j += 1
        elif ka < kb:
            rest_a.append(A[i])
            i += 1
        else:
            rest_b.append(B[j])
            j += 1
    rest_a.extend(A[i:])
    rest_b.extend(B[j:])
    return rest_a, rest_b, matched
