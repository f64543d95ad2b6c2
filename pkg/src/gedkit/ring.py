"""Rings rooted at nodes and the RING instance builder."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass

import numpy as np

from .costs import EditCostModel
from .errors import ValidationError
from .graph import EPS_INDEX, LabeledGraph, _gamma_counts
from .heuristics import MethodInstance, _fill_rows
from .lsape import LsapeInstance, lsape_cost

STRATEGIES = ("OPTIMAL_LSAPE", "MULTISET")


@dataclass(frozen=True)
class Layer:
    nodes: frozenset[int]
    outer_edges: frozenset[tuple[int, int]]
    inner_edges: frozenset[tuple[int, int]]


EMPTY_LAYER = Layer(frozenset(), frozenset(), frozenset())


@dataclass(frozen=True)
class Ring:
    layers: tuple[Layer, ...]


@dataclass(frozen=True)
class RingParams:
    L: int = 1
    alpha: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    lam: tuple[float, ...] | None = None  # uniform over L layers when None
    strategy: str = "OPTIMAL_LSAPE"

    def __post_init__(self):
        if self.L < 1:
            raise ValidationError("L must be at least 1")
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"unknown set distance strategy {self.strategy!r}")
        lam = tuple([1.0 / self.L] * self.L) if self.lam is None else tuple(float(x) for x in self.lam)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "alpha", tuple(float(x) for x in self.alpha))
        for name, vec, size in (("alpha", self.alpha, 3), ("lambda", lam, self.L)):
            if len(vec) != size or min(vec) < 0 or abs(sum(vec) - 1) > 1e-9:
                raise ValidationError(f"{name} must be a simplex vector of length {size}")


def build_ring(G: LabeledGraph, root: int, L: int) -> Ring:
    """Breadth-first layers around root; root -1 gives the empty ring."""
    if L < 1:
        raise ValidationError("L must be at least 1")
    if root == EPS_INDEX:
        return Ring((EMPTY_LAYER,) * L)
    dist = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        if dist[u] >= L:
            continue
        for w in G.neighbors(u):
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    nodes: list[set] = [set() for _ in range(L)]
    outer: list[set] = [set() for _ in range(L)]
    inner: list[set] = [set() for _ in range(L)]
    for u, d in dist.items():
        if d < L:
            nodes[d].add(u)
    for i, k in G.edges:
        di, dk = dist.get(i), dist.get(k)
        if di is None or dk is None:
            continue
        if di == dk and di < L:
            inner[di].add((i, k))
        elif abs(di - dk) == 1 and min(di, dk) < L:
            outer[min(di, dk)].add((i, k))
    return Ring(tuple(Layer(frozenset(nodes[l]), frozenset(outer[l]), frozenset(inner[l])) for l in range(L)))


def _lsape_set_distance(A: list, B: list, sub, dele, ins) -> float:
    C = np.zeros((len(A) + 1, len(B) + 1))
    for j, a in enumerate(A):
        for l, b in enumerate(B):
            C[j, l] = sub(a, b)
        C[j, -1] = dele(a)
    for l, b in enumerate(B):
        C[-1, l] = ins(b)
    return lsape_cost(C)


def _multiset_set_distance(A: list, B: list, sub, dele, ins) -> float:
    subs = [sub(a, b) for a in A for b in B if a != b]
    c_sub = sum(subs) / len(subs) if subs else 0.0
    c_del = sum(dele(a) for a in A) / len(A) if A else 0.0
    c_ins = sum(ins(b) for b in B) / len(B) if B else 0.0
    common = sum((Counter(A) & Counter(B)).values())
    return _gamma_counts(len(A), len(B), common, c_sub, c_del, c_ins)


def set_distance(A: list, B: list, sub, dele, ins, strategy: str) -> float:
    if strategy == "OPTIMAL_LSAPE":
        return _lsape_set_distance(A, B, sub, dele, ins)
    return _multiset_set_distance(A, B, sub, dele, ins)


def _layer_labels(G: LabeledGraph | None, layer: Layer) -> tuple[list, list, list]:
    if G is None:
        return [], [], []
    return ([G.node_labels[u] for u in sorted(layer.nodes)],
            [G.edge_label(*e) for e in sorted(layer.inner_edges)],
            [G.edge_label(*e) for e in sorted(layer.outer_edges)])


def ring_distance(lg: list, lh: list, costs: EditCostModel, params: RingParams) -> float:
    """Weighted layer distances between two rings given as per-layer label lists."""
    a0, a1, a2 = params.alpha
    total = 0.0
    for l in range(params.L):
        (ng, ig, og), (nh, ih, oh) = lg[l], lh[l]
        d = 0.0
        if a0:
            d += a0 * set_distance(ng, nh, costs.node_sub, costs.node_del, costs.node_ins, params.strategy) \
                / max(len(ng), len(nh), 1)
        if a1:
            d += a1 * set_distance(ig, ih, costs.edge_sub, costs.edge_del, costs.edge_ins, params.strategy) \
                / max(len(ig), len(ih), 1)
        if a2:
            d += a2 * set_distance(og, oh, costs.edge_sub, costs.edge_del, costs.edge_ins, params.strategy) \
                / max(len(og), len(oh), 1)
        total += params.lam[l] * d
    return total


def ring_instance(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, params: RingParams | None = None,
                  workers: int = 1, **_) -> MethodInstance:
    """Cells are ring distances; deletion and insertion compare against the empty ring."""
    params = params or RingParams()
    L = params.L
    rg = [[_layer_labels(G, lay) for lay in build_ring(G, i, L).layers] for i in range(G.n)]
    rh = [[_layer_labels(H, lay) for lay in build_ring(H, k, L).layers] for k in range(H.n)]
    empty = [([], [], [])] * L
    sub = _fill_rows(G.n, H.n, lambda i, k: ring_distance(rg[i], rh[k], costs, params), workers)
    dele = np.array([ring_distance(rg[i], empty, costs, params) for i in range(G.n)])
    ins = np.array([ring_distance(empty, rh[k], costs, params) for k in range(H.n)])
    C = np.zeros((G.n + 1, H.n + 1))
    C[:G.n, :H.n] = sub
    C[:G.n, H.n] = dele
    C[G.n, :H.n] = ins
    return MethodInstance(LsapeInstance(C), None)


def default_ring_params(graphs, **overrides) -> RingParams:
    """L = 1 + largest diameter over the graphs, uniform weights."""
    L = 1 + max((diameter(g) for g in graphs), default=0)
    return RingParams(L=overrides.pop("L", L), **overrides)


def diameter(G: LabeledGraph) -> int:
    """Largest finite shortest-path distance."""
    best = 0
    for s in range(G.n):
        dist = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in G.neighbors(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        best = max(best, max(dist.values()))
    return best
