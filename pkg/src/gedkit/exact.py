"""Exact GED: brute force, node-based A* and DFS, and edge-based CSI search."""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .costs import EditCostModel, present_labels, resolve_flags, verify_flags
from .errors import BudgetExceeded, CapExceeded, ConfigurationError, ValidationError
from .graph import EPS_INDEX, LabeledGraph, NodeMap, _gamma_counts, induced_edit_cost, label_key
from .heuristics import BoundReport, branch_instance, run_lsape_method
from .lsape import LsapeInstance, flwc_solve, lsape_cost

MODES = ("LSAPE", "MULTISET")


# --- brute force -------------------------------------------------------------


def all_node_maps(n: int, m: int) -> Iterator[NodeMap]:
    """Every node map between graphs of sizes n and m."""
    forward = [EPS_INDEX] * n
    used = [False] * m

    def rec(i: int) -> Iterator[NodeMap]:
        if i == n:
            yield NodeMap.from_forward(forward, m)
            return
        forward[i] = EPS_INDEX
        yield from rec(i + 1)
        for k in range(m):
            if not used[k]:
                used[k] = True
                forward[i] = k
                yield from rec(i + 1)
                used[k] = False
        forward[i] = EPS_INDEX

    yield from rec(0)


def brute_force_ged(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, cap: int = 10) -> tuple[float, NodeMap]:
    """Minimum induced cost over all node maps. Refuses graphs above the size cap."""
    if G.n + H.n > cap:
        raise CapExceeded(f"brute force limited to {cap} nodes in total, got {G.n + H.n}")
    best, best_map = float("inf"), None
    for pi in all_node_maps(G.n, H.n):
        c = induced_edit_cost(G, H, costs, pi)
        if c < best:
            best, best_map = c, pi
    return best, best_map  # type: ignore[return-value]


# --- node-based search -------------------------------------------------------


def node_order(G: LabeledGraph) -> tuple[int, ...]:
    """Processing order: decreasing degree, then label, then index."""
    return tuple(sorted(range(G.n), key=lambda i: (-G.degree(i), label_key(G.node_labels[i]), i)))


@dataclass(frozen=True)
class PartialNodeMap:
    """Assignments for the first `level` nodes of a fixed order of G's nodes.

    targets[j] is the H-node (or -1) assigned to order[j]; cost is the edit
    cost induced on the nodes and edges among assigned nodes and their images.
    """

    order: tuple[int, ...]
    targets: tuple[int, ...]
    used: frozenset[int]
    cost: float

    @property
    def level(self) -> int:
        return len(self.targets)

    def is_left_complete(self) -> bool:
        return self.level == len(self.order)


class _NodeSearch:
    """Shared data for bounding partial node maps of one graph pair."""

    def __init__(self, G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, mode: str = "LSAPE"):
        if mode not in MODES:
            raise ValidationError(f"unknown bound mode {mode!r}")
        self.G, self.H, self.costs, self.mode = G, H, costs, mode
        n, m = G.n, H.n
        self.order = node_order(G)
        self.pos = {u: j for j, u in enumerate(self.order)}
        self.NC = np.zeros((n + 1, m + 1))
        for i, a in enumerate(G.node_labels):
            for k, b in enumerate(H.node_labels):
                self.NC[i, k] = costs.node_sub(a, b)
            self.NC[i, m] = costs.node_del(a)
        for k, b in enumerate(H.node_labels):
            self.NC[n, k] = costs.node_ins(b)
        ge, he = G.edges, H.edges
        self.EC = np.zeros((len(ge) + 1, len(he) + 1))
        for j, (a, b) in enumerate(ge):
            la = G.edge_label(a, b)
            for l, (c, d) in enumerate(he):
                self.EC[j, l] = costs.edge_sub(la, H.edge_label(c, d))
            self.EC[j, -1] = costs.edge_del(la)
        for l, (c, d) in enumerate(he):
            self.EC[-1, l] = costs.edge_ins(H.edge_label(c, d))
        self.h_ends = (np.array([e[0] for e in he], dtype=np.int64), np.array([e[1] for e in he], dtype=np.int64))
        # G edges with an unassigned endpoint, per level.
        self.open_g_edges = []
        for level in range(n + 1):
            later = set(self.order[level:])
            self.open_g_edges.append(np.array([j for j, (a, b) in enumerate(ge) if a in later or b in later],
                                              dtype=np.int64))
        self.edge_ins_total = float(self.EC[-1, :-1].sum())
        if mode == "MULTISET":
            self._init_multiset()

    def _init_multiset(self) -> None:
        G, H, costs = self.G, self.H, self.costs
        flags = resolve_flags(costs, G, H)
        if not (flags.constant_node and flags.constant_edge and flags.triangular_node and flags.triangular_edge):
            raise ConfigurationError("multiset bounds require constant triangular node and edge costs")
        nl, el = present_labels(G, H)
        nid = {a: j for j, a in enumerate(nl)}
        eid = {b: j for j, b in enumerate(el)}
        self.n_labels, self.e_labels = len(nl), len(el)
        self.g_nl = np.array([nid[a] for a in G.node_labels], dtype=np.int64)
        self.h_nl = np.array([nid[b] for b in H.node_labels], dtype=np.int64)
        self.g_el = np.array([eid[G.edge_label(*e)] for e in G.edges], dtype=np.int64)
        self.h_el = np.array([eid[H.edge_label(*e)] for e in H.edges], dtype=np.int64)
        self.node_consts = _constants(costs.node_sub, costs.node_del, costs.node_ins, nl)
        self.edge_consts = _constants(costs.edge_sub, costs.edge_del, costs.edge_ins, el)

    # partial cost of assigning the next node
    def step_cost(self, targets: tuple[int, ...], used: frozenset[int], k: int) -> float:
        G, H, costs = self.G, self.H, self.costs
        level = len(targets)
        u = self.order[level]
        c = self.NC[u, H.n if k == EPS_INDEX else k]
        for j, beta in G.neighbors(u).items():
            p = self.pos[j]
            if p >= level:
                continue
            kj = targets[p]
            if k != EPS_INDEX and kj != EPS_INDEX and H.has_edge(k, kj):
                c += costs.edge_sub(beta, H.edge_label(k, kj))
            else:
                c += costs.edge_del(beta)
        if k != EPS_INDEX:
            for l, beta in H.neighbors(k).items():
                if l not in used:
                    continue
                pre = self._preimage(targets, l)
                if not G.has_edge(u, pre):
                    c += costs.edge_ins(beta)
        return float(c)

    def _preimage(self, targets: tuple[int, ...], l: int) -> int:
        return self.order[targets.index(l)]

    def bound(self, targets: tuple[int, ...], used: frozenset[int], cost: float) -> float:
        level = len(targets)
        n, m = self.G.n, self.H.n
        free_g = np.array(self.order[level:], dtype=np.int64)
        used_mask = np.zeros(m, dtype=bool)
        used_mask[list(used)] = True
        free_h = np.flatnonzero(~used_mask)
        hu, hv = self.h_ends
        open_h = np.flatnonzero(~(used_mask[hu] & used_mask[hv]))
        open_g = self.open_g_edges[level]
        if self.mode == "LSAPE":
            node = lsape_cost(self.NC[np.ix_(np.append(free_g, n), np.append(free_h, m))])
            edge = lsape_cost(self.EC[np.ix_(np.append(open_g, -1), np.append(open_h, -1))])
        else:
            node = _gamma_ids(self.g_nl[free_g], self.h_nl[free_h], self.n_labels, *self.node_consts)
            edge = _gamma_ids(self.g_el[open_g], self.h_el[open_h], self.e_labels, *self.edge_consts)
        return cost + node + edge

    def root(self) -> PartialNodeMap:
        return PartialNodeMap(self.order, (), frozenset(), 0.0)

    def children(self, p: PartialNodeMap) -> Iterator[PartialNodeMap]:
        for k in list(range(self.H.n)) + [EPS_INDEX]:
            if k in p.used:
                continue
            c = p.cost + self.step_cost(p.targets, p.used, k)
            used = p.used | {k} if k != EPS_INDEX else p.used
            yield PartialNodeMap(self.order, p.targets + (k,), used, c)

    def complete_cost(self, p: PartialNodeMap) -> float:
        """Cost of the unique node map extending a left-complete partial map."""
        m = self.H.n
        total = p.cost
        total += float(sum(self.NC[-1, k] for k in range(m) if k not in p.used))
        for l, (c, d) in enumerate(self.H.edges):
            if c not in p.used or d not in p.used:
                total += self.EC[-1, l]
        return total

    def to_node_map(self, p: PartialNodeMap) -> NodeMap:
        forward = [EPS_INDEX] * self.G.n
        for j, k in enumerate(p.targets):
            forward[self.order[j]] = k
        return NodeMap.from_forward(forward, self.H.n)


def _constants(sub, dele, ins, labels) -> tuple[float, float, float]:
    subs = [sub(a, b) for a in labels for b in labels if a != b]
    return (subs[0] if subs else 0.0, dele(labels[0]) if labels else 0.0, ins(labels[0]) if labels else 0.0)


def _gamma_ids(A: np.ndarray, B: np.ndarray, num_labels: int, c_sub: float, c_del: float, c_ins: float) -> float:
    if num_labels == 0:
        return 0.0
    common = int(np.minimum(np.bincount(A, minlength=num_labels), np.bincount(B, minlength=num_labels)).sum())
    return _gamma_counts(len(A), len(B), common, c_sub, c_del, c_ins)


def partial_lb(p: PartialNodeMap, G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, mode: str = "LSAPE") -> float:
    """Lower bound for all node maps extending p."""
    ctx = _NodeSearch(G, H, costs, mode)
    if p.order != ctx.order:
        raise ValidationError("partial map does not follow the search order of G")
    return ctx.bound(p.targets, p.used, p.cost)


def make_partial(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, targets: tuple[int, ...]) -> PartialNodeMap:
    """Partial node map assigning the first len(targets) nodes of the search order."""
    ctx = _NodeSearch(G, H, costs)
    p = ctx.root()
    for k in targets:
        if k != EPS_INDEX and k in p.used:
            raise ValidationError(f"H-node {k} assigned twice")
        c = p.cost + ctx.step_cost(p.targets, p.used, k)
        p = PartialNodeMap(ctx.order, p.targets + (k,), p.used | ({k} if k != EPS_INDEX else set()), c)
    return p


def astar_ged(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, max_open: int = 1_000_000,
              mode: str = "LSAPE", time_limit: float | None = None) -> tuple[float, NodeMap]:
    """Best-first search over partial node maps ordered by lower bound."""
    start = time.perf_counter()
    ctx = _NodeSearch(G, H, costs, mode)
    counter = itertools.count()
    root = ctx.root()
    open_list: list = [(ctx.bound(root.targets, root.used, 0.0), next(counter), root)]
    while open_list:
        lb, _, p = heapq.heappop(open_list)
        if p.is_left_complete():
            return lb, ctx.to_node_map(p)
        if time_limit is not None and time.perf_counter() - start > time_limit:
            raise _budget(G, H, costs, lb, "time limit reached")
        for child in ctx.children(p):
            if child.is_left_complete():
                key = ctx.complete_cost(child)
            else:
                key = ctx.bound(child.targets, child.used, child.cost)
            heapq.heappush(open_list, (key, next(counter), child))
        if len(open_list) > max_open:
            raise _budget(G, H, costs, min(e[0] for e in open_list), "OPEN list exceeded its cap")
    raise AssertionError("search space exhausted without a complete node map")


def _budget(G, H, costs, lb: float, why: str) -> BudgetExceeded:
    rep = run_lsape_method(branch_instance, G, H, costs)
    return BudgetExceeded(why, lb, rep.upper_bound, rep.node_map)


def dfs_ged(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, time_limit: float | None = None,
            mode: str = "LSAPE", trace: list | None = None) -> BoundReport:
    """Depth-first branch and bound; exact unless the time limit interrupts it.

    trace, when given, receives (event, value, upper_bound) tuples: ("ub", new
    upper bound, previous) on improvement and ("prune", lb, ub) per pruned node.
    """
    start = time.perf_counter()
    ctx = _NodeSearch(G, H, costs, mode)
    init = run_lsape_method(branch_instance, G, H, costs)
    ub, best_map = init.upper_bound, init.node_map
    root = ctx.root()
    stack = [(ctx.bound(root.targets, root.used, 0.0), root)]
    timed_out = False
    while stack:
        if time_limit is not None and time.perf_counter() - start >= time_limit:
            timed_out = True
            break
        lb, p = stack.pop()
        if not lb < ub:
            if trace is not None:
                trace.append(("prune", lb, ub))
            continue
        if p.is_left_complete():
            if trace is not None:
                trace.append(("ub", lb, ub))
            ub, best_map = lb, ctx.to_node_map(p)
            continue
        kids = []
        for child in ctx.children(p):
            if child.is_left_complete():
                key = ctx.complete_cost(child)
            else:
                key = ctx.bound(child.targets, child.used, child.cost)
            if key < ub:
                kids.append((key, child))
            elif trace is not None:
                trace.append(("prune", key, ub))
        kids.sort(key=lambda t: -t[0])
        stack.extend(kids)
    lb_final = ub if not timed_out else min([ub] + [e[0] for e in stack])
    final = induced_edit_cost(G, H, costs, best_map)
    return BoundReport(min(lb_final, final), final, best_map, time.perf_counter() - start,
                       info={"exact": not timed_out})


# --- edge-based search -------------------------------------------------------


def _edge_eps_condition(costs: EditCostModel, G: LabeledGraph, H: LabeledGraph) -> bool:
    _, el = present_labels(G, H)
    return verify_flags(costs, [], el).triangular_edge


@dataclass
class _EdgeState:
    depth: int
    fwd: dict  # G-node -> H-node induced by the mapped edges
    bwd: dict
    used_h_edges: frozenset
    cost: float  # node subs of the induced map + edge subs + edge deletions


def csi_ged(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, time_limit: float | None = None) -> BoundReport:
    """Depth-first search over partial edge maps, closed by an LSAPE over unmapped nodes.

    Requires edge substitution to be no costlier than deletion plus insertion
    for the labels present; otherwise deleting and reinserting an edge would be
    cheaper than the substitution the induced node map implies.
    """
    if not _edge_eps_condition(costs, G, H):
        raise ConfigurationError("edge-based search requires edge substitution <= deletion + insertion")
    start = time.perf_counter()
    n, m = G.n, H.n
    NC = np.zeros((n + 1, m + 1))
    for i, a in enumerate(G.node_labels):
        for k, b in enumerate(H.node_labels):
            NC[i, k] = costs.node_sub(a, b)
        NC[i, m] = costs.node_del(a)
    for k, b in enumerate(H.node_labels):
        NC[n, k] = costs.node_ins(b)
    g_edges = sorted(G.edges, key=lambda e: (-(G.degree(e[0]) + G.degree(e[1])), e))
    h_edges = list(H.edges)
    h_oriented = [(c, d, l) for l, (c, d) in enumerate(h_edges)] + [(d, c, l) for l, (c, d) in enumerate(h_edges)]
    g_lab = [G.edge_label(*e) for e in g_edges]
    h_lab = [H.edge_label(*e) for e in h_edges]
    EC = np.zeros((len(g_edges) + 1, len(h_edges) + 1))
    for j, a in enumerate(g_lab):
        for l, b in enumerate(h_lab):
            EC[j, l] = costs.edge_sub(a, b)
        EC[j, -1] = costs.edge_del(a)
    for l, b in enumerate(h_lab):
        EC[-1, l] = costs.edge_ins(b)
    ins_h = EC[-1, :-1]

    def bound(st: _EdgeState) -> float:
        free_g = np.array([i for i in range(n) if i not in st.fwd], dtype=np.int64)
        free_h = np.array([k for k in range(m) if k not in st.bwd], dtype=np.int64)
        node = lsape_cost(NC[np.ix_(np.append(free_g, n), np.append(free_h, m))])
        rest_g = np.arange(st.depth, len(g_edges))
        rest_h = np.array([l for l in range(len(h_edges)) if l not in st.used_h_edges], dtype=np.int64)
        edge = lsape_cost(EC[np.ix_(np.append(rest_g, -1), np.append(rest_h, -1))])
        return st.cost + node + edge

    def close(st: _EdgeState) -> tuple[float, NodeMap]:
        free_g = [i for i in range(n) if i not in st.fwd]
        free_h = [k for k in range(m) if k not in st.bwd]
        sub = NC[np.ix_(free_g + [n], free_h + [m])]
        sol = flwc_solve(LsapeInstance(sub))
        forward = [EPS_INDEX] * n
        for i, k in st.fwd.items():
            forward[i] = k
        for r, c in enumerate(sol.matching.forward):
            forward[free_g[r]] = free_h[c] if c != EPS_INDEX else EPS_INDEX
        value = st.cost + sol.cost + float(sum(ins_h[l] for l in range(len(h_edges)) if l not in st.used_h_edges))
        return value, NodeMap.from_forward(forward, m)

    def estimate(j: int, c: int, d: int, l: int) -> float:
        a, b = g_edges[j]
        return EC[j, l] + NC[a, c] + NC[b, d]

    def children(st: _EdgeState) -> list[tuple[float, _EdgeState]]:
        j = st.depth
        a, b = g_edges[j]
        out = []
        for c, d, l in h_oriented:
            if l in st.used_h_edges:
                continue
            ok = True
            add = EC[j, l]
            for x, y in ((a, c), (b, d)):
                if x in st.fwd:
                    ok &= st.fwd[x] == y
                elif y in st.bwd:
                    ok = False
            if not ok:
                continue
            fwd, bwd = dict(st.fwd), dict(st.bwd)
            for x, y in ((a, c), (b, d)):
                if x not in fwd:
                    fwd[x], bwd[y] = y, x
                    add += NC[x, y]
            out.append((estimate(j, c, d, l), _EdgeState(j + 1, fwd, bwd, st.used_h_edges | {l}, st.cost + add)))
        out.append((EC[j, -1], _EdgeState(j + 1, st.fwd, st.bwd, st.used_h_edges, st.cost + EC[j, -1])))
        return out

    root = _EdgeState(0, {}, {}, frozenset(), 0.0)
    init = run_lsape_method(branch_instance, G, H, costs)
    ub, best_map = init.upper_bound, init.node_map
    stack = [root]
    timed_out = False
    while stack:
        if time_limit is not None and time.perf_counter() - start >= time_limit:
            timed_out = True
            break
        st = stack.pop()
        if st.depth == len(g_edges):
            value, pi = close(st)
            actual = induced_edit_cost(G, H, costs, pi)
            if min(value, actual) < ub:
                ub, best_map = min(value, actual), pi
            continue
        if not bound(st) < ub:
            continue
        kids = children(st)
        kids.sort(key=lambda t: -t[0])
        stack.extend(s for _, s in kids)
    final = induced_edit_cost(G, H, costs, best_map)
    lb = final if not timed_out else min([final] + [bound(s) for s in stack])
    return BoundReport(lb, final, best_map, time.perf_counter() - start, info={"exact": not timed_out})
