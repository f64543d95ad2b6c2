"""Local search for GED upper bounds: K-REFINE, BP-BEAM, IPFP, MULTI-START and RANDPOST.

Node maps are handled as lists of assignments (u, v) with -1 for the dummy
node; the dummy assignment (-1, -1) may appear and is dropped when a map is
rebuilt.
"""

from __future__ import annotations

import heapq
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Callable

import numpy as np

from .costs import EditCostModel
from .errors import ValidationError
from .graph import EPS_INDEX, LabeledGraph, NodeMap, induced_edit_cost
from .heuristics import BoundReport
from .lsap import solve_lsap
from .lsape import LsapeInstance, flwc_solve
from .qap import QapFormulation, complete_map
from .rng import make_rng, run_seed

Assignment = tuple[int, int]
DUMMY: Assignment = (EPS_INDEX, EPS_INDEX)
W_MAX = 1e3


@dataclass(frozen=True)
class Swap:
    """A K'-swap: forward assignments in cycle order and their replacements.

    backward[t] = (forward[t+1].u, forward[t].v), indices taken cyclically.
    """

    forward: tuple[Assignment, ...]
    backward: tuple[Assignment, ...]

    def __post_init__(self):
        if len(self.forward) != len(self.backward) or len(self.forward) < 2:
            raise ValidationError("a swap needs at least two forward and as many backward assignments")

    @classmethod
    def cycle(cls, forward: tuple[Assignment, ...]) -> Swap:
        K = len(forward)
        back = tuple((forward[(t + 1) % K][0], forward[t][1]) for t in range(K))
        return cls(tuple(forward), back)

    def inverse(self) -> Swap:
        """The swap that undoes this one on the swapped map."""
        return Swap.cycle(tuple(reversed(self.backward)))


class _Context:
    """Index tables for fast local cost evaluation."""

    def __init__(self, G: LabeledGraph, H: LabeledGraph, costs: EditCostModel):
        self.G, self.H, self.costs = G, H, costs
        n, m = G.n, H.n
        self.n, self.m = n, m
        V = [[0.0] * (m + 1) for _ in range(n + 1)]
        for i, a in enumerate(G.node_labels):
            for k, b in enumerate(H.node_labels):
                V[i][k] = costs.node_sub(a, b)
            V[i][m] = costs.node_del(a)
        for k, b in enumerate(H.node_labels):
            V[n][k] = costs.node_ins(b)
        self.V = V
        glab = list(dict.fromkeys(G.edge_labels.values()))
        hlab = list(dict.fromkeys(H.edge_labels.values()))
        gid = {lab: t for t, lab in enumerate(glab)}
        hid = {lab: t for t, lab in enumerate(hlab)}
        self.T = [[costs.edge_sub(a, b) for b in hlab] for a in glab]
        self.gdel = [costs.edge_del(a) for a in glab]
        self.hins = [costs.edge_ins(b) for b in hlab]
        self.gmat = [[-1] * n for _ in range(n)]
        self.hmat = [[-1] * m for _ in range(m)]
        self.gnb: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.hnb: list[list[tuple[int, int]]] = [[] for _ in range(m)]
        for (i, j), lab in G.edge_labels.items():
            t = gid[lab]
            self.gmat[i][j] = self.gmat[j][i] = t
            self.gnb[i].append((j, t))
            self.gnb[j].append((i, t))
        for (k, l), lab in H.edge_labels.items():
            t = hid[lab]
            self.hmat[k][l] = self.hmat[l][k] = t
            self.hnb[k].append((l, t))
            self.hnb[l].append((k, t))

    def local_cost(self, fw: Callable[[int], int], bw: Callable[[int], int], VG: set, VH: set) -> float:
        """Cost of the nodes and edges touching VG and VH under the map given by fw and bw."""
        n, m, V, T, hmat, gmat = self.n, self.m, self.V, self.T, self.hmat, self.gmat
        total = 0.0
        for u in VG:
            k = fw(u)
            total += V[u][m if k < 0 else k]
            for w, t in self.gnb[u]:
                if w in VG and w < u:
                    continue
                l = fw(w)
                s = hmat[k][l] if k >= 0 and l >= 0 else -1
                total += T[t][s] if s >= 0 else self.gdel[t]
        for v in VH:
            i = bw(v)
            if i < 0:
                total += V[n][v]
            for w, t in self.hnb[v]:
                if w in VH and w < v:
                    continue
                j = bw(w)
                if i < 0 or j < 0 or gmat[i][j] < 0:
                    total += self.hins[t]
        return total


def _maps(pi: NodeMap) -> tuple[list[int], list[int]]:
    return list(pi.forward), list(pi.backward)


def _swap_delta(ctx: _Context, fwd: list[int], bwd: list[int], swap: Swap) -> float:
    VG = {u for u, _ in swap.forward if u >= 0}
    VH = {v for _, v in swap.forward if v >= 0}
    nf: dict[int, int] = {u: EPS_INDEX for u in VG}
    nb: dict[int, int] = {v: EPS_INDEX for v in VH}
    for u, v in swap.backward:
        if u >= 0:
            nf[u] = v
        if v >= 0:
            nb[v] = u
    before = ctx.local_cost(fwd.__getitem__, bwd.__getitem__, VG, VH)
    after = ctx.local_cost(lambda u: nf.get(u, fwd[u]), lambda v: nb.get(v, bwd[v]), VG, VH)
    return before - after


def _check_swap(pi: NodeMap, swap: Swap) -> None:
    assigned = set(pi.pairs())
    for a in swap.forward:
        if a != DUMMY and a not in assigned:
            raise ValidationError(f"swap assignment {a} is not in the node map")
    if Swap.cycle(swap.forward) != swap:
        raise ValidationError("backward assignments do not close a single alternating cycle")


def swap_cost(pi: NodeMap, swap: Swap, G: LabeledGraph, H: LabeledGraph, costs: EditCostModel,
              context: _Context | None = None) -> float:
    """c(pi) - c(SWAP(pi, swap)) from the affected nodes and edges only; positive is an improvement."""
    _check_swap(pi, swap)
    ctx = context or _Context(G, H, costs)
    fwd, bwd = _maps(pi)
    return _swap_delta(ctx, fwd, bwd, swap)


def apply_swap(pi: NodeMap, swap: Swap) -> NodeMap:
    _check_swap(pi, swap)
    pairs = [p for p in pi.pairs() if p not in set(swap.forward)]
    pairs.extend(b for b in swap.backward if b != DUMMY)
    return NodeMap.from_pairs(pairs, pi.n, pi.m)


def enumerate_swaps(assignments: list[Assignment], K: int):
    """All K-swaps over a list of assignments: one per subset and cyclic order."""
    if K < 2:
        raise ValidationError("swap size must be at least 2")
    for subset in combinations(range(len(assignments)), K):
        first, rest = subset[0], subset[1:]
        for order in permutations(rest):
            yield Swap.cycle(tuple(assignments[s] for s in (first,) + order))


def count_swaps(size: int, K: int) -> int:
    return math.comb(size, K) * math.factorial(K - 1)


def _report(G, H, costs, pi: NodeMap, start: float, info: dict) -> BoundReport:
    return BoundReport(None, induced_edit_cost(G, H, costs, pi), pi, time.perf_counter() - start, (), info)


def k_refine(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, pi0: NodeMap, K: int = 2,
             include_dummy: bool = True, max_rounds: int = 1_000_000, **_) -> BoundReport:
    """Best-improvement descent over K'-swaps for K' = 2..K."""
    if K < 2:
        raise ValidationError("K must be at least 2")
    start = time.perf_counter()
    ctx = _Context(G, H, costs)
    fwd, bwd = _maps(pi0)
    Kc, rounds, improvements = 2, 0, 0
    tol = 1e-12
    while Kc <= K and rounds < max_rounds:
        rounds += 1
        assignments = [(i, k) for i, k in enumerate(fwd)] + [(EPS_INDEX, k) for k, i in enumerate(bwd) if i < 0]
        if include_dummy:
            assignments.append(DUMMY)
        best, best_gain = None, tol
        if len(assignments) >= Kc:
            for swap in enumerate_swaps(assignments, Kc):
                gain = _swap_delta(ctx, fwd, bwd, swap)
                if gain > best_gain:
                    best, best_gain = swap, gain
        if best is None:
            Kc += 1
            continue
        for u, _v in best.forward:
            if u >= 0:
                fwd[u] = EPS_INDEX
        for _u, v in best.forward:
            if v >= 0:
                bwd[v] = EPS_INDEX
        for u, v in best.backward:
            if u >= 0:
                fwd[u] = v
            if v >= 0:
                bwd[v] = u
        improvements += 1
        Kc = 2
    pi = NodeMap(tuple(fwd), tuple(bwd))
    return _report(G, H, costs, pi, start, {"iterations": rounds, "improvements": improvements})


def bp_beam(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, pi0: NodeMap, beam: int = 5,
            iterations: int = 1, seed: int = 0, **_) -> BoundReport:
    """Beam search over suffix swaps of randomly ordered assignments; iterations > 1 is IBP-BEAM."""
    if beam < 1 or iterations < 1:
        raise ValidationError("beam size and iteration count must be at least 1")
    start = time.perf_counter()
    ctx = _Context(G, H, costs)
    base = pi0.pairs()
    best_cost = c0 = induced_edit_cost(G, H, costs, pi0)
    best = pi0
    expanded = 0
    for it in range(iterations):
        rng = make_rng(run_seed(seed, it))
        order = [base[t] for t in rng.permutation(len(base))]
        size = len(order)
        us = tuple(u for u, _ in order)
        counter = 0
        queue = [(c0, counter, 0, tuple(v for _, v in order))]
        while queue:
            cost, _, s, vs = heapq.heappop(queue)
            expanded += 1
            if cost < best_cost - 1e-12:
                best_cost = cost
                best = NodeMap.from_pairs(list(zip(us, vs)), G.n, H.n)
            if s >= size - 1:
                continue
            fwd, bwd = [EPS_INDEX] * G.n, [EPS_INDEX] * H.n
            for u, v in zip(us, vs):
                if u >= 0:
                    fwd[u] = v
                if v >= 0:
                    bwd[v] = u
            for t in range(s, size):
                if t == s:
                    child, child_cost = vs, cost
                else:
                    swap = Swap.cycle(((us[s], vs[s]), (us[t], vs[t])))
                    child_cost = cost - _swap_delta(ctx, fwd, bwd, swap)
                    child = list(vs)
                    child[s], child[t] = vs[t], vs[s]
                    child = tuple(child)
                counter += 1
                heapq.heappush(queue, (child_cost, counter, s + 1, child))
            queue = heapq.nsmallest(beam, queue)
            heapq.heapify(queue)
    return _report(G, H, costs, best, start, {"iterations": expanded})


def _line_search(a: float, b: float) -> float:
    """argmin over [0, 1] of a*t^2 + b*t."""
    if a > 0:
        return min(1.0, max(0.0, -b / (2 * a)))
    return 1.0 if a + b < 0 else 0.0


def _linear_step(F: QapFormulation, C: np.ndarray) -> np.ndarray:
    """Integral minimizer of <C, B> over the formulation's solution space."""
    if F.kind == "QAPE":
        C = C.copy()
        C[-1, -1] = 0.0
        C = C - min(0.0, float(C.min()))
        C[-1, -1] = 0.0
        return F.matrix(flwc_solve(LsapeInstance(C)).matching)
    B = np.zeros(F.shape)
    if F.n and F.m:
        if F.n <= F.m:
            sol = solve_lsap(C)
            B[np.arange(F.n), sol.row_to_col] = 1.0
        else:
            sol = solve_lsap(C.T)
            B[sol.row_to_col, np.arange(F.m)] = 1.0
    return B


def ipfp(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, pi0: NodeMap, kind: str = "QAPE",
         max_iter: int = 100, eps: float = 1e-3, **_) -> BoundReport:
    """Integer projected fixed point over the QAPE or compact QAP formulation."""
    if max_iter < 1:
        raise ValidationError("max_iter must be at least 1")
    start = time.perf_counter()
    F = QapFormulation(G, H, costs, kind)
    best = pi0
    best_cost = induced_edit_cost(G, H, costs, pi0)
    start_map = complete_map(pi0) if kind == "COMPACT_QAP" else pi0
    X = F.matrix(start_map)
    its = 0
    for its in range(1, max_iter + 1):
        grad = F.apply(X)
        B = _linear_step(F, grad)
        pi_b = F.node_map(B)
        c_b = induced_edit_cost(G, H, costs, pi_b)
        if c_b < best_cost - 1e-12:
            best, best_cost = pi_b, c_b
        qx = float((X * grad).sum()) + F.constant
        lin = float((B * grad).sum()) + F.constant
        D = B - X
        a = F.quadratic(D)
        b = 2.0 * float((D * grad).sum())
        X = X + _line_search(a, b) * D
        if qx <= 1e-12 or abs(qx - lin) / qx < eps:
            break
    M = float(X.max()) if X.size else 0.0
    P = 1.0 - X / M if M > 0 else np.ones_like(X)
    pi_p = F.node_map(_linear_step(F, P))
    c_p = induced_edit_cost(G, H, costs, pi_p)
    if c_p < best_cost - 1e-12:
        best = pi_p
    return _report(G, H, costs, best, start, {"iterations": its})


# Initial maps, MULTI-START and RANDPOST

LocalSearch = Callable[..., BoundReport]

METHODS: dict[str, LocalSearch] = {"K-REFINE": k_refine, "BP-BEAM": bp_beam, "IPFP": ipfp}


def random_initial_map(n: int, m: int, rng: np.random.Generator) -> NodeMap:
    """Uniform random injection of min(n, m) nodes; the rest are deleted or inserted."""
    if n <= m:
        cols = rng.permutation(m)[:n]
        return NodeMap.from_forward([int(k) for k in cols], m)
    rows = rng.permutation(n)[:m]
    forward = [EPS_INDEX] * n
    for k, i in enumerate(rows):
        forward[int(i)] = k
    return NodeMap.from_forward(forward, m)


def _resolve(method) -> LocalSearch:
    if callable(method):
        return method
    try:
        return METHODS[method]
    except KeyError:
        raise ValidationError(f"unknown local search method {method!r}") from None


def _run_all(G, H, costs, search: LocalSearch, starts: list[NodeMap], seeds: list[int], rho: float,
             workers: int, options: dict) -> list[BoundReport]:
    """Run every start and keep the ceil(rho * K) runs that needed the fewest iterations.

    Keeping the fastest-converging runs by a work count rather than by wall
    clock makes the selection independent of scheduling.
    """
    def one(t: int) -> BoundReport:
        return search(G, H, costs, starts[t], seed=seeds[t], **options)

    idx = range(len(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one, idx))
    else:
        runs = [one(t) for t in idx]
    keep = math.ceil(rho * len(runs))
    ranked = sorted(idx, key=lambda t: (runs[t].info.get("iterations", 0), t))
    return [runs[t] for t in sorted(ranked[:keep])]


def _best(runs: list[BoundReport]) -> BoundReport:
    return min(runs, key=lambda r: r.upper_bound)


def _check_rho(K: int, rho: float) -> None:
    if K < 1:
        raise ValidationError("K must be at least 1")
    if not 0 < rho <= 1:
        raise ValidationError("rho must lie in (0, 1]")


def multi_start(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, method="K-REFINE", K: int = 40,
                rho: float = 1.0, seed: int = 0, workers: int = 1, **options) -> BoundReport:
    """Local search from K random maps; the best of the ceil(rho * K) kept runs wins."""
    _check_rho(K, rho)
    start = time.perf_counter()
    search = _resolve(method)
    seeds = [run_seed(seed, t) for t in range(K)]
    starts = [random_initial_map(G.n, H.n, make_rng(s)) for s in seeds]
    runs = _run_all(G, H, costs, search, starts, seeds, rho, workers, options)
    best = _best(runs)
    return BoundReport(None, best.upper_bound, best.node_map, time.perf_counter() - start, (),
                       {"runs": len(runs), "ub_sequence": (best.upper_bound,)})


def update_scores(M: np.ndarray, maps: list[NodeMap], map_costs: list[float], eta: float, lb: float,
                  ub: float) -> np.ndarray:
    """Add every converged map's matrix, weighted towards cheap maps by eta."""
    M = M.copy()
    n, m = M.shape[0] - 1, M.shape[1] - 1
    for pi, c in zip(maps, map_costs):
        gap = c - lb
        ratio = W_MAX if gap < 1e-12 else (ub - lb) / gap
        w = (1.0 - eta) + eta * ratio
        for i, k in enumerate(pi.forward):
            M[i, m if k == EPS_INDEX else k] += w
        for k in pi.insertions:
            M[n, k] += w
    return M


def sample_node_map(M: np.ndarray, rng: np.random.Generator) -> NodeMap:
    """Draw one map row by row from the score matrix; taken columns are masked for later rows."""
    n, m = M.shape[0] - 1, M.shape[1] - 1
    free = np.ones(m + 1, dtype=bool)
    forward = []
    for i in range(n):
        w = np.where(free, M[i], 0.0)
        total = float(w.sum())
        p = free / free.sum() if total <= 0 else w / total
        k = int(rng.choice(m + 1, p=p))
        if k == m:
            forward.append(EPS_INDEX)
        else:
            forward.append(k)
            free[k] = False
    return NodeMap.from_forward(forward, m)


def generate_node_maps(M: np.ndarray, K: int, rng: np.random.Generator,
                       max_attempts: int | None = None) -> list[NodeMap]:
    """Up to K pairwise distinct sampled maps; stops early when draws keep repeating."""
    out: dict[tuple, NodeMap] = {}
    attempts = max_attempts if max_attempts is not None else 100 * K
    for _ in range(attempts):
        pi = sample_node_map(M, rng)
        out.setdefault(pi.forward, pi)
        if len(out) == K:
            break
    return list(out.values())


def randpost(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, method="K-REFINE", K: int = 40,
             rho: float = 1.0, L: int = 0, eta: float = 0.0, lb: float = 0.0, seed: int = 0, workers: int = 1,
             **options) -> BoundReport:
    """MULTI-START followed by L rounds of resampling starts from accumulated assignment scores."""
    _check_rho(K, rho)
    if L < 0:
        raise ValidationError("L must be nonnegative")
    if not 0 <= eta <= 1:
        raise ValidationError("eta must lie in [0, 1]")
    start = time.perf_counter()
    search = _resolve(method)
    seeds = [run_seed(seed, t) for t in range(K)]
    starts = [random_initial_map(G.n, H.n, make_rng(s)) for s in seeds]
    runs = _run_all(G, H, costs, search, starts, seeds, rho, workers, options)
    best = _best(runs)
    ub, best_map = best.upper_bound, best.node_map
    ub_seq = [ub]
    M = np.zeros((G.n + 1, H.n + 1))
    sampler = make_rng(run_seed(seed, 0x5EED_0000_0000_0000))
    for r in range(1, L + 1):
        M = update_scores(M, [x.node_map for x in runs], [x.upper_bound for x in runs], eta, lb, ub)
        starts = generate_node_maps(M, K, sampler)
        loop_seeds = [run_seed(seed, r * K + t) for t in range(len(starts))]
        runs = _run_all(G, H, costs, search, starts, loop_seeds, rho, workers, options)
        cand = _best(runs)
        if cand.upper_bound < ub:
            ub, best_map = cand.upper_bound, cand.node_map
        ub_seq.append(ub)
    return BoundReport(None, ub, best_map, time.perf_counter() - start, (),
                       {"loops": L, "ub_sequence": tuple(ub_seq), "scores": M})
