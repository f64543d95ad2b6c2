"""LSAPE instance families used for solver benchmarks and tests."""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .graph import LabeledGraph, _gamma_counts
from .lsape import LsapeInstance
from .rng import make_rng


def machol_wien(n: int, m: int) -> LsapeInstance:
    """c[i, k] = i * k over the full (n+1)x(m+1) matrix, corner set to 0."""
    _check_sizes(n, m)
    C = np.outer(np.arange(n + 1), np.arange(m + 1)).astype(np.float64)
    C[n, m] = 0.0
    return LsapeInstance(C)


def flat(n: int, m: int, alpha: float = 10.0, p: float = 0.0, seed: int = 0) -> LsapeInstance:
    """All substitutions cost alpha; the surplus of the larger side is free to edit.

    With p > 0, p percent of the remaining nodes on each side get deletion or
    insertion cost alpha/2 - 1, which breaks the triangle inequality.
    """
    _check_sizes(n, m)
    rng = make_rng(seed)
    C = np.full((n + 1, m + 1), float(alpha))
    C[n, m] = 0.0
    small, large = (n, m) if n <= m else (m, n)
    edit_large = np.full(large, float(alpha))
    free = rng.choice(large, size=large - small, replace=False)
    edit_large[free] = 0.0
    rest = np.setdiff1d(np.arange(large), free)
    cheap = alpha / 2 - 1
    k_large = int(round(len(rest) * p / 100))
    edit_large[rng.choice(rest, size=k_large, replace=False)] = cheap
    edit_small = np.full(small, float(alpha))
    k_small = int(round(small * p / 100))
    edit_small[rng.choice(small, size=k_small, replace=False)] = cheap
    if n <= m:
        C[:n, m], C[n, :m] = edit_small, edit_large
    else:
        C[:n, m], C[n, :m] = edit_large, edit_small
    return LsapeInstance(C)


def random_instance(n: int, m: int, c_sub: float, c_v: float, c_e: float, seed: int = 0) -> LsapeInstance:
    """Branch-like instance: random node labels and random incident edge labels.

    Degrees are drawn from 1..max(1, floor(0.3 * size)); node labels from
    1..max(1, floor(sqrt(nm)/10)); edge labels are binary. Substitution cost is
    the node label cost plus the optimal edit cost between incident edge sets.
    """
    _check_sizes(n, m)
    rng = make_rng(seed)
    num_labels = max(1, math.isqrt(n * m) // 10)

    def side(size: int):
        max_deg = max(1, (3 * size) // 10)
        labels = rng.integers(1, num_labels + 1, size=size)
        degs = rng.integers(1, max_deg + 1, size=size)
        ones = np.array([int(rng.binomial(d, 0.5)) for d in degs])
        return labels, degs, ones

    lg, dg, og = side(n)
    lh, dh, oh = side(m)
    sub_e = min(c_sub, 2 * c_e)  # constant costs: replace a paid substitution by del+ins when cheaper
    C = np.zeros((n + 1, m + 1))
    for i in range(n):
        for k in range(m):
            common = min(og[i], oh[k]) + min(dg[i] - og[i], dh[k] - oh[k])
            edge = _gamma_counts(int(dg[i]), int(dh[k]), int(common), sub_e, c_e, c_e)
            C[i, k] = (c_sub if lg[i] != lh[k] else 0.0) + edge
        C[i, m] = c_v + dg[i] * c_e
    for k in range(m):
        C[n, k] = c_v + dh[k] * c_e
    return LsapeInstance(C)


def _check_sizes(n: int, m: int) -> None:
    if n < 1 or m < 1:
        raise ValidationError("instance sizes must be at least 1")


def random_graph(n: int, p: float, node_alphabet, edge_alphabet, rng: np.random.Generator,
                 graph_id: str = "") -> LabeledGraph:
    """Erdos-Renyi graph with labels drawn uniformly from the given alphabets."""
    node_alphabet, edge_alphabet = list(node_alphabet), list(edge_alphabet)
    labels = [node_alphabet[int(rng.integers(len(node_alphabet)))] for _ in range(n)]
    edges = {}
    for i in range(n):
        for k in range(i + 1, n):
            if rng.random() < p:
                edges[(i, k)] = edge_alphabet[int(rng.integers(len(edge_alphabet)))]
    return LabeledGraph(tuple(labels), edges, graph_id)
