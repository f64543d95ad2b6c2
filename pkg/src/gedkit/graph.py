"""Labeled graphs, node maps, induced edit cost and the multiset operator Gamma."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ValidationError

Label = Hashable
EPS_INDEX = -1  # index used for the dummy node in node maps


class _Epsilon:
    """The dummy label. Equal only to itself."""

    _instance: _Epsilon | None = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EPS"

    def __reduce__(self):
        return (_Epsilon, ())


EPS = _Epsilon()


def label_key(label: Label) -> tuple[str, str]:
    """Deterministic sort key for arbitrary labels.

    Python's str hash is salted per process, so ordering by hash would not be
    reproducible. Sorting by type name and repr is.
    """
    return (type(label).__name__, repr(label))


def canonical_edge(i: int, k: int) -> tuple[int, int]:
    return (i, k) if i < k else (k, i)


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Undirected simple graph with node and edge labels.

    Nodes are 0..n-1. Edges are stored once as (i, k) with i < k; every lookup
    accepts either orientation.
    """

    node_labels: tuple
    edge_labels: Mapping[tuple[int, int], Label]
    graph_id: str = ""
    class_tag: str | None = None
    _adj: tuple = field(init=False, repr=False)
    _edges: tuple = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.node_labels)
        object.__setattr__(self, "node_labels", tuple(self.node_labels))
        adj: list[dict[int, Label]] = [dict() for _ in range(n)]
        canon: dict[tuple[int, int], Label] = {}
        for (i, k), lab in self.edge_labels.items():
            if not (0 <= i < n and 0 <= k < n):
                raise ValidationError(f"edge ({i}, {k}) has an endpoint outside 0..{n - 1}")
            if i == k:
                raise ValidationError(f"self-loop at node {i}")
            e = canonical_edge(i, k)
            if e in canon:
                raise ValidationError(f"parallel edge {e}")
            canon[e] = lab
            adj[i][k] = lab
            adj[k][i] = lab
        object.__setattr__(self, "edge_labels", canon)
        object.__setattr__(self, "_adj", tuple(adj))
        object.__setattr__(self, "_edges", tuple(sorted(canon)))

    @classmethod
    def from_edges(
        cls,
        node_labels: Sequence[Label],
        edges: Iterable[tuple[int, int] | tuple[int, int, Label]],
        graph_id: str = "",
        class_tag: str | None = None,
        default_edge_label: Label = 1,
    ) -> LabeledGraph:
        labels: dict[tuple[int, int], Label] = {}
        for e in edges:
            i, k = e[0], e[1]
            lab = e[2] if len(e) > 2 else default_edge_label
            key = canonical_edge(i, k)
            if key in labels:
                raise ValidationError(f"parallel edge {key}")
            labels[key] = lab
        return cls(tuple(node_labels), labels, graph_id, class_tag)

    @property
    def n(self) -> int:
        return len(self.node_labels)

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self._edges

    def has_edge(self, i: int, k: int) -> bool:
        return k in self._adj[i]

    def edge_label(self, i: int, k: int) -> Label:
        return self._adj[i][k]

    def neighbors(self, i: int) -> Mapping[int, Label]:
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def max_degree(self) -> int:
        return max((len(a) for a in self._adj), default=0)

    def incident_labels(self, i: int) -> list[Label]:
        return list(self._adj[i].values())

    def iter_edges(self) -> Iterator[tuple[int, int, Label]]:
        for i, k in self._edges:
            yield i, k, self.edge_labels[(i, k)]

    def relabeled(self, perm: Sequence[int], graph_id: str | None = None) -> LabeledGraph:
        """Copy with node i moved to position perm[i]."""
        labels: list[Any] = [None] * self.n
        for i, p in enumerate(perm):
            labels[p] = self.node_labels[i]
        edges = {canonical_edge(perm[i], perm[k]): lab for (i, k), lab in self.edge_labels.items()}
        return LabeledGraph(tuple(labels), edges, self.graph_id if graph_id is None else graph_id, self.class_tag)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (
            self.node_labels == other.node_labels
            and self.edge_labels == other.edge_labels
            and self.graph_id == other.graph_id
            and self.class_tag == other.class_tag
        )

    def __hash__(self) -> int:
        return hash((self.node_labels, self._edges, self.graph_id))

    def __repr__(self) -> str:
        return f"LabeledGraph(id={self.graph_id!r}, n={self.n}, edges={self.num_edges})"


@dataclass(frozen=True)
class NodeMap:
    """Error-correcting assignment between the nodes of G (size n) and H (size m).

    forward[i] is the H-node assigned to G-node i, or -1 for a deletion.
    backward[k] is the G-node assigned to H-node k, or -1 for an insertion.
    """

    forward: tuple[int, ...]
    backward: tuple[int, ...]

    def __post_init__(self):
        n, m = len(self.forward), len(self.backward)
        for i, k in enumerate(self.forward):
            if k != EPS_INDEX and not (0 <= k < m):
                raise ValidationError(f"G-node {i} assigned to out-of-range H-node {k}")
            if k != EPS_INDEX and self.backward[k] != i:
                raise ValidationError(f"G-node {i} -> H-node {k} is not mirrored in backward map")
        for k, i in enumerate(self.backward):
            if i != EPS_INDEX and not (0 <= i < n):
                raise ValidationError(f"H-node {k} assigned to out-of-range G-node {i}")
            if i != EPS_INDEX and self.forward[i] != k:
                raise ValidationError(f"H-node {k} <- G-node {i} is not mirrored in forward map")

    @classmethod
    def from_forward(cls, forward: Sequence[int], m: int) -> NodeMap:
        backward = [EPS_INDEX] * m
        for i, k in enumerate(forward):
            k = int(k)
            if k == EPS_INDEX:
                continue
            if not (0 <= k < m):
                raise ValidationError(f"G-node {i} assigned to out-of-range H-node {k}")
            if backward[k] != EPS_INDEX:
                raise ValidationError(f"H-node {k} covered twice")
            backward[k] = i
        return cls(tuple(int(k) for k in forward), tuple(backward))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], n: int, m: int) -> NodeMap:
        """Build from (i, k) pairs with -1 for the dummy node.

        Every real node must be covered exactly once; (-1, -1) pairs are ignored.
        """
        forward: list[int | None] = [None] * n
        backward: list[int | None] = [None] * m
        for i, k in pairs:
            if i == EPS_INDEX and k == EPS_INDEX:
                continue
            if i != EPS_INDEX:
                if not (0 <= i < n):
                    raise ValidationError(f"G-node index {i} out of range")
                if forward[i] is not None:
                    raise ValidationError(f"G-node {i} covered twice")
                forward[i] = k
            if k != EPS_INDEX:
                if not (0 <= k < m):
                    raise ValidationError(f"H-node index {k} out of range")
                if backward[k] is not None:
                    raise ValidationError(f"H-node {k} covered twice")
                backward[k] = i
        if any(x is None for x in forward):
            raise ValidationError(f"G-nodes {[i for i, x in enumerate(forward) if x is None]} not covered")
        if any(x is None for x in backward):
            raise ValidationError(f"H-nodes {[k for k, x in enumerate(backward) if x is None]} not covered")
        return cls(tuple(forward), tuple(backward))  # type: ignore[arg-type]

    @classmethod
    def identity(cls, n: int) -> NodeMap:
        return cls(tuple(range(n)), tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.forward)

    @property
    def m(self) -> int:
        return len(self.backward)

    @property
    def substitutions(self) -> list[tuple[int, int]]:
        return [(i, k) for i, k in enumerate(self.forward) if k != EPS_INDEX]

    @property
    def deletions(self) -> list[int]:
        return [i for i, k in enumerate(self.forward) if k == EPS_INDEX]

    @property
    def insertions(self) -> list[int]:
        return [k for k, i in enumerate(self.backward) if i == EPS_INDEX]

    def pairs(self) -> list[tuple[int, int]]:
        """All assignments as (i, k) pairs, dummy written as -1."""
        out = [(i, k) for i, k in enumerate(self.forward)]
        out.extend((EPS_INDEX, k) for k in self.insertions)
        return out

    def num_substitutions(self) -> int:
        return sum(1 for k in self.forward if k != EPS_INDEX)

    def inverse(self) -> NodeMap:
        return NodeMap(self.backward, self.forward)


def induced_edit_cost(G: LabeledGraph, H: LabeledGraph, costs, pi: NodeMap) -> float:
    """Cost of the edit path induced by a node map."""
    if pi.n != G.n or pi.m != H.n:
        raise ValidationError(f"node map of shape ({pi.n}, {pi.m}) does not fit graphs of sizes ({G.n}, {H.n})")
    total = 0.0
    fwd, bwd = pi.forward, pi.backward
    gl, hl = G.node_labels, H.node_labels
    for i, k in enumerate(fwd):
        total += costs.node_del(gl[i]) if k == EPS_INDEX else costs.node_sub(gl[i], hl[k])
    for k, i in enumerate(bwd):
        if i == EPS_INDEX:
            total += costs.node_ins(hl[k])
    for (i, j), beta in G.edge_labels.items():
        k, l = fwd[i], fwd[j]
        if k != EPS_INDEX and l != EPS_INDEX and H.has_edge(k, l):
            total += costs.edge_sub(beta, H.edge_label(k, l))
        else:
            total += costs.edge_del(beta)
    for (k, l), beta in H.edge_labels.items():
        i, j = bwd[k], bwd[l]
        if i == EPS_INDEX or j == EPS_INDEX or not G.has_edge(i, j):
            total += costs.edge_ins(beta)
    return total


def multiset_gamma(A: Iterable[Label], B: Iterable[Label], c_sub: float, c_del: float, c_ins: float) -> float:
    """Cost of transforming multiset A into multiset B with constant costs."""
    ca, cb = Counter(A), Counter(B)
    na, nb = sum(ca.values()), sum(cb.values())
    common = sum((ca & cb).values())
    return _gamma_counts(na, nb, common, c_sub, c_del, c_ins)


def _gamma_counts(na: int, nb: int, common: int, c_sub: float, c_del: float, c_ins: float) -> float:
    # A zero count times an infinite cost contributes nothing.
    out = 0.0
    paid = min(na, nb) - common
    if paid:
        out += c_sub * paid
    if na > nb:
        out += c_del * (na - nb)
    elif nb > na:
        out += c_ins * (nb - na)
    return out


def node_map_to_matching(pi: NodeMap, n: int | None = None, m: int | None = None) -> np.ndarray:
    """Binary (n+1)x(m+1) matrix of an error-correcting matching."""
    n = pi.n if n is None else n
    m = pi.m if m is None else m
    if pi.n != n or pi.m != m:
        raise ValidationError(f"node map of shape ({pi.n}, {pi.m}) does not fit sizes ({n}, {m})")
    X = np.zeros((n + 1, m + 1), dtype=np.int8)
    for i, k in enumerate(pi.forward):
        X[i, m if k == EPS_INDEX else k] = 1
    for k in pi.insertions:
        X[n, k] = 1
    return X


def matching_to_node_map(X: np.ndarray) -> NodeMap:
    """Inverse of node_map_to_matching."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValidationError("matching must be a non-empty 2-D array")
    n, m = X.shape[0] - 1, X.shape[1] - 1
    if not np.all((X == 0) | (X == 1)):
        raise ValidationError("matching entries must be 0 or 1")
    if np.any(X[:n].sum(axis=1) != 1) or np.any(X[:, :m].sum(axis=0) != 1):
        raise ValidationError("every real row and column must be covered exactly once")
    forward = []
    for i in range(n):
        k = int(np.flatnonzero(X[i])[0])
        forward.append(EPS_INDEX if k == m else k)
    return NodeMap.from_forward(forward, m)
