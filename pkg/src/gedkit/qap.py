"""Quadratic assignment formulations of GED.

QAPE works on (n+1)x(m+1) error-correcting matchings with the dummy node at
index n (rows) and m (columns). COMPACT_QAP works on n x m maximum matchings
and needs quasimetric costs; its additive constant puts objectives in GED
units.

The quadratic form is never materialized: `apply` computes D vec(X) from the
edge lists, and `q` evaluates single entries on demand.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .costs import EditCostModel, resolve_flags
from .errors import ConfigurationError, ValidationError
from .graph import EPS_INDEX, LabeledGraph, NodeMap, node_map_to_matching

KINDS = ("QAPE", "COMPACT_QAP")


class QapFormulation:
    def __init__(self, G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, kind: str = "QAPE"):
        if kind not in KINDS:
            raise ValidationError(f"unknown QAP formulation {kind!r}")
        if kind == "COMPACT_QAP" and not resolve_flags(costs, G, H).quasimetric:
            raise ConfigurationError("COMPACT_QAP needs quasimetric node and edge costs")
        self.G, self.H, self.costs, self.kind = G, H, costs, kind
        n, m = G.n, H.n
        self.n, self.m = n, m
        # Node costs on the extended index sets; the dummy-dummy cell is 0.
        V = np.zeros((n + 1, m + 1))
        for i, a in enumerate(G.node_labels):
            V[i, m] = costs.node_del(a)
            for k, b in enumerate(H.node_labels):
                V[i, k] = costs.node_sub(a, b)
        for k, b in enumerate(H.node_labels):
            V[n, k] = costs.node_ins(b)
        self.V = V
        self.AG, self.DelG = self._adjacency(G, costs.edge_del)
        self.AH, self.InsH = self._adjacency(H, costs.edge_ins)
        ge = [(i, j, lab) for (i, j), lab in G.edge_labels.items()] + \
             [(j, i, lab) for (i, j), lab in G.edge_labels.items()]
        he = [(k, l, lab) for (k, l), lab in H.edge_labels.items()] + \
             [(l, k, lab) for (k, l), lab in H.edge_labels.items()]
        self._gi = np.array([e[0] for e in ge], dtype=np.int64)
        self._gj = np.array([e[1] for e in ge], dtype=np.int64)
        self._hk = np.array([e[0] for e in he], dtype=np.int64)
        self._hl = np.array([e[1] for e in he], dtype=np.int64)
        self._S = np.array([[costs.edge_sub(a[2], b[2]) for b in he] for a in ge]).reshape(len(ge), len(he))
        self.side = "ins" if n < m else ("del" if n > m else None)
        if kind == "COMPACT_QAP" and self.side == "ins":
            self.constant = float(self.InsH.sum() / 2 + V[n, :m].sum())
        elif kind == "COMPACT_QAP" and self.side == "del":
            self.constant = float(self.DelG.sum() / 2 + V[:n, m].sum())
        else:
            self.constant = 0.0

    @staticmethod
    def _adjacency(G: LabeledGraph, edit) -> tuple[np.ndarray, np.ndarray]:
        A = np.zeros((G.n + 1, G.n + 1))
        W = np.zeros((G.n + 1, G.n + 1))
        for (i, j), lab in G.edge_labels.items():
            A[i, j] = A[j, i] = 1.0
            W[i, j] = W[j, i] = edit(lab)
        return A, W

    @property
    def shape(self) -> tuple[int, int]:
        if self.kind == "QAPE":
            return self.n + 1, self.m + 1
        return self.n, self.m

    # Entry access

    def _edge_term(self, i: int, k: int, j: int, l: int) -> float:
        """c'_E on extended indices; index n (resp. m) is the dummy node."""
        g = i < self.n and j < self.n and self.AG[i, j] > 0
        h = k < self.m and l < self.m and self.AH[k, l] > 0
        if g and h:
            return self.costs.edge_sub(self.G.edge_label(i, j), self.H.edge_label(k, l))
        if h:
            return float(self.InsH[k, l])
        if g:
            return float(self.DelG[i, j])
        return 0.0

    def q(self, a: tuple[int, int], b: tuple[int, int]) -> float:
        """Quadratic entry for cells a = (i, k) and b = (j, l); -1 is the dummy node in QAPE."""
        n, m = self.n, self.m
        (i, k), (j, l) = a, b
        if self.kind == "QAPE":
            i, j = (n if x == EPS_INDEX else x for x in (i, j))
            k, l = (m if x == EPS_INDEX else x for x in (k, l))
            if not (0 <= i <= n and 0 <= j <= n and 0 <= k <= m and 0 <= l <= m):
                raise ValidationError("cell index out of range")
            out = 0.5 * self._edge_term(i, k, j, l)
            if (i, k) == (j, l):
                out += self.V[i, k]
            return out
        if not (0 <= i < n and 0 <= j < n and 0 <= k < m and 0 <= l < m):
            raise ValidationError("cell index out of range")
        out = 0.5 * self._edge_term(i, k, j, l)
        if (i, k) == (j, l):
            out += self.V[i, k]
            if self.side == "ins":
                out -= self.V[n, k]
            elif self.side == "del":
                out -= self.V[i, m]
        if self.side == "ins":
            out -= 0.5 * self.InsH[k, l]
        elif self.side == "del":
            out -= 0.5 * self.DelG[i, j]
        return out

    def dense(self) -> np.ndarray:
        """Full matrix over row-major cells; for small graphs and tests only."""
        r, c = self.shape
        cells = [(i, k) for i in range(r) for k in range(c)]
        if self.kind == "QAPE":
            cells = [(EPS_INDEX if i == self.n else i, EPS_INDEX if k == self.m else k) for i, k in cells]
        return np.array([[self.q(a, b) for b in cells] for a in cells]).reshape(len(cells), len(cells))

    # Products with the implicit matrix

    def apply(self, X: np.ndarray) -> np.ndarray:
        """D vec(X), returned in the shape of X."""
        X = np.asarray(X, dtype=np.float64)
        if X.shape != self.shape:
            raise ValidationError(f"matrix of shape {X.shape} does not fit formulation of shape {self.shape}")
        n, m = self.n, self.m
        if self.kind == "QAPE":
            Xe = X
        else:
            Xe = np.zeros((n + 1, m + 1))
            Xe[:n, :m] = X
        E = np.zeros((n + 1, m + 1))
        if self._S.size:
            np.add.at(E, (self._gi[:, None], self._hk[None, :]), self._S * Xe[self._gj[:, None], self._hl[None, :]])
        Y = Xe @ self.InsH
        E += Y.sum(axis=0)[None, :] - self.AG @ Y
        Z = self.DelG @ Xe
        E += Z.sum(axis=1)[:, None] - Z @ self.AH
        out = self.V * Xe + 0.5 * E
        if self.kind == "QAPE":
            return out
        out = out[:n, :m]
        if self.side == "ins":
            out -= self.V[n, :m][None, :] * X
            out -= 0.5 * (self.InsH[:m, :m] @ X.sum(axis=0))[None, :]
        elif self.side == "del":
            out -= self.V[:n, m][:, None] * X
            out -= 0.5 * (self.DelG[:n, :n] @ X.sum(axis=1))[:, None]
        return out

    def quadratic(self, X: np.ndarray) -> float:
        """vec(X)^T D vec(X), without the constant."""
        X = np.asarray(X, dtype=np.float64)
        return float((X * self.apply(X)).sum())

    def objective(self, X: np.ndarray) -> float:
        """Quadratic value plus the constant, i.e. in GED units for integral X."""
        return self.quadratic(X) + self.constant

    @cached_property
    def shift(self) -> float:
        """Smallest c >= 0 making every quadratic entry nonnegative after adding it."""
        if self.kind == "QAPE":
            return 0.0
        lo = 0.0
        for i in range(self.n):
            for k in range(self.m):
                E = np.zeros(self.shape)
                E[i, k] = 1.0
                # Column (i, k) of the symmetric matrix.
                lo = min(lo, float(self.apply(E).min()))
        return -lo

    # Conversions

    def matrix(self, pi: NodeMap) -> np.ndarray:
        """Integral matrix of a node map in this formulation's solution space."""
        if pi.n != self.n or pi.m != self.m:
            raise ValidationError("node map does not fit the graphs")
        if self.kind == "QAPE":
            return node_map_to_matching(pi).astype(np.float64)
        if pi.num_substitutions() != min(self.n, self.m):
            raise ValidationError("COMPACT_QAP needs a node map with min(n, m) substitutions")
        X = np.zeros((self.n, self.m))
        for i, k in pi.substitutions:
            X[i, k] = 1.0
        return X

    def node_map(self, X: np.ndarray) -> NodeMap:
        """Node map of an integral matrix; for COMPACT_QAP this is the lift f."""
        X = np.asarray(X)
        rows = self.n
        cols = self.m
        forward = []
        for i in range(rows):
            hits = np.flatnonzero(X[i, :cols] > 0.5)
            forward.append(int(hits[0]) if hits.size else EPS_INDEX)
        return NodeMap.from_forward(forward, cols)


def build_qap_formulation(G: LabeledGraph, H: LabeledGraph, costs: EditCostModel,
                          kind: str = "QAPE") -> QapFormulation:
    return QapFormulation(G, H, costs, kind)


def complete_map(pi: NodeMap) -> NodeMap:
    """Pair deletions with insertions in index order until min(n, m) substitutions remain.

    Under quasimetric costs this never increases the induced cost.
    """
    forward = list(pi.forward)
    free = iter(pi.insertions)
    for i in pi.deletions:
        k = next(free, None)
        if k is None:
            break
        forward[i] = k
    return NodeMap.from_forward(forward, pi.m)
