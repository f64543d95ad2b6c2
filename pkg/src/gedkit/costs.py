"""Edit cost models, structure flags, presets and harmonization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigurationError
from .graph import EPS, Label, LabeledGraph

TOL = 1e-9


class EditCostModel:
    """Node and edge edit costs.

    Subclasses implement the six cost functions. Structure flags are class or
    instance attributes; None means "not declared, verify over present labels".
    Instances must be picklable so that process pools can ship them.
    """

    is_constant_node: bool | None = None
    is_constant_edge: bool | None = None
    is_triangular_node: bool | None = None
    is_triangular_edge: bool | None = None
    is_uniform: bool | None = None

    def node_sub(self, a: Label, b: Label) -> float:
        raise NotImplementedError

    def node_del(self, a: Label) -> float:
        raise NotImplementedError

    def node_ins(self, b: Label) -> float:
        raise NotImplementedError

    def edge_sub(self, a: Label, b: Label) -> float:
        raise NotImplementedError

    def edge_del(self, a: Label) -> float:
        raise NotImplementedError

    def edge_ins(self, b: Label) -> float:
        raise NotImplementedError

    def node_cost(self, a: Label, b: Label) -> float:
        """Node cost with EPS standing for the dummy label on either side."""
        if a is EPS:
            return 0.0 if b is EPS else self.node_ins(b)
        if b is EPS:
            return self.node_del(a)
        return self.node_sub(a, b)

    def edge_cost(self, a: Label, b: Label) -> float:
        if a is EPS:
            return 0.0 if b is EPS else self.edge_ins(b)
        if b is EPS:
            return self.edge_del(a)
        return self.edge_sub(a, b)

    def constants(self) -> tuple[float, float, float, float, float, float]:
        """(node sub, node del, node ins, edge sub, edge del, edge ins) for constant models."""
        raise ConfigurationError(f"{type(self).__name__} does not declare constant costs")


class ConstantCosts(EditCostModel):
    """Costs that only depend on whether labels differ."""

    def __init__(self, vs: float, vd: float, vi: float, es: float, ed: float, ei: float, name: str | None = None):
        vals = (vs, vd, vi, es, ed, ei)
        if any(v < 0 or math.isnan(v) for v in vals):
            raise ConfigurationError("edit costs must be nonnegative")
        self.vs, self.vd, self.vi, self.es, self.ed, self.ei = (float(v) for v in vals)
        self.name = name or f"CONSTANT({vs},{vd},{vi},{es},{ed},{ei})"
        self.is_constant_node = True
        self.is_constant_edge = True
        self.is_triangular_node = self.vs <= self.vd + self.vi + TOL
        self.is_triangular_edge = self.es <= self.ed + self.ei + TOL
        self.is_uniform = len(set(vals)) == 1

    def node_sub(self, a, b):
        return 0.0 if a == b else self.vs

    def node_del(self, a):
        return self.vd

    def node_ins(self, b):
        return self.vi

    def edge_sub(self, a, b):
        return 0.0 if a == b else self.es

    def edge_del(self, a):
        return self.ed

    def edge_ins(self, b):
        return self.ei

    def constants(self):
        return (self.vs, self.vd, self.vi, self.es, self.ed, self.ei)

    def __repr__(self) -> str:
        return self.name


def uniform(c: float = 1.0) -> ConstantCosts:
    return ConstantCosts(c, c, c, c, c, c, name=f"UNIFORM({c})")


CHEM_CONSTANTS = {
    "CHEM_1": (2, 4, 4, 1, 1, 1),
    "CHEM_2": (2, 4, 4, 1, 2, 2),
    "CHEM_3": (6, 2, 2, 3, 1, 1),
}


def chem(variant: int = 1) -> ConstantCosts:
    name = f"CHEM_{variant}"
    if name not in CHEM_CONSTANTS:
        raise ConfigurationError(f"unknown chemistry preset {name}")
    return ConstantCosts(*CHEM_CONSTANTS[name], name=name)


class LetterCosts(EditCostModel):
    """Euclidean node substitution, constant node/edge deletion and insertion.

    Edges carry one constant label, so edge substitution costs 0.
    """

    is_constant_node = False
    is_constant_edge = True
    is_triangular_edge = True
    is_uniform = False

    def __init__(self, scale: float = 0.75, node_del: float = 0.675, node_ins: float = 0.675,
                 edge_del: float = 0.425, edge_ins: float = 0.425):
        self.scale = scale
        self.vd, self.vi, self.ed, self.ei = node_del, node_ins, edge_del, edge_ins

    def node_sub(self, a, b):
        if a == b:
            return 0.0
        return self.scale * math.dist(a, b)

    def node_del(self, a):
        return self.vd

    def node_ins(self, b):
        return self.vi

    def edge_sub(self, a, b):
        return 0.0

    def edge_del(self, a):
        return self.ed

    def edge_ins(self, b):
        return self.ei

    def __repr__(self) -> str:
        return "LETTER"


class TableCosts(EditCostModel):
    """Costs given by lookup tables, with defaults for missing entries.

    Substitution tables are keyed by (a, b); when symmetric=True a missing
    (a, b) falls back to (b, a).
    """

    def __init__(
        self,
        node_sub: Mapping[tuple, float] | None = None,
        node_del: Mapping[Label, float] | None = None,
        node_ins: Mapping[Label, float] | None = None,
        edge_sub: Mapping[tuple, float] | None = None,
        edge_del: Mapping[Label, float] | None = None,
        edge_ins: Mapping[Label, float] | None = None,
        defaults: tuple[float, float, float, float, float, float] = (1, 1, 1, 1, 1, 1),
        symmetric: bool = True,
        name: str = "TABLE",
    ):
        self.tables = [dict(t or {}) for t in (node_sub, node_del, node_ins, edge_sub, edge_del, edge_ins)]
        for t in self.tables:
            if any(v < 0 for v in t.values()):
                raise ConfigurationError("edit costs must be nonnegative")
        self.defaults = tuple(float(d) for d in defaults)
        self.symmetric = symmetric
        self.name = name

    def _pair(self, idx, a, b):
        if a == b:
            return 0.0
        t = self.tables[idx]
        if (a, b) in t:
            return float(t[(a, b)])
        if self.symmetric and (b, a) in t:
            return float(t[(b, a)])
        return self.defaults[idx]

    def _single(self, idx, a):
        return float(self.tables[idx].get(a, self.defaults[idx]))

    def node_sub(self, a, b):
        return self._pair(0, a, b)

    def node_del(self, a):
        return self._single(1, a)

    def node_ins(self, b):
        return self._single(2, b)

    def edge_sub(self, a, b):
        return self._pair(3, a, b)

    def edge_del(self, a):
        return self._single(4, a)

    def edge_ins(self, b):
        return self._single(5, b)

    def __repr__(self) -> str:
        return self.name


def cost_preset(name: str, *params: float) -> EditCostModel:
    """Look up a preset by name: UNIFORM, CONSTANT, CHEM_1..3, LETTER."""
    key = name.strip().upper().replace("-", "_")
    if key == "UNIFORM":
        return uniform(*(params or (1.0,)))
    if key == "CONSTANT":
        if len(params) != 6:
            raise ConfigurationError("CONSTANT needs six parameters")
        return ConstantCosts(*params)
    if key in CHEM_CONSTANTS:
        return chem(int(key[-1]))
    if key == "LETTER":
        return LetterCosts(*params)
    raise ConfigurationError(f"unknown cost preset {name!r}")


# --- flags -------------------------------------------------------------------


@dataclass(frozen=True)
class CostFlags:
    constant_node: bool
    constant_edge: bool
    triangular_node: bool
    triangular_edge: bool
    uniform: bool

    @property
    def quasimetric(self) -> bool:
        return self.triangular_node and self.triangular_edge


def present_labels(*graphs: LabeledGraph) -> tuple[list, list]:
    """Distinct node and edge labels over the given graphs, in first-seen order."""
    nodes: dict = {}
    edges: dict = {}
    for g in graphs:
        for a in g.node_labels:
            nodes.setdefault(a, None)
        for b in g.edge_labels.values():
            edges.setdefault(b, None)
    return list(nodes), list(edges)


def _is_constant(sub, dele, ins, labels) -> bool:
    subs = {sub(a, b) for a, b in product(labels, labels) if a != b}
    dels = {dele(a) for a in labels}
    inss = {ins(a) for a in labels}
    return all(max(s) - min(s) <= TOL for s in (subs, dels, inss) if s)


def _is_triangular(sub, dele, ins, labels) -> bool:
    return all(sub(a, b) <= dele(a) + ins(b) + TOL for a, b in product(labels, labels) if a != b)


def verify_flags(costs: EditCostModel, node_labels: Iterable[Label], edge_labels: Iterable[Label]) -> CostFlags:
    """Compute all structure flags over the given labels, ignoring declarations."""
    nl, el = list(node_labels), list(edge_labels)
    cn = _is_constant(costs.node_sub, costs.node_del, costs.node_ins, nl)
    ce = _is_constant(costs.edge_sub, costs.edge_del, costs.edge_ins, el)
    tn = _is_triangular(costs.node_sub, costs.node_del, costs.node_ins, nl)
    te = _is_triangular(costs.edge_sub, costs.edge_del, costs.edge_ins, el)
    vals = set()
    for a, b in product(nl, nl):
        if a != b:
            vals.add(costs.node_sub(a, b))
    for a in nl:
        vals.update((costs.node_del(a), costs.node_ins(a)))
    for a, b in product(el, el):
        if a != b:
            vals.add(costs.edge_sub(a, b))
    for a in el:
        vals.update((costs.edge_del(a), costs.edge_ins(a)))
    uni = cn and ce and (not vals or max(vals) - min(vals) <= TOL)
    return CostFlags(cn, ce, tn, te, uni)


def resolve_flags(costs: EditCostModel, *graphs: LabeledGraph) -> CostFlags:
    """Declared flags where present, verified over the graphs' labels otherwise."""
    declared = (costs.is_constant_node, costs.is_constant_edge, costs.is_triangular_node,
                costs.is_triangular_edge, costs.is_uniform)
    if all(d is not None for d in declared):
        return CostFlags(*declared)  # type: ignore[arg-type]
    nl, el = present_labels(*graphs)
    verified = verify_flags(costs, nl, el)
    merged = [d if d is not None else v for d, v in zip(declared, (
        verified.constant_node, verified.constant_edge, verified.triangular_node,
        verified.triangular_edge, verified.uniform))]
    return CostFlags(*merged)


def _min_or(values, default=0.0) -> float:
    values = list(values)
    return min(values) if values else default


def fallback_edge_constants(costs: EditCostModel, G: LabeledGraph, H: LabeledGraph) -> tuple[float, float, float]:
    """Minimal edge sub/del/ins costs over labels present in G and H."""
    lg = set(G.edge_labels.values())
    lh = set(H.edge_labels.values())
    sub = _min_or(costs.edge_sub(a, b) for a in lg for b in lh if a != b)
    dele = _min_or(costs.edge_del(a) for a in lg)
    ins = _min_or(costs.edge_ins(b) for b in lh)
    return sub, dele, ins


def fallback_node_constants(costs: EditCostModel, G: LabeledGraph, H: LabeledGraph) -> tuple[float, float, float]:
    lg = set(G.node_labels)
    lh = set(H.node_labels)
    sub = _min_or(costs.node_sub(a, b) for a in lg for b in lh if a != b)
    dele = _min_or(costs.node_del(a) for a in lg)
    ins = _min_or(costs.node_ins(b) for b in lh)
    return sub, dele, ins


def edge_constants(costs: EditCostModel, G: LabeledGraph, H: LabeledGraph,
                   fallback: bool) -> tuple[float, float, float]:
    """Constant edge costs, or their fallback minima when the caller opts in."""
    if resolve_flags(costs, G, H).constant_edge:
        if isinstance(costs, ConstantCosts):
            return costs.es, costs.ed, costs.ei
        return _constants_from_labels(costs.edge_sub, costs.edge_del, costs.edge_ins,
                                      list(G.edge_labels.values()), list(H.edge_labels.values()))
    if not fallback:
        raise ConfigurationError("method requires constant edge costs; enable the fallback to use minima")
    return fallback_edge_constants(costs, G, H)


def node_constants(costs: EditCostModel, G: LabeledGraph, H: LabeledGraph,
                   fallback: bool) -> tuple[float, float, float]:
    if resolve_flags(costs, G, H).constant_node:
        if isinstance(costs, ConstantCosts):
            return costs.vs, costs.vd, costs.vi
        return _constants_from_labels(costs.node_sub, costs.node_del, costs.node_ins,
                                      list(G.node_labels), list(H.node_labels))
    if not fallback:
        raise ConfigurationError("method requires constant node costs; enable the fallback to use minima")
    return fallback_node_constants(costs, G, H)


def _constants_from_labels(sub, dele, ins, lg, lh) -> tuple[float, float, float]:
    s = _min_or(sub(a, b) for a in set(lg) for b in set(lh) if a != b)
    d = _min_or(dele(a) for a in set(lg))
    i = _min_or(ins(b) for b in set(lh))
    return s, d, i


def uniform_constant(costs: EditCostModel, G: LabeledGraph, H: LabeledGraph, fallback: bool) -> float:
    """The single constant of uniform costs, or the minimum over present costs."""
    if isinstance(costs, ConstantCosts) and costs.is_uniform:
        return costs.vs
    if resolve_flags(costs, G, H).uniform:
        vals = list(node_constants(costs, G, H, False) + edge_constants(costs, G, H, False))
        nonzero = [v for v in vals if v > 0]
        return max(nonzero) if nonzero else 0.0
    if not fallback:
        raise ConfigurationError("method requires uniform costs; enable the fallback to use minima")
    vals = []
    for s, d, i, has_sub in (
        (*fallback_node_constants(costs, G, H), _has_diff(G.node_labels, H.node_labels)),
        (*fallback_edge_constants(costs, G, H), _has_diff(G.edge_labels.values(), H.edge_labels.values())),
    ):
        if has_sub:
            vals.append(s)
        vals.extend((d, i))
    return min(vals) if vals else 0.0


def _has_diff(a: Iterable, b: Iterable) -> bool:
    sa, sb = set(a), set(b)
    return any(x != y for x in sa for y in sb)


# --- cost matrices -----------------------------------------------------------


def node_cost_matrix(costs: EditCostModel, G: LabeledGraph, H: LabeledGraph) -> np.ndarray:
    """(n+1)x(m+1) node cost matrix with deletions in the last column."""
    n, m = G.n, H.n
    C = np.zeros((n + 1, m + 1))
    cache: dict = {}
    for i, a in enumerate(G.node_labels):
        for k, b in enumerate(H.node_labels):
            key = (a, b)
            v = cache.get(key)
            if v is None:
                v = cache[key] = costs.node_sub(a, b)
            C[i, k] = v
        C[i, m] = costs.node_del(a)
    for k, b in enumerate(H.node_labels):
        C[n, k] = costs.node_ins(b)
    return C


# --- harmonization -----------------------------------------------------------


def _floyd_warshall(D: np.ndarray) -> np.ndarray:
    D = D.copy()
    for via in range(D.shape[0]):
        D = np.minimum(D, D[:, via : via + 1] + D[via : via + 1, :])
    return D


class HarmonizedCosts(EditCostModel):
    """Cost model whose entries over a finite label set are shortest-path costs.

    Labels outside the harmonized sets fall back to the wrapped model.
    """

    def __init__(self, base: EditCostModel, node_labels: list, edge_labels: list,
                 node_sub: np.ndarray, node_del: np.ndarray, node_ins: np.ndarray,
                 edge_sub: np.ndarray, edge_del: np.ndarray, edge_ins: np.ndarray):
        self.base = base
        self.node_index = {a: i for i, a in enumerate(node_labels)}
        self.edge_index = {a: i for i, a in enumerate(edge_labels)}
        self.ns, self.nd, self.ni = node_sub, node_del, node_ins
        self.es, self.ed, self.ei = edge_sub, edge_del, edge_ins
        # Node substitutions never route through the dummy, so only the edge
        # side is guaranteed to satisfy sub <= del + ins.
        self.is_triangular_edge = True

    def node_sub(self, a, b):
        if a == b:
            return 0.0
        ia, ib = self.node_index.get(a), self.node_index.get(b)
        if ia is None or ib is None:
            return self.base.node_sub(a, b)
        return float(self.ns[ia, ib])

    def node_del(self, a):
        ia = self.node_index.get(a)
        return self.base.node_del(a) if ia is None else float(self.nd[ia])

    def node_ins(self, b):
        ib = self.node_index.get(b)
        return self.base.node_ins(b) if ib is None else float(self.ni[ib])

    def edge_sub(self, a, b):
        if a == b:
            return 0.0
        ia, ib = self.edge_index.get(a), self.edge_index.get(b)
        if ia is None or ib is None:
            return self.base.edge_sub(a, b)
        return float(self.es[ia, ib])

    def edge_del(self, a):
        ia = self.edge_index.get(a)
        return self.base.edge_del(a) if ia is None else float(self.ed[ia])

    def edge_ins(self, b):
        ib = self.edge_index.get(b)
        return self.base.edge_ins(b) if ib is None else float(self.ei[ib])

    def __repr__(self) -> str:
        return f"HARMONIZED({self.base!r})"


def _label_cost_graph(sub, dele, ins, labels: list) -> np.ndarray:
    """Arc costs over labels plus a trailing dummy vertex."""
    p = len(labels)
    D = np.zeros((p + 1, p + 1))
    for x, a in enumerate(labels):
        for y, b in enumerate(labels):
            if x != y:
                D[x, y] = sub(a, b)
        D[x, p] = dele(a)
        D[p, x] = ins(a)
    return D


def harmonize_costs(costs: EditCostModel, node_labels: Iterable[Label],
                    edge_labels: Iterable[Label]) -> HarmonizedCosts:
    """Replace every cost over the present labels by a shortest-path cost.

    Edge operations and node deletions/insertions may route through the dummy
    label; node substitutions may only route through real labels.
    """
    nl = list(dict.fromkeys(node_labels))
    el = list(dict.fromkeys(edge_labels))
    p = len(nl)
    DV = _label_cost_graph(costs.node_sub, costs.node_del, costs.node_ins, nl)
    full_v = _floyd_warshall(DV)
    sub_v = _floyd_warshall(DV[:p, :p])
    DE = _label_cost_graph(costs.edge_sub, costs.edge_del, costs.edge_ins, el)
    full_e = _floyd_warshall(DE)
    q = len(el)
    return HarmonizedCosts(
        costs, nl, el,
        sub_v, full_v[:p, p].copy(), full_v[p, :p].copy(),
        full_e[:q, :q].copy(), full_e[:q, q].copy(), full_e[q, :q].copy(),
    )
