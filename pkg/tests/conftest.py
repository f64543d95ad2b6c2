"""Shared corpora and helpers."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from gedkit.costs import TableCosts, chem, uniform
from gedkit.generators import random_graph
from gedkit.graph import LabeledGraph
from gedkit.io import GraphCollection, load_collection
from gedkit.rng import make_rng

FIXTURES = Path(__file__).parent / "fixtures"
LETTER_COLLECTION = FIXTURES / "letter" / "letter.cxl"

# Substitution through a third label is cheaper than the direct one, and
# several substitutions exceed deletion plus insertion.
NONMETRIC = TableCosts(
    node_sub={("a", "b"): 5.0, ("a", "c"): 1.0, ("c", "b"): 1.0, ("b", "a"): 0.5},
    node_del={"a": 1.0, "b": 2.0, "c": 0.5},
    node_ins={"a": 1.5, "b": 1.0, "c": 2.0},
    edge_sub={("x", "y"): 3.0, ("x", "z"): 0.5, ("z", "y"): 0.5},
    edge_del={"x": 2.0, "y": 1.5, "z": 1.0},
    edge_ins={"x": 2.0, "y": 2.0, "z": 1.5},
    name="NONMETRIC",
)

FAMILIES = {"uniform": uniform(1.0), "chem1": chem(1), "nonmetric": NONMETRIC}


def random_pairs(count: int, max_nodes: int, seed: int, min_nodes: int = 0, p: float = 0.5,
                 nodes: str = "abc", edges: str = "xyz") -> list[tuple[LabeledGraph, LabeledGraph]]:
    rng = make_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(min_nodes, max_nodes + 1))
        m = int(rng.integers(min_nodes, max_nodes + 1))
        out.append((random_graph(n, p, nodes, edges, rng), random_graph(m, p, nodes, edges, rng)))
    return out


def oracle_corpus(total: int = 300, max_nodes: int = 5, seed: int = 2024):
    """(family name, costs, G, H) cycling through the three cost families."""
    names = list(FAMILIES)
    pairs = random_pairs(total, max_nodes, seed)
    return [(names[t % 3], FAMILIES[names[t % 3]], G, H) for t, (G, H) in enumerate(pairs)]


def letter_pair() -> tuple[LabeledGraph, LabeledGraph]:
    coll = load_collection(LETTER_COLLECTION)
    return coll.by_id("G.gxl"), coll.by_id("H.gxl")


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(12345)


def class_collection(per_class: int = 3, seed: int = 7) -> GraphCollection:
    """Two classes: sparse graphs over 'a' and dense graphs over 'b'."""
    rng = make_rng(seed)
    graphs, classes = [], {}
    for tag, p, labels in (("A", 0.2, "a"), ("B", 0.9, "b")):
        for t in range(per_class):
            g = random_graph(int(rng.integers(3, 6)), p, labels, "x", rng)
            g = LabeledGraph(g.node_labels, dict(g.edge_labels), graph_id=f"{tag}{t}", class_tag=tag)
            graphs.append(g)
            classes[g.graph_id] = tag
    return GraphCollection(tuple(graphs), classes)
