import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import NONMETRIC, random_pairs
from gedkit.costs import ConstantCosts, LetterCosts, chem, uniform
from gedkit.errors import ConfigurationError, ValidationError
from gedkit.exact import all_node_maps
from gedkit.generators import random_graph
from gedkit.graph import LabeledGraph, NodeMap, induced_edit_cost
from gedkit.qap import QapFormulation, build_qap_formulation, complete_map
from gedkit.rng import make_rng

TOL = 1e-9
QUASIMETRIC = [uniform(1.0), chem(1), chem(2)]


def maximal_maps(n, m):
    return [pi for pi in all_node_maps(n, m) if pi.num_substitutions() == min(n, m)]


@pytest.mark.parametrize("costs", [uniform(1.0), chem(1), chem(3), NONMETRIC], ids=repr)
def test_qape_objective_is_induced_cost_exhaustive(costs):
    for G, H in random_pairs(25, 4, seed=61):
        F = QapFormulation(G, H, costs)
        for pi in all_node_maps(G.n, H.n):
            assert F.objective(F.matrix(pi)) == pytest.approx(induced_edit_cost(G, H, costs, pi), abs=TOL)


@pytest.mark.parametrize("costs", QUASIMETRIC, ids=repr)
def test_compact_objective_matches_lifted_map(costs):
    for G, H in random_pairs(40, 5, seed=62):
        F = QapFormulation(G, H, costs, "COMPACT_QAP")
        E = QapFormulation(G, H, costs)
        for pi in maximal_maps(G.n, H.n):
            X = F.matrix(pi)
            lifted = F.node_map(X)
            assert lifted == pi
            assert F.objective(X) == pytest.approx(E.objective(E.matrix(lifted)), abs=TOL)


def test_letter_costs_compact_identity():
    rng = make_rng(63)
    coords = [(0.0, 0.0), (1.0, 0.5), (0.3, 1.2)]
    costs = LetterCosts()
    for _ in range(10):
        G = random_graph(int(rng.integers(1, 5)), 0.5, coords, [1], rng)
        H = random_graph(int(rng.integers(1, 5)), 0.5, coords, [1], rng)
        F = QapFormulation(G, H, costs, "COMPACT_QAP")
        for pi in maximal_maps(G.n, H.n):
            assert F.objective(F.matrix(pi)) == pytest.approx(induced_edit_cost(G, H, costs, pi), abs=TOL)


@pytest.mark.parametrize("kind", ["QAPE", "COMPACT_QAP"])
def test_lazy_product_matches_dense(kind):
    rng = make_rng(64)
    for G, H in random_pairs(30, 5, seed=65):
        F = QapFormulation(G, H, chem(2), kind)
        D = F.dense()
        X = rng.random(F.shape)
        assert np.allclose(D @ X.ravel(), F.apply(X).ravel())
        assert np.allclose(D, D.T)


def test_dense_entries_match_accessor():
    G, H = random_pairs(1, 4, seed=66, min_nodes=3)[0]
    F = build_qap_formulation(G, H, NONMETRIC)
    D = F.dense()
    rows, cols = F.shape
    for a in range(rows * cols):
        for b in range(rows * cols):
            assert D[a, b] == pytest.approx(F.q(divmod(a, cols), divmod(b, cols)))


def test_compact_shift_makes_entries_nonnegative():
    for G, H in random_pairs(30, 5, seed=67):
        F = QapFormulation(G, H, chem(1), "COMPACT_QAP")
        D = F.dense()
        if D.size:
            assert F.shift == pytest.approx(max(0.0, -D.min()))
            assert (D + F.shift).min() >= -TOL
    assert QapFormulation(*random_pairs(1, 4, seed=68)[0], uniform(1.0)).shift == 0


def test_zero_costs_give_zero_matrix():
    zero = ConstantCosts(0, 0, 0, 0, 0, 0)
    G, H = random_pairs(1, 5, seed=69, min_nodes=3)[0]
    assert not QapFormulation(G, H, zero).dense().any()


def test_compact_rejects_non_quasimetric():
    G, H = random_pairs(1, 4, seed=70, min_nodes=2)[0]
    with pytest.raises(ConfigurationError):
        QapFormulation(G, H, NONMETRIC, "COMPACT_QAP")
    with pytest.raises(ValidationError):
        QapFormulation(G, H, uniform(1.0), "QAP")


def test_matrix_validation():
    G = LabeledGraph.from_edges("ab", [(0, 1)])
    H = LabeledGraph.from_edges("abc", [])
    F = QapFormulation(G, H, uniform(1.0), "COMPACT_QAP")
    with pytest.raises(ValidationError):
        F.matrix(NodeMap.from_forward([0, -1], 3))
    with pytest.raises(ValidationError):
        F.matrix(NodeMap.from_forward([0], 3))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(QUASIMETRIC))
def test_complete_map_never_increases_cost(seed, costs):
    rng = make_rng(seed)
    G, H = random_pairs(1, 6, seed=seed)[0]
    forward = [int(k) if rng.random() < 0.5 else -1 for k in rng.permutation(max(G.n, H.n))[:G.n]]
    forward = [k if k < H.n else -1 for k in forward]
    pi = NodeMap.from_forward(forward, H.n)
    done = complete_map(pi)
    assert done.num_substitutions() == min(G.n, H.n)
    assert induced_edit_cost(G, H, costs, done) <= induced_edit_cost(G, H, costs, pi) + TOL
