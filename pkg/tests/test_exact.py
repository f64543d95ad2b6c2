import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FAMILIES, NONMETRIC, letter_pair, oracle_corpus, random_pairs
from gedkit.costs import LetterCosts, TableCosts, chem, uniform
from gedkit.errors import BudgetExceeded, CapExceeded, ConfigurationError, ValidationError
from gedkit.exact import (all_node_maps, astar_ged, brute_force_ged, csi_ged, dfs_ged, make_partial, node_order,
                          partial_lb)
from gedkit.graph import EPS_INDEX, LabeledGraph, NodeMap, induced_edit_cost
from gedkit.heuristics import branch_instance, node_instance, run_lsape_method
from gedkit.rng import make_rng

TOL = 1e-9
EMPTY = LabeledGraph.from_edges([], [])


def random_targets(rng, n, m):
    level = int(rng.integers(0, n + 1))
    free = list(range(m))
    out = []
    for _ in range(level):
        if free and rng.random() < 0.8:
            out.append(free.pop(int(rng.integers(0, len(free)))))
        else:
            out.append(EPS_INDEX)
    return tuple(out)


def test_all_node_maps_count():
    # sum over k of C(n,k) C(m,k) k!
    assert sum(1 for _ in all_node_maps(3, 2)) == 1 + 6 + 6
    assert sum(1 for _ in all_node_maps(0, 4)) == 1
    assert len({pi.forward for pi in all_node_maps(3, 3)}) == 34


def test_brute_force_single_nodes():
    G, H = LabeledGraph.from_edges("a", []), LabeledGraph.from_edges("b", [])
    assert brute_force_ged(G, H, chem(1))[0] == 2
    assert brute_force_ged(G, H, chem(3))[0] == 4
    assert brute_force_ged(EMPTY, EMPTY, uniform(1.0)) == (0.0, NodeMap((), ()))


def test_brute_force_cap():
    G = LabeledGraph.from_edges("abcdef", [])
    with pytest.raises(CapExceeded):
        brute_force_ged(G, G, uniform(1.0))


def test_isomorphic_graphs_have_zero_distance():
    G = LabeledGraph.from_edges("abcab", [(0, 1, "x"), (1, 2, "y"), (2, 3, "x"), (3, 4, "z"), (0, 4, "x")])
    H = G.relabeled([2, 4, 0, 1, 3])
    assert astar_ged(G, H, NONMETRIC)[0] == 0
    assert dfs_ged(G, H, NONMETRIC).upper_bound == 0
    assert csi_ged(G, H, NONMETRIC).upper_bound == 0


@pytest.mark.parametrize("family", ["uniform", "chem1", "nonmetric"])
def test_exact_methods_agree(family):
    for name, costs, G, H in oracle_corpus(total=90, seed=41):
        if name != family:
            continue
        ged, pi = brute_force_ged(G, H, costs)
        a, a_map = astar_ged(G, H, costs)
        d, c = dfs_ged(G, H, costs), csi_ged(G, H, costs)
        assert a == pytest.approx(ged, abs=TOL)
        assert d.upper_bound == pytest.approx(ged, abs=TOL) and d.lower_bound == pytest.approx(ged, abs=TOL)
        assert c.upper_bound == pytest.approx(ged, abs=TOL) and c.lower_bound == pytest.approx(ged, abs=TOL)
        assert induced_edit_cost(G, H, costs, a_map) == pytest.approx(a)
        assert d.info["exact"] and c.info["exact"]


def test_letter_pair_within_reference_bound():
    G, H = letter_pair()
    costs = LetterCosts()
    value = astar_ged(G, H, costs)[0]
    assert value <= 2.623179 + 1e-6
    assert dfs_ged(G, H, costs).upper_bound == pytest.approx(value)
    assert csi_ged(G, H, costs).upper_bound == pytest.approx(value)


def test_multiset_mode_same_value():
    for costs in (uniform(1.0), chem(1), chem(2)):
        for G, H in random_pairs(40, 5, seed=42):
            assert dfs_ged(G, H, costs, mode="MULTISET").upper_bound == pytest.approx(
                dfs_ged(G, H, costs).upper_bound)
            assert astar_ged(G, H, costs, mode="MULTISET")[0] == pytest.approx(astar_ged(G, H, costs)[0])


def test_multiset_mode_requires_constant_costs():
    G, H = random_pairs(1, 4, seed=43, min_nodes=2)[0]
    with pytest.raises(ConfigurationError):
        dfs_ged(G, H, NONMETRIC, mode="MULTISET")
    with pytest.raises(ValidationError):
        dfs_ged(G, H, uniform(1.0), mode="FAST")


@pytest.mark.parametrize("costs", [uniform(1.0), chem(1), chem(2)], ids=repr)
def test_partial_bound_modes_coincide(costs):
    rng = make_rng(44)
    for G, H in random_pairs(200, 6, seed=45):
        for _ in range(5):
            p = make_partial(G, H, costs, random_targets(rng, G.n, H.n))
            assert partial_lb(p, G, H, costs, "MULTISET") == pytest.approx(partial_lb(p, G, H, costs, "LSAPE"))


@pytest.mark.parametrize("family", ["uniform", "chem1", "nonmetric"])
def test_partial_bound_below_completions(family):
    costs = FAMILIES[family]
    rng = make_rng(46)
    order_cache = {}
    for G, H in random_pairs(40, 4, seed=47):
        targets = random_targets(rng, G.n, H.n)
        p = make_partial(G, H, costs, targets)
        order = order_cache.setdefault(id(G), node_order(G))
        best = min(induced_edit_cost(G, H, costs, pi) for pi in all_node_maps(G.n, H.n)
                   if all(pi.forward[order[j]] == k for j, k in enumerate(targets)))
        assert partial_lb(p, G, H, costs) <= best + TOL


def test_left_complete_bound_is_completion_cost():
    rng = make_rng(48)
    for name, costs, G, H in oracle_corpus(total=60, seed=49):
        pi = list(all_node_maps(G.n, H.n))[int(rng.integers(0, sum(1 for _ in all_node_maps(G.n, H.n))))]
        order = node_order(G)
        p = make_partial(G, H, costs, tuple(pi.forward[u] for u in order))
        assert p.is_left_complete()
        assert partial_lb(p, G, H, costs) == pytest.approx(induced_edit_cost(G, H, costs, pi))


def test_empty_partial_on_edgeless_equals_node_bound():
    for G, H in random_pairs(30, 6, seed=50, p=0.0):
        p = make_partial(G, H, NONMETRIC, ())
        assert partial_lb(p, G, H, NONMETRIC) == pytest.approx(
            run_lsape_method(node_instance, G, H, NONMETRIC).lower_bound)


def test_make_partial_rejects_reuse():
    G = LabeledGraph.from_edges("ab", [])
    with pytest.raises(ValidationError):
        make_partial(G, G, uniform(1.0), (0, 0))


def test_node_order_by_degree():
    G = LabeledGraph.from_edges("abcd", [(3, 0), (3, 1), (3, 2), (0, 1)])
    assert node_order(G) == (3, 0, 1, 2)


def test_dfs_zero_time_limit_returns_initial_bound():
    G, H = random_pairs(1, 7, seed=51, min_nodes=6)[0]
    rep = dfs_ged(G, H, chem(1), time_limit=0.0)
    assert rep.upper_bound == run_lsape_method(branch_instance, G, H, chem(1)).upper_bound
    assert not rep.info["exact"]
    assert rep.lower_bound <= rep.upper_bound


def test_dfs_trace_monotone_and_pruning_sound():
    for G, H in random_pairs(30, 5, seed=52, min_nodes=2):
        trace = []
        dfs_ged(G, H, NONMETRIC, trace=trace)
        for event, value, ub in trace:
            if event == "ub":
                assert value < ub
            else:
                assert value >= ub


def test_astar_budget():
    G, H = random_pairs(1, 8, seed=53, min_nodes=8)[0]
    with pytest.raises(BudgetExceeded) as info:
        astar_ged(G, H, uniform(1.0), max_open=5)
    err = info.value
    assert err.lower_bound <= err.upper_bound


def test_csi_edgeless_is_node_lsape():
    for G, H in random_pairs(30, 6, seed=54, p=0.0):
        assert csi_ged(G, H, NONMETRIC).upper_bound == pytest.approx(
            run_lsape_method(node_instance, G, H, NONMETRIC).lower_bound)


def test_csi_requires_edge_condition():
    costs = TableCosts(node_sub={}, node_del={"a": 1.0}, node_ins={"a": 1.0},
                       edge_sub={("x", "y"): 5.0}, edge_del={"x": 1.0, "y": 1.0}, edge_ins={"x": 1.0, "y": 1.0})
    G = LabeledGraph.from_edges("aa", [(0, 1, "x")])
    H = LabeledGraph.from_edges("aa", [(0, 1, "y")])
    with pytest.raises(ConfigurationError):
        csi_ged(G, H, costs)
    assert dfs_ged(G, H, costs).upper_bound == brute_force_ged(G, H, costs)[0] == 4.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["uniform", "chem1", "nonmetric"]))
def test_property_exact_matches_brute_force(seed, family):
    G, H = random_pairs(1, 4, seed=seed)[0]
    costs = FAMILIES[family]
    ged = brute_force_ged(G, H, costs)[0]
    assert astar_ged(G, H, costs)[0] == pytest.approx(ged, abs=TOL)
    assert dfs_ged(G, H, costs).upper_bound == pytest.approx(ged, abs=TOL)
