import pytest

from conftest import FAMILIES, NONMETRIC, letter_pair, random_pairs
from gedkit.branch_tight import DUMMY_EDGE, DUMMY_NODE, branch_tight, pad_pair, padded_size
from gedkit.costs import LetterCosts, chem, uniform
from gedkit.errors import ValidationError
from gedkit.exact import brute_force_ged
from gedkit.graph import LabeledGraph, induced_edit_cost
from gedkit.heuristics import branch_instance, run_lsape_method

TOL = 1e-9


def test_padded_size_by_quasimetric_flag():
    G = LabeledGraph.from_edges("abc", [(0, 1, "x")])
    H = LabeledGraph.from_edges("ab", [])
    assert padded_size(G, H, uniform(1.0)) == 3
    assert padded_size(G, H, NONMETRIC) == 5


def test_padding_builds_complete_graphs():
    G = LabeledGraph.from_edges("abc", [(0, 1, "x")])
    P = pad_pair(G, LabeledGraph.from_edges("a", []), uniform(1.0))
    assert P.N == 3 and P.G.num_edges == 3 and P.H.num_edges == 3
    assert P.H.node_labels == ("a", DUMMY_NODE, DUMMY_NODE)
    assert P.G.edge_label(1, 2) is DUMMY_EDGE and P.G.edge_label(0, 1) == "x"
    assert P.costs.node_sub(DUMMY_NODE, DUMMY_NODE) == 0
    assert P.costs.edge_del(DUMMY_EDGE) == P.costs.edge_ins(DUMMY_EDGE) == 0


def test_padding_rejects_small_size():
    G = LabeledGraph.from_edges("abc", [])
    with pytest.raises(ValidationError):
        pad_pair(G, G, uniform(1.0), N=2)


@pytest.mark.parametrize("family", ["uniform", "chem1", "nonmetric"])
def test_padding_preserves_ged(family):
    costs = FAMILIES[family]
    limit = 5 if family == "nonmetric" else 4
    checked = 0
    for G, H in random_pairs(40, limit, seed=31):
        P = pad_pair(G, H, costs)
        if 2 * P.N > 10 or P.N == 0:
            continue
        assert brute_force_ged(P.G, P.H, P.costs)[0] == pytest.approx(brute_force_ged(G, H, costs)[0])
        checked += 1
    assert checked >= 15


def test_rejects_bad_parameters():
    G = LabeledGraph.from_edges("ab", [(0, 1)])
    with pytest.raises(ValidationError):
        branch_tight(G, G, uniform(1.0), I=1)
    with pytest.raises(ValidationError):
        branch_tight(G, G, uniform(1.0), eps=-1)


@pytest.mark.parametrize("family", ["uniform", "chem1", "nonmetric"])
def test_contract_against_branch_and_exact(family):
    costs = FAMILIES[family]
    for G, H in random_pairs(40, 5, seed=32):
        rep = branch_tight(G, H, costs)
        seq = rep.lb_sequence
        assert seq[0] == pytest.approx(run_lsape_method(branch_instance, G, H, costs).lower_bound, abs=TOL)
        assert all(b >= a - TOL for a, b in zip(seq, seq[1:]))
        assert rep.lower_bound == seq[-1]
        ged = brute_force_ged(G, H, costs)[0]
        assert rep.lower_bound <= ged + TOL <= rep.upper_bound + 2 * TOL
        assert rep.upper_bound == pytest.approx(induced_edit_cost(G, H, costs, rep.node_map))
        assert len(rep.node_map.forward) == G.n and len(rep.node_map.backward) == H.n


def test_iteration_cap_and_convergence_info():
    for G, H in random_pairs(20, 7, seed=33, min_nodes=3):
        rep = branch_tight(G, H, chem(2), I=3, eps=0.0)
        assert len(rep.lb_sequence) <= 3
        assert rep.info["iterations"] == len(rep.lb_sequence)


def test_zero_time_limit_still_returns_bounds():
    G, H = random_pairs(1, 8, seed=34, min_nodes=6)[0]
    rep = branch_tight(G, H, uniform(1.0), time_limit=0.0)
    assert len(rep.lb_sequence) >= 1
    assert rep.lower_bound <= rep.upper_bound


def test_tightens_on_letter_pair():
    G, H = letter_pair()
    rep = branch_tight(G, H, LetterCosts())
    branch = run_lsape_method(branch_instance, G, H, LetterCosts())
    assert rep.lower_bound >= branch.lower_bound - TOL
    assert rep.upper_bound <= 2.623179 + 1e-6


def test_trivial_sizes():
    empty = LabeledGraph.from_edges([], [])
    one = LabeledGraph.from_edges("a", [])
    assert branch_tight(empty, empty, uniform(1.0)).upper_bound == 0
    rep = branch_tight(one, empty, chem(1))
    assert rep.lower_bound == rep.upper_bound == 4
    rep = branch_tight(one, LabeledGraph.from_edges("b", []), chem(1))
    assert rep.lower_bound == rep.upper_bound == 2


def test_workers_do_not_change_result():
    for G, H in random_pairs(5, 7, seed=35, min_nodes=4):
        a = branch_tight(G, H, NONMETRIC, workers=1)
        b = branch_tight(G, H, NONMETRIC, workers=4)
        assert a.lb_sequence == b.lb_sequence and a.upper_bound == b.upper_bound
