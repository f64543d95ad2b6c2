import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import class_collection
from gedkit.bench import (CSV_HEADER, ExperimentResult, MethodRow, aggregate_scores, bound_columns,
                          classification_coefficient, extensions, joint_scores, parse_csv, run_experiment,
                          scores_table, to_csv, to_json, to_table)
from gedkit.costs import chem, uniform
from gedkit.errors import ConfigurationError, ParseError
from gedkit.exact import brute_force_ged
from gedkit.io import GraphCollection

METHODS = [("NODE", None), ("BRANCH", None), ("BRANCH", "multi_sol=5"), ("K-REFINE", "starts=4,loops=1,rho=0.5"),
           ("IPFP", "starts=3"), ("ASTAR", None)]


@pytest.fixture(scope="module")
def result():
    return run_experiment(class_collection(), uniform(1.0), METHODS, shuffled_self=True, seed=5)


def test_classification_coefficient_by_hand():
    # inter mean 4, intra mean 1, max 5
    assert classification_coefficient([1, 3, 5, 2], [True, False, False, None]) == pytest.approx(0.6)
    assert classification_coefficient([1, 2], [True, True]) is None
    assert classification_coefficient([0, 0], [True, False]) is None


def test_rows_and_pair_records(result):
    coll = class_collection()
    assert len(result.rows) == len(METHODS)
    n = len(coll)
    assert len(result.pairs) == len(METHODS) * (n * (n - 1) + n)
    assert [(r.method, r.options) for r in result.rows] == sorted((r.method, r.options) for r in result.rows)


def test_exact_row_matches_brute_force(result):
    coll = class_collection()
    exact = {(r.g, r.h): r.ub for r in result.pairs if r.method == "ASTAR" and not r.self_pair}
    for (g, h), ub in exact.items():
        assert ub == pytest.approx(brute_force_ged(coll.by_id(g), coll.by_id(h), uniform(1.0))[0])
    row = next(r for r in result.rows if r.method == "ASTAR")
    assert row.d_lb == pytest.approx(row.d_ub)


def test_bounds_bracket_exact_mean(result):
    exact = next(r for r in result.rows if r.method == "ASTAR").d_ub
    for r in result.rows:
        if r.d_lb is not None:
            assert r.d_lb <= exact + 1e-9
        if r.d_ub is not None:
            assert r.d_ub >= exact - 1e-9


def test_shuffled_self_mean(result):
    for r in result.rows:
        assert r.d_hat is not None and r.d_hat >= 0
    assert next(r for r in result.rows if r.method == "ASTAR").d_hat == 0


def test_classes_separate(result):
    assert next(r for r in result.rows if r.method == "ASTAR").c_ub > 0


def test_missing_bounds_are_none(result):
    node = next(r for r in result.rows if r.method == "NODE")
    ls = next(r for r in result.rows if r.method == "IPFP")
    assert node.d_lb is not None and ls.d_lb is None and ls.c_lb is None


def test_threads_do_not_change_bounds():
    coll = class_collection()
    one = run_experiment(coll, chem(1), METHODS[:5], threads=1, seed=9)
    eight = run_experiment(coll, chem(1), METHODS[:5], threads=8, seed=9)
    assert bound_columns(one) == bound_columns(eight)


def test_csv_round_trip(result):
    text = to_csv(result)
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    back = parse_csv(text)
    assert back.rows == result.rows
    assert to_csv(back) == text


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["NODE", "BRANCH", "IPFP"]), st.sampled_from(["", "a=1,b=2"]),
                          *[st.one_of(st.none(), st.floats(-1e6, 1e6, allow_nan=False))] * 5), max_size=6))
def test_csv_round_trip_property(rows):
    res = ExperimentResult(tuple(MethodRow(*r) for r in rows))
    assert parse_csv(to_csv(res)).rows == res.rows


@pytest.mark.parametrize("text, fragment", [
    ("", "empty"),
    ("method,options\n", "header"),
    (",".join(CSV_HEADER) + "\nNODE,,1,2\n", "line 2"),
    (",".join(CSV_HEADER) + "\nNODE,,x,2,3,4,5\n", "cannot read"),
])
def test_csv_parse_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_csv(text)


def test_json_and_table(result):
    data = json.loads(to_json(result))
    assert len(data["rows"]) == len(result.rows)
    table = to_table(result)
    assert table.splitlines()[0].split()[:3] == ["method", "options", "d_lb"]


def test_empty_work():
    assert run_experiment(GraphCollection(()), uniform(1.0), ["NODE"]).rows == ()
    assert to_csv(ExperimentResult(())) == ",".join(CSV_HEADER) + "\n"


def test_unknown_method_fails_before_running():
    with pytest.raises(ConfigurationError):
        run_experiment(class_collection(), uniform(1.0), [("NODE", "beam=2")])


def test_unfit_costs_give_error_row():
    res = run_experiment(class_collection(), chem(1), ["STAR", "NODE"])
    star = next(r for r in res.rows if r.method == "STAR")
    assert star.error and star.d_lb is None
    assert "STAR" in to_table(res)


def test_explicit_pairs():
    res = run_experiment(class_collection(), uniform(1.0), ["NODE"], pairs=[("A0", "B0"), ("B0", "A0")])
    assert len(res.pairs) == 2 and res.rows[0].c_lb is None


def row(method, options, d, t, c, kind="UB"):
    vals = dict(d_lb=None, d_ub=None, c_lb=None, c_ub=None)
    vals["d_ub" if kind == "UB" else "d_lb"] = d
    vals["c_ub" if kind == "UB" else "c_lb"] = c
    return MethodRow(method, options, t_mean_s=t, **vals)


def test_joint_score_by_hand():
    rows = [row("BRANCH", "", 10.0, 1.0, 0.5), row("IPFP", "", 8.0, 4.0, 0.25), row("NODE", "", 12.0, 2.0, 0.5)]
    scores = {s.row.method: s for s in joint_scores(rows, "UB")}
    assert scores["BRANCH"].score == pytest.approx((0.8 + 1 + 1) / 3)
    assert scores["IPFP"].score == pytest.approx((1 + 0.25 + 0.5) / 3)
    assert scores["BRANCH"].pareto and scores["IPFP"].pareto and not scores["NODE"].pareto


def test_joint_score_lower_bounds():
    rows = [row("NODE", "", 4.0, 1.0, 0.2, "LB"), row("BRANCH", "", 8.0, 2.0, None, "LB")]
    scores = {s.row.method: s for s in joint_scores(rows, "LB")}
    assert scores["NODE"].score == pytest.approx((0.5 + 1 + 1) / 3)
    assert scores["BRANCH"].score == pytest.approx((1 + 0.5 + 0) / 3)
    with pytest.raises(ConfigurationError):
        joint_scores(rows, "XX")


def test_extension_membership():
    assert extensions(row("BRANCH", "multi_sol=3", 1, 1, 1)) == ("MULTI-SOL",)
    assert extensions(row("BRANCH", "centrality=pagerank,gamma=0.5", 1, 1, 1)) == ("CENTRALITIES",)
    assert extensions(row("K-REFINE", "starts=4,loops=2", 1, 1, 1)) == ("MULTI-START", "RANDPOST")
    assert extensions(row("ASTAR", "", 1, 1, 1)) == ()


def test_aggregate_scores(result):
    scores = aggregate_scores(result)
    names = {(s.kind, s.name) for s in scores}
    assert ("UB", "MULTI-SOL") in names and ("LB", "NODE") in names
    for s in scores:
        assert 0 <= s.score <= 1 and set(s.chi) <= {0, 1}
    assert scores_table(scores).startswith("kind")


def test_aggregate_scores_survive_round_trip(result):
    assert aggregate_scores(parse_csv(to_csv(result))) == aggregate_scores(result)
