import json

import pytest
from click.testing import CliRunner

from conftest import LETTER_COLLECTION, class_collection
from gedkit.bench import parse_csv
from gedkit.cli import main
from gedkit.io import write_gxl

LETTER = ["--collection", str(LETTER_COLLECTION), "--graphs", "G.gxl,H.gxl", "--costs", "LETTER"]


def invoke(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


@pytest.fixture
def classes_dir(tmp_path):
    coll = class_collection()
    prints = []
    for g in coll.graphs:
        (tmp_path / f"{g.graph_id}.gxl").write_text(write_gxl(g))
        prints.append(f'<print file="{g.graph_id}.gxl" class="{g.class_tag}"/>')
    (tmp_path / "c.cxl").write_text("<GraphCollection>" + "".join(prints) + "</GraphCollection>")
    return tmp_path


def test_compute_table():
    res = invoke("compute", *LETTER, "--method", "BRANCH")
    assert res.exit_code == 0, res.output
    assert res.output.startswith("G.gxl -> H.gxl: LB ")
    assert "node map:" in res.output


def test_compute_json_and_options():
    res = invoke("compute", *LETTER, "--method", "k-refine", "--options", "starts=3,K=2", "--format", "json",
                 "--seed", 4)
    assert res.exit_code == 0, res.output
    d = json.loads(res.output)
    assert d["lower_bound"] is None and d["upper_bound"] <= 3.5 and d["node_map"]


def test_compute_csv(tmp_path):
    out = tmp_path / "r.csv"
    res = invoke("compute", *LETTER, "--method", "NODE", "--format", "csv", "--output", out)
    assert res.exit_code == 0 and res.output == ""
    head, vals = out.read_text().splitlines()
    assert head == "g,h,lower_bound,upper_bound,seconds" and vals.startswith("G.gxl,H.gxl,")


def test_compute_from_gxl_paths():
    paths = ",".join(str(LETTER_COLLECTION.parent / f) for f in ("G.gxl", "H.gxl"))
    res = invoke("compute", "--graphs", paths, "--costs", "LETTER", "--method", "BRANCH-TIGHT")
    assert res.exit_code == 0, res.output


def test_exact_letter_pair():
    res = invoke("exact", *LETTER, "--format", "json")
    assert res.exit_code == 0, res.output
    d = json.loads(res.output)
    assert d["exact"] and d["upper_bound"] <= 2.623179 + 1e-6
    for method in ("DFS-GED", "CSI-GED"):
        other = json.loads(invoke("exact", *LETTER, "--method", method, "--format", "json").output)
        assert other["upper_bound"] == pytest.approx(d["upper_bound"])


def test_exact_rejects_heuristics():
    assert invoke("exact", *LETTER, "--method", "BRANCH").exit_code == 2


@pytest.mark.parametrize("args", [
    ("compute", *LETTER, "--method", "NOPE"),
    ("compute", *LETTER, "--method", "BRANCH", "--options", "beam=2"),
    ("compute", *LETTER, "--method", "BRANCH", "--costs", "CONSTANT:1,2"),
    ("compute", "--collection", LETTER_COLLECTION, "--graphs", "G.gxl", "--method", "NODE"),
    ("compute", "--method", "NODE"),
    ("bench", "--method", "NODE"),
    ("compute", *LETTER, "--method", "NODE", "--threads", 0),
])
def test_usage_errors_exit_2(args):
    assert invoke(*args).exit_code == 2


def test_runtime_errors_exit_1(tmp_path):
    res = invoke("compute", "--collection", LETTER_COLLECTION, "--graphs", "G.gxl,Z.gxl", "--method", "NODE")
    assert res.exit_code == 1 and "Z.gxl" in res.output
    bad = tmp_path / "bad.gxl"
    bad.write_text("<gxl><graph>")
    res = invoke("compute", "--graphs", f"{bad},{bad}", "--method", "NODE")
    assert res.exit_code == 1 and "malformed" in res.output
    res = invoke("compute", *LETTER[:4], "--costs", "UNIFORM", "--method", "STAR")
    assert res.exit_code == 0
    res = invoke("compute", *LETTER, "--method", "STAR")
    assert res.exit_code == 1


def test_bench_csv_then_score(classes_dir):
    out = classes_dir / "r.csv"
    res = invoke("bench", "--collection", classes_dir / "c.cxl", "--method", "NODE", "--method", "BRANCH",
                 "--method", "IPFP", "--options", "", "--options", "multi_sol=3", "--options", "starts=2",
                 "--format", "csv", "--output", out, "--shuffled-self", "--threads", 2)
    assert res.exit_code == 0, res.output
    rows = parse_csv(out.read_text()).rows
    assert [(r.method, r.options) for r in rows] == [("BRANCH", "multi_sol=3"), ("IPFP", "starts=2"), ("NODE", "")]
    res = invoke("bench", "score", "--input", out)
    assert res.exit_code == 0 and res.output.startswith("kind")
    res = invoke("bench", "score", "--input", out, "--format", "json")
    assert {d["name"] for d in json.loads(res.output)} >= {"NODE", "MULTI-SOL"}


def test_bench_table_and_subset(classes_dir):
    res = invoke("bench", "--collection", classes_dir / "c.cxl", "--graphs", "A0.gxl,B0.gxl", "--method", "BRANCH")
    assert res.exit_code == 0 and res.output.startswith("method")


def test_bench_errors(classes_dir, tmp_path):
    coll = classes_dir / "c.cxl"
    assert invoke("bench", "--collection", coll).exit_code == 2
    assert invoke("bench", "--collection", coll, "--method", "NODE", "--method", "BRANCH",
                  "--options", "").exit_code == 2
    (tmp_path / "bad.csv").write_text("nope\n")
    res = invoke("bench", "score", "--input", tmp_path / "bad.csv")
    assert res.exit_code == 1 and "header" in res.output
    assert invoke("bench", "score", "--input", tmp_path / "missing.csv").exit_code == 1


def test_lsape_generate_machol_wien():
    res = invoke("lsape", "generate", "--family", "machol-wien", "--n", 3, "--m", 3)
    assert res.exit_code == 0
    assert res.output.splitlines() == ["0 0 0 0", "0 1 2 3", "0 2 4 6", "0 3 6 0"]


def test_lsape_generate_is_seeded():
    a = invoke("lsape", "generate", "--family", "random", "--n", 4, "--m", 5, "--seed", 3).output
    b = invoke("lsape", "generate", "--family", "random", "--n", 4, "--m", 5, "--seed", 3).output
    assert a == b and len(a.splitlines()) == 5 and len(a.splitlines()[0].split()) == 6


def test_lsape_solve_and_enumerate(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("1 5 3\n4 1 3\n2 2 0\n")
    res = invoke("lsape", "solve", "--input", path)
    assert res.exit_code == 0 and res.output == "cost 2: 0->0 1->1\n"
    path.write_text("0 0 1\n0 0 1\n1 1 0\n")
    res = invoke("lsape", "solve", "--input", path, "--enumerate", 5, "--format", "json")
    sols = json.loads(res.output)
    assert len(sols) == 2 and all(s["cost"] == 0 for s in sols)


def test_lsape_solve_from_stdin():
    res = CliRunner().invoke(main, ["lsape", "solve", "--input", "-", "--solver", "greedy"], input="0 1\n1 0\n")
    assert res.exit_code == 0 and res.output.startswith("cost 0:")


def test_lsape_solve_errors(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("1 2\n3\n")
    assert invoke("lsape", "solve", "--input", path).exit_code == 1
    path.write_text("1 a\n")
    assert invoke("lsape", "solve", "--input", path).exit_code == 1
    assert invoke("lsape", "solve", "--input", tmp_path / "none.txt").exit_code == 1
