"""Command line interface: compute, exact, bench, bench score, lsape."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import bench as bench_mod
from .costs import EditCostModel, cost_preset, harmonize_costs, present_labels
from .errors import ConfigurationError, GedError
from .generators import flat, machol_wien, random_instance
from .graph import EPS_INDEX
from .io import GraphCollection, load_collection, parse_gxl
from .lsape import LsapeInstance, enumerate_optimal, solve_lsape
from .methods import METHODS, get_method, resolve_options, run_method

EXACT = tuple(name for name, m in METHODS.items() if m.exact)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _costs(spec: str) -> EditCostModel:
    """NAME or NAME:p1,p2,... e.g. UNIFORM:2 or CONSTANT:2,4,4,1,1,1."""
    name, _, rest = spec.partition(":")
    try:
        params = tuple(float(x) for x in rest.split(",") if x.strip()) if rest else ()
        return cost_preset(name, *params)
    except (ValueError, ConfigurationError) as exc:
        raise click.BadParameter(str(exc), param_hint="--costs") from None


def _check_method(name: str, options: str | None, allowed=None) -> str:
    try:
        method = get_method(name)
        resolve_options(method, options)
    except ConfigurationError as exc:
        raise click.UsageError(str(exc)) from None
    if allowed is not None and method.name not in allowed:
        raise click.UsageError(f"{method.name} is not one of {', '.join(allowed)}")
    return method.name


def _ids(text: str | None) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()] if text else []


def _load(collection: str | None, graphs: str | None) -> tuple[GraphCollection, list[str]]:
    """A collection file, or GXL paths given directly through --graphs."""
    ids = _ids(graphs)
    if collection:
        coll = load_collection(collection)
        known = {g.graph_id for g in coll.graphs}
        for gid in ids:
            if gid not in known:
                _fail(f"no graph {gid!r} in collection")
        return coll, ids
    if not ids:
        raise click.UsageError("give --collection or GXL paths through --graphs")
    loaded = []
    for path in ids:
        try:
            data = Path(path).read_bytes()
        except OSError:
            _fail(f"cannot read {path}")
        loaded.append(parse_gxl(data, path, graph_id=path))
    return GraphCollection(tuple(loaded)), ids


def _pair(collection: str | None, graphs: str | None):
    coll, ids = _load(collection, graphs)
    if len(ids) != 2:
        raise click.UsageError("--graphs needs exactly two ids")
    return coll, coll.by_id(ids[0]), coll.by_id(ids[1])


def _harmonized(costs: EditCostModel, graphs, enabled: bool) -> EditCostModel:
    if not enabled:
        return costs
    return harmonize_costs(costs, *present_labels(*graphs))


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


def _report_dict(rep, G, H) -> dict:
    out = {"g": G.graph_id, "h": H.graph_id, "lower_bound": rep.lower_bound, "upper_bound": rep.upper_bound,
           "seconds": rep.wall_time}
    if rep.node_map is not None:
        out["node_map"] = [[i, k] for i, k in rep.node_map.pairs()]
    seq = getattr(rep, "lb_sequence", ())
    if seq:
        out["lb_sequence"] = list(seq)
    return out


def _format_report(d: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(d, indent=2) + "\n"
    if fmt == "csv":
        keys = ("g", "h", "lower_bound", "upper_bound", "seconds")
        vals = ["" if d[k] is None else (repr(float(d[k])) if isinstance(d[k], float) else str(d[k])) for k in keys]
        return ",".join(keys) + "\n" + ",".join(vals) + "\n"
    lb = "-" if d["lower_bound"] is None else f"{d['lower_bound']:.6f}"
    ub = "-" if d["upper_bound"] is None else f"{d['upper_bound']:.6f}"
    lines = [f"{d['g']} -> {d['h']}: LB {lb}  UB {ub}  time {d['seconds']:.6f} s"]
    if "node_map" in d:
        show = lambda x: "eps" if x == EPS_INDEX else str(x)
        lines.append("node map: " + " ".join(f"{show(i)}->{show(k)}" for i, k in d["node_map"]))
    return "\n".join(lines) + "\n"


_common = [
    click.option("--collection", type=click.Path(dir_okay=False), help="Collection XML listing GXL files."),
    click.option("--graphs", help="Comma-separated graph ids, or GXL paths without --collection."),
    click.option("--costs", "cost_spec", default="UNIFORM", show_default=True,
                 help="Preset: UNIFORM[:c], CONSTANT:vs,vd,vi,es,ed,ei, CHEM_1..3, LETTER[:params]."),
    click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=0, show_default=True),
    click.option("--time-limit", type=click.FloatRange(min=0, min_open=True), default=None, help="Seconds."),
    click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True),
    click.option("--harmonize", is_flag=True, help="Replace costs by shortest-path costs over present labels."),
    click.option("--output", type=click.Path(dir_okay=False), help="Write to a file instead of stdout."),
    click.option("--format", "fmt", type=click.Choice(["csv", "table", "json"]), default="table",
                 show_default=True),
]


def common(f):
    for opt in reversed(_common):
        f = opt(f)
    return f


@click.group()
def main() -> None:
    """Graph edit distance bounds, exact search and benchmarks."""


@main.command()
@common
@click.option("--method", required=True, help="Method name, e.g. BRANCH or K-REFINE.")
@click.option("--options", default=None, help='Method options as "k=v,...".')
def compute(collection, graphs, cost_spec, seed, time_limit, threads, harmonize, output, fmt, method, options):
    """Run one method on one pair of graphs."""
    name = _check_method(method, options)
    costs = _costs(cost_spec)
    try:
        coll, G, H = _pair(collection, graphs)
        costs = _harmonized(costs, coll.graphs, harmonize)
        rep = run_method(name, G, H, costs, options, seed=seed, time_limit=time_limit, workers=threads)
    except GedError as exc:
        _fail(str(exc))
    _emit(_format_report(_report_dict(rep, G, H), fmt), output)


@main.command()
@common
@click.option("--method", default="ASTAR", show_default=True, help=f"One of {', '.join(EXACT)}.")
@click.option("--options", default=None, help='Method options as "k=v,...".')
def exact(collection, graphs, cost_spec, seed, time_limit, threads, harmonize, output, fmt, method, options):
    """Exact GED of one pair; reports bounds if the time limit is hit."""
    name = _check_method(method, options, EXACT)
    costs = _costs(cost_spec)
    try:
        coll, G, H = _pair(collection, graphs)
        costs = _harmonized(costs, coll.graphs, harmonize)
        rep = run_method(name, G, H, costs, options, seed=seed, time_limit=time_limit, workers=threads)
    except GedError as exc:
        _fail(str(exc))
    d = _report_dict(rep, G, H)
    d["exact"] = bool(rep.info.get("exact", rep.lower_bound is not None and
                                    rep.upper_bound - rep.lower_bound <= 1e-9 * (1 + abs(rep.upper_bound))))
    _emit(_format_report(d, fmt), output)


@main.group(invoke_without_command=True)
@common
@click.option("--method", "methods", multiple=True, help="Repeat for several methods.")
@click.option("--options", "options", multiple=True,
              help="Options per --method, in the same order; give none or one per method.")
@click.option("--shuffled-self", is_flag=True, help="Also run each graph against a shuffled copy of itself.")
@click.pass_context
def bench(ctx, collection, graphs, cost_spec, seed, time_limit, threads, harmonize, output, fmt, methods, options,
          shuffled_self):
    """Run methods on all ordered pairs of a collection."""
    if ctx.invoked_subcommand is not None:
        return
    if not collection:
        raise click.UsageError("bench needs --collection")
    if not methods:
        raise click.UsageError("bench needs at least one --method")
    if options and len(options) != len(methods):
        raise click.UsageError("give one --options per --method, or none")
    specs = [(_check_method(m, o), o or None) for m, o in zip(methods, options or [None] * len(methods))]
    costs = _costs(cost_spec)
    try:
        coll, ids = _load(collection, graphs)
        if ids:
            keep = set(ids)
            coll = GraphCollection(tuple(g for g in coll.graphs if g.graph_id in keep),
                                   {k: v for k, v in coll.classes.items() if k in keep})
        costs = _harmonized(costs, coll.graphs, harmonize)
        result = bench_mod.run_experiment(coll, costs, specs, shuffled_self=shuffled_self, threads=threads,
                                          time_limit=time_limit, seed=seed)
    except GedError as exc:
        _fail(str(exc))
    text = {"csv": bench_mod.to_csv, "json": bench_mod.to_json, "table": bench_mod.to_table}[fmt](result)
    _emit(text, output)


@bench.command()
@click.option("--input", "path", required=True, type=click.Path(dir_okay=False), help="CSV written by bench.")
@click.option("--output", type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", show_default=True)
def score(path, output, fmt):
    """Joint scores, Pareto maxima and indicator vectors over a bench CSV."""
    try:
        result = bench_mod.parse_csv(Path(path).read_text())
        scores = bench_mod.aggregate_scores(result)
    except OSError as exc:
        _fail(str(exc))
    except GedError as exc:
        _fail(str(exc))
    if fmt == "json":
        text = json.dumps([{"kind": s.kind, "name": s.name, "score": s.score, "chi": list(s.chi)} for s in scores],
                          indent=2) + "\n"
    else:
        text = bench_mod.scores_table(scores)
    _emit(text, output)


@main.group()
def lsape() -> None:
    """Generate and solve LSAPE instances."""


def _matrix_text(C: np.ndarray) -> str:
    return "\n".join(" ".join(f"{x:g}" for x in row) for row in C) + "\n"


@lsape.command()
@click.option("--family", required=True, type=click.Choice(["machol-wien", "flat", "random"]))
@click.option("--n", type=click.IntRange(min=1), required=True)
@click.option("--m", type=click.IntRange(min=1), required=True)
@click.option("--alpha", type=float, default=10.0, show_default=True, help="flat: substitution cost.")
@click.option("--p", type=click.FloatRange(0, 100), default=0.0, show_default=True,
              help="flat: percent of cheap deletions and insertions.")
@click.option("--c-sub", type=float, default=40.0, show_default=True, help="random: node substitution cost.")
@click.option("--c-v", type=float, default=20.0, show_default=True, help="random: node deletion cost.")
@click.option("--c-e", type=float, default=20.0, show_default=True, help="random: edge edit cost.")
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=0, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False))
def generate(family, n, m, alpha, p, c_sub, c_v, c_e, seed, output):
    """Print an (n+1)x(m+1) instance, one whitespace-separated row per line."""
    if family == "machol-wien":
        inst = machol_wien(n, m)
    elif family == "flat":
        inst = flat(n, m, alpha, p, seed)
    else:
        inst = random_instance(n, m, c_sub, c_v, c_e, seed)
    _emit(_matrix_text(inst.C), output)


def _read_matrix(path: str) -> LsapeInstance:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    rows = [line.replace(",", " ").split() for line in text.splitlines() if line.strip()]
    try:
        C = np.array([[float(x) for x in row] for row in rows])
    except ValueError as exc:
        raise GedError(f"cannot read matrix: {exc}") from None
    if C.ndim != 2:
        raise GedError("matrix rows have different lengths")
    return LsapeInstance(C)


@lsape.command()
@click.option("--input", "path", required=True, help="Matrix file with the dummy row and column last; - for stdin.")
@click.option("--solver", type=click.Choice(["optimal", "greedy"]), default="optimal", show_default=True)
@click.option("--enumerate", "count", type=click.IntRange(min=1), default=1, show_default=True,
              help="Print up to this many optimal solutions.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", show_default=True)
def solve(path, solver, count, fmt):
    """Solve an instance read from a file."""
    try:
        inst = _read_matrix(path)
        sols = enumerate_optimal(inst, count) if solver == "optimal" else [solve_lsape(inst, solver)]
    except OSError as exc:
        _fail(str(exc))
    except GedError as exc:
        _fail(str(exc))
    if fmt == "json":
        click.echo(json.dumps([{"cost": s.cost, "pairs": [[i, k] for i, k in s.matching.pairs()]} for s in sols],
                              indent=2))
        return
    show = lambda x: "eps" if x == EPS_INDEX else str(x)
    for s in sols:
        click.echo(f"cost {s.cost:g}: " + " ".join(f"{show(i)}->{show(k)}" for i, k in s.matching.pairs()))


if __name__ == "__main__":
    main()
