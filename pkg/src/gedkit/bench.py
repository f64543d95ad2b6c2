"""Experiment driver over graph collections, result tables and joint scores."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

from .costs import EditCostModel
from .errors import BoundViolation, ConfigurationError, ParseError
from .graph import LabeledGraph
from .io import GraphCollection
from .methods import LS_PARADIGM, LSAPE_PARADIGM, format_options, get_method, resolve_options, run_method
from .rng import make_rng, run_seed

CSV_HEADER = ("method", "options", "d_lb", "d_ub", "t_mean_s", "c_lb", "c_ub")


@dataclass(frozen=True)
class MethodRow:
    method: str
    options: str
    d_lb: float | None
    d_ub: float | None
    t_mean_s: float | None
    c_lb: float | None
    c_ub: float | None
    # Mean bound on shuffled-self pairs, whose optimum is 0.
    d_hat: float | None = field(default=None, compare=False)
    error: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class PairRecord:
    method: str
    options: str
    g: str
    h: str
    lb: float | None
    ub: float | None
    seconds: float
    self_pair: bool = False


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple[MethodRow, ...]
    pairs: tuple[PairRecord, ...] = field(default=(), compare=False)


MethodSpec = tuple[str, str | dict | None]


def _spec_list(methods) -> list[tuple[str, str]]:
    out = []
    for spec in methods:
        name, options = (spec, None) if isinstance(spec, str) else spec
        out.append((get_method(name).name, format_options(options)))
    return out


def _pair_list(collection: GraphCollection, pairs, shuffled_self: bool, seed: int) -> list[tuple]:
    """(G, H, self_pair) triples: all ordered pairs of distinct graphs, then shuffled copies."""
    if pairs is None:
        out = [(g, h, False) for g in collection.graphs for h in collection.graphs if g.graph_id != h.graph_id]
    else:
        out = [(collection.by_id(a), collection.by_id(b), False) for a, b in pairs]
    if shuffled_self:
        for t, g in enumerate(collection.graphs):
            perm = [int(x) for x in make_rng(run_seed(seed, 0x5E1F_0000 + t)).permutation(g.n)]
            out.append((g, g.relabeled(perm, graph_id=f"{g.graph_id}~shuffled"), True))
    return out


def _mean(values: list[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def classification_coefficient(values: list[float], same_class: list[bool | None]) -> float | None:
    """(mean inter-class - mean intra-class) / max value; None without both kinds of pairs."""
    inter = [v for v, s in zip(values, same_class) if s is False]
    intra = [v for v, s in zip(values, same_class) if s is True]
    if not inter or not intra:
        return None
    top = max(values)
    if top <= 0:
        return None
    return (math.fsum(inter) / len(inter) - math.fsum(intra) / len(intra)) / top


def _same_class(collection: GraphCollection, g: LabeledGraph, h: LabeledGraph) -> bool | None:
    a, b = collection.classes.get(g.graph_id), collection.classes.get(h.graph_id)
    return None if a is None or b is None else a == b


def run_experiment(collection: GraphCollection, costs: EditCostModel, methods, pairs=None,
                   shuffled_self: bool = False, threads: int = 1, time_limit: float | None = None,
                   seed: int = 0) -> ExperimentResult:
    """Run every method on every selected pair.

    Each pair gets the seed run_seed(seed, pair index), so bounds do not depend
    on the thread count. A method whose options or costs do not fit reports an
    error row; a lower bound above an upper bound aborts the run.
    """
    specs = _spec_list(methods)
    for name, options in specs:
        resolve_options(get_method(name), options)
    work = _pair_list(collection, pairs, shuffled_self, seed)
    if not work:
        return ExperimentResult(())

    def one(t: int) -> list[PairRecord | tuple[str, str, str]]:
        g, h, self_pair = work[t]
        out = []
        for name, options in specs:
            start = time.perf_counter()
            try:
                rep = run_method(name, g, h, costs, options, seed=run_seed(seed, t), time_limit=time_limit)
            except BoundViolation as exc:
                raise BoundViolation(f"{name} on ({g.graph_id}, {h.graph_id}): {exc}") from exc
            except ConfigurationError as exc:
                out.append((name, options, str(exc)))
                continue
            out.append(PairRecord(name, options, g.graph_id, h.graph_id, rep.lower_bound, rep.upper_bound,
                                  time.perf_counter() - start, self_pair))
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(one, range(len(work))))
    else:
        chunks = [one(t) for t in range(len(work))]

    records = [r for chunk in chunks for r in chunk if isinstance(r, PairRecord)]
    errors: dict[tuple[str, str], str] = {}
    for chunk in chunks:
        for r in chunk:
            if not isinstance(r, PairRecord):
                errors.setdefault((r[0], r[1]), r[2])
    rows = []
    for name, options in sorted(set(specs)):
        mine = [r for r in records if (r.method, r.options) == (name, options)]
        regular = [r for r in mine if not r.self_pair]
        shuffled = [r for r in mine if r.self_pair]
        same = [_same_class(collection, collection.by_id(r.g), collection.by_id(r.h)) for r in regular]
        lbs = [r.lb for r in regular if r.lb is not None]
        ubs = [r.ub for r in regular if r.ub is not None]
        has_lb = bool(regular) and len(lbs) == len(regular)
        has_ub = bool(regular) and len(ubs) == len(regular)
        hat_vals = [r.ub if r.ub is not None else r.lb for r in shuffled]
        rows.append(MethodRow(
            name, options,
            _mean(lbs) if has_lb else None,
            _mean(ubs) if has_ub else None,
            _mean([r.seconds for r in mine]),
            classification_coefficient(lbs, same) if has_lb else None,
            classification_coefficient(ubs, same) if has_ub else None,
            _mean([v for v in hat_vals if v is not None]),
            errors.get((name, options)),
        ))
    records.sort(key=lambda r: (r.method, r.options, r.g, r.h))
    return ExperimentResult(tuple(rows), tuple(records))


def bound_columns(result: ExperimentResult) -> list[tuple]:
    """Everything except timings; equal across thread counts for a fixed seed."""
    return [(r.method, r.options, r.d_lb, r.d_ub, r.c_lb, r.c_ub, r.d_hat) for r in result.rows]


# Output formats


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def to_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in result.rows:
        w.writerow([_cell(getattr(r, k)) for k in CSV_HEADER])
    return buf.getvalue()


def _float(text: str, where: str) -> float | None:
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"cannot read {text!r} as a number", where) from None


def parse_csv(text: str) -> ExperimentResult:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty result file") from None
    if tuple(header) != CSV_HEADER:
        raise ParseError(f"unexpected header {','.join(header)!r}", "line 1")
    rows = []
    for t, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(CSV_HEADER):
            raise ParseError(f"expected {len(CSV_HEADER)} fields, found {len(rec)}", f"line {t}")
        rows.append(MethodRow(rec[0], rec[1], *(_float(x, f"line {t}") for x in rec[2:])))
    return ExperimentResult(tuple(rows))


def to_json(result: ExperimentResult) -> str:
    return json.dumps({"rows": [asdict(r) for r in result.rows]}, indent=2)


def _fmt(v, digits: int) -> str:
    return "-" if v is None else f"{v:.{digits}f}"


def to_table(result: ExperimentResult) -> str:
    head = ("method", "options", "d_lb", "d_ub", "t_mean_s", "c_lb", "c_ub", "d_hat")
    lines = [[r.method, r.options or "-", _fmt(r.d_lb, 2), _fmt(r.d_ub, 2), _fmt(r.t_mean_s, 6), _fmt(r.c_lb, 2),
              _fmt(r.c_ub, 2), _fmt(r.d_hat, 2)] for r in result.rows]
    widths = [max([len(h)] + [len(x[c]) for x in lines]) for c, h in enumerate(head)]
    out = ["  ".join(h.ljust(w) for h, w in zip(head, widths))]
    out += ["  ".join(x.ljust(w) for x, w in zip(line, widths)) for line in lines]
    for r in result.rows:
        if r.error:
            out.append(f"{r.method} [{r.options or '-'}]: {r.error}")
    return "\n".join(out) + "\n"


# Joint scores


@dataclass(frozen=True)
class Scored:
    row: MethodRow
    score: float
    pareto: bool


def _ratio(num: float, den: float) -> float:
    if den == 0:
        return 1.0 if num == 0 else 0.0
    return num / den


def joint_scores(rows, kind: str) -> list[Scored]:
    """s_LB or s_UB with Pareto optimality over (bound, time, coefficient).

    Rows lacking the bound or the time are skipped. A missing coefficient, or a
    nonpositive best coefficient, contributes 0 to the score and ranks last.
    """
    if kind not in ("LB", "UB"):
        raise ConfigurationError("score kind must be LB or UB")
    d = (lambda r: r.d_lb) if kind == "LB" else (lambda r: r.d_ub)
    c = (lambda r: r.c_lb) if kind == "LB" else (lambda r: r.c_ub)
    rows = [r for r in rows if d(r) is not None and r.t_mean_s is not None]
    if not rows:
        return []
    d_best = max(d(r) for r in rows) if kind == "LB" else min(d(r) for r in rows)
    t_best = min(r.t_mean_s for r in rows)
    cs = [c(r) for r in rows if c(r) is not None]
    c_best = max(cs) if cs else None

    def score(r: MethodRow) -> float:
        sd = _ratio(d(r), d_best) if kind == "LB" else _ratio(d_best, d(r))
        st = _ratio(t_best, r.t_mean_s)
        sc = c(r) / c_best if c(r) is not None and c_best is not None and c_best > 0 else 0.0
        return (sd + st + sc) / 3

    def key(r: MethodRow) -> tuple[float, float, float]:
        # Larger is better in every component.
        cv = c(r) if c(r) is not None else -math.inf
        return (d(r) if kind == "LB" else -d(r), -r.t_mean_s, cv)

    keys = [key(r) for r in rows]

    def dominated(t: int) -> bool:
        a = keys[t]
        return any(all(x >= y for x, y in zip(b, a)) and b != a for b in keys)

    return [Scored(r, score(r), not dominated(t)) for t, r in enumerate(rows)]


def _options_of(row: MethodRow) -> dict:
    method = get_method(row.method)
    return resolve_options(method, row.options)


def extensions(row: MethodRow) -> tuple[str, ...]:
    """Paradigm extensions a configuration uses."""
    method = get_method(row.method)
    opts = _options_of(row)
    out = []
    if method.paradigm == LSAPE_PARADIGM:
        if opts["multi_sol"] != 1:
            out.append("MULTI-SOL")
        if opts["centrality"] and opts["gamma"] != 0:
            out.append("CENTRALITIES")
    elif method.paradigm == LS_PARADIGM:
        if opts["starts"] != 1:
            out.append("MULTI-START")
        if opts["loops"] != 0:
            out.append("RANDPOST")
    return tuple(out)


EXTENSION_PARADIGM = {"MULTI-SOL": LSAPE_PARADIGM, "CENTRALITIES": LSAPE_PARADIGM, "MULTI-START": LS_PARADIGM,
                      "RANDPOST": LS_PARADIGM}


def _chi(members: list[Scored], everyone: list[Scored], kind: str) -> tuple[int, int, int]:
    """Whether some member attains the best bound, time and coefficient."""
    if not members:
        return (0, 0, 0)
    d = (lambda r: r.d_lb) if kind == "LB" else (lambda r: r.d_ub)
    c = (lambda r: r.c_lb) if kind == "LB" else (lambda r: r.c_ub)
    pick = max if kind == "LB" else min
    d_best = pick(d(s.row) for s in everyone)
    t_best = min(s.row.t_mean_s for s in everyone)
    cs = [c(s.row) for s in everyone if c(s.row) is not None]
    c_best = max(cs) if cs else None
    return (int(any(d(s.row) == d_best for s in members)),
            int(any(s.row.t_mean_s == t_best for s in members)),
            int(c_best is not None and any(c(s.row) == c_best for s in members)))


@dataclass(frozen=True)
class AggregateScore:
    kind: str
    name: str
    score: float
    chi: tuple[int, int, int]


def aggregate_scores(result: ExperimentResult) -> list[AggregateScore]:
    """Per heuristic: best joint score among its Pareto-optimal configurations.

    Per extension: summed upper-bound scores of Pareto-optimal configurations
    using it, over the same sum for its paradigm.
    """
    rows = [r for r in result.rows if r.error is None]
    out = []
    for kind in ("LB", "UB"):
        scored = joint_scores(rows, kind)
        for name in sorted({s.row.method for s in scored}):
            mine = [s for s in scored if s.row.method == name]
            best = [s.score for s in mine if s.pareto]
            out.append(AggregateScore(kind, name, max(best) if best else 0.0, _chi(mine, scored, kind)))
        if kind != "UB":
            continue
        for ext, paradigm in EXTENSION_PARADIGM.items():
            par = [s for s in scored if get_method(s.row.method).paradigm == paradigm]
            users = [s for s in par if ext in extensions(s.row)]
            den = math.fsum(s.score for s in par if s.pareto)
            num = math.fsum(s.score for s in users if s.pareto)
            out.append(AggregateScore("UB", ext, num / den if den > 0 else 0.0, _chi(users, scored, kind)))
    return out


def scores_table(scores: list[AggregateScore]) -> str:
    lines = ["kind  name            score  chi"]
    for s in scores:
        lines.append(f"{s.kind:<5} {s.name:<15} {s.score:.3f}  {''.join(map(str, s.chi))}")
    return "\n".join(lines) + "\n"
