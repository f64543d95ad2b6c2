"""Named methods with typed options, as used by the CLI and the experiment driver."""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import partial
from typing import Callable

from .branch_tight import branch_tight
from .costs import EditCostModel
from .errors import BoundViolation, BudgetExceeded, ConfigurationError, ValidationError
from .exact import astar_ged, csi_ged, dfs_ged
from .graph import LabeledGraph, induced_edit_cost
from .heuristics import (BoundReport, LowerBoundReport, branch_compact_lower_bound, branch_const_instance,
                         branch_fast_instance, branch_instance, hed_lower_bound, node_instance, run_lsape_method,
                         star_instance)
from .local_search import bp_beam, ipfp, k_refine, randpost
from .ring import RingParams, default_ring_params, ring_instance

Report = BoundReport | LowerBoundReport

# Families used by the joint scores.
LSAPE_PARADIGM = "LSAPE-GED"
LS_PARADIGM = "LS-GED"


@dataclass(frozen=True)
class Method:
    name: str
    run: Callable[..., Report]
    defaults: dict
    paradigm: str | None = None
    exact: bool = False


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in str(text).split(":") if x != "")


def _lsape(builder):
    def run(G, H, costs, opts, seed, time_limit, workers):
        centrality = (opts["centrality"], opts["gamma"]) if opts["centrality"] else None
        return run_lsape_method(builder, G, H, costs, solver=opts["solver"], multi_sol_K=opts["multi_sol"],
                                centrality=centrality, fallback=opts["fallback"], workers=workers)
    return run


def _ring(G, H, costs, opts, seed, time_limit, workers):
    base = default_ring_params([G, H]) if opts["L"] == 0 else RingParams(L=opts["L"])
    lam = _floats(opts["lam"]) or None
    alpha = _floats(opts["alpha"]) or RingParams().alpha
    params = RingParams(L=base.L, alpha=alpha, lam=lam, strategy=opts["strategy"])
    centrality = (opts["centrality"], opts["gamma"]) if opts["centrality"] else None
    return run_lsape_method(ring_instance, G, H, costs, solver=opts["solver"], multi_sol_K=opts["multi_sol"],
                            centrality=centrality, workers=workers, params=params)


def _hed(G, H, costs, opts, seed, time_limit, workers):
    return hed_lower_bound(G, H, costs, workers=workers)


def _compact(G, H, costs, opts, seed, time_limit, workers):
    return branch_compact_lower_bound(G, H, costs, fallback=opts["fallback"])


def _tight(G, H, costs, opts, seed, time_limit, workers):
    return branch_tight(G, H, costs, I=opts["I"], eps=opts["eps"], time_limit=time_limit, workers=workers)


def _astar(G, H, costs, opts, seed, time_limit, workers):
    start = time.perf_counter()
    try:
        value, pi = astar_ged(G, H, costs, max_open=opts["max_open"], mode=opts["mode"], time_limit=time_limit)
    except BudgetExceeded as exc:
        return BoundReport(exc.lower_bound, exc.upper_bound, exc.node_map, time.perf_counter() - start, (),
                           {"exact": False})
    return BoundReport(value, induced_edit_cost(G, H, costs, pi), pi, time.perf_counter() - start, (),
                       {"exact": True})


def _dfs(G, H, costs, opts, seed, time_limit, workers):
    return dfs_ged(G, H, costs, time_limit=time_limit, mode=opts["mode"])


def _csi(G, H, costs, opts, seed, time_limit, workers):
    return csi_ged(G, H, costs, time_limit=time_limit)


_MULTI = {"starts": 40, "rho": 1.0, "loops": 0, "eta": 0.0, "lb": 0.0}


def _local(search, own: tuple[str, ...]):
    def run(G, H, costs, opts, seed, time_limit, workers):
        bound = partial(search, **{k: opts[k] for k in own})
        return randpost(G, H, costs, bound, K=opts["starts"], rho=opts["rho"], L=opts["loops"], eta=opts["eta"],
                        lb=opts["lb"], seed=seed, workers=workers)
    return run


_LSAPE_OPTS = {"solver": "optimal", "multi_sol": 1, "centrality": "", "gamma": 0.5, "fallback": False}

METHODS: dict[str, Method] = {m.name: m for m in [
    Method("NODE", _lsape(node_instance), dict(_LSAPE_OPTS), LSAPE_PARADIGM),
    Method("BRANCH", _lsape(branch_instance), dict(_LSAPE_OPTS), LSAPE_PARADIGM),
    Method("BRANCH-FAST", _lsape(branch_fast_instance), dict(_LSAPE_OPTS), LSAPE_PARADIGM),
    Method("BRANCH-CONST", _lsape(branch_const_instance), dict(_LSAPE_OPTS), LSAPE_PARADIGM),
    Method("STAR", _lsape(star_instance), dict(_LSAPE_OPTS), LSAPE_PARADIGM),
    Method("RING", _ring, {**_LSAPE_OPTS, "L": 0, "alpha": "", "lam": "", "strategy": "OPTIMAL_LSAPE"}, LSAPE_PARADIGM),
    Method("HED", _hed, {}),
    Method("BRANCH-COMPACT", _compact, {"fallback": False}),
    Method("BRANCH-TIGHT", _tight, {"I": 20, "eps": 2.0 ** -10}),
    Method("ASTAR", _astar, {"mode": "LSAPE", "max_open": 1_000_000}, exact=True),
    Method("DFS-GED", _dfs, {"mode": "LSAPE"}, exact=True),
    Method("CSI-GED", _csi, {}, exact=True),
    Method("K-REFINE", _local(k_refine, ("K", "include_dummy")), {**_MULTI, "K": 2, "include_dummy": True},
           LS_PARADIGM),
    Method("BP-BEAM", _local(bp_beam, ("beam",)), {**_MULTI, "beam": 5}, LS_PARADIGM),
    Method("IBP-BEAM", _local(bp_beam, ("beam", "iterations")), {**_MULTI, "beam": 5, "iterations": 20},
           LS_PARADIGM),
    Method("IPFP", _local(ipfp, ("kind", "max_iter", "eps")),
           {**_MULTI, "kind": "QAPE", "max_iter": 100, "eps": 1e-3}, LS_PARADIGM),
]}


def get_method(name: str) -> Method:
    try:
        return METHODS[name.strip().upper()]
    except KeyError:
        raise ConfigurationError(f"unknown method {name!r}; known: {', '.join(sorted(METHODS))}") from None


def _coerce(key: str, raw: str, default):
    try:
        if isinstance(default, bool):
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigurationError(f"option {key}={raw!r} has the wrong type") from None
    return raw.strip()


def parse_options(text: str | dict | None) -> dict[str, str]:
    """'k=v,k=v' into a dict of raw strings."""
    if text is None:
        return {}
    if isinstance(text, dict):
        return {str(k): str(v) for k, v in text.items()}
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigurationError(f"option {part!r} is not of the form key=value")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def resolve_options(method: Method, options: str | dict | None) -> dict:
    raw = parse_options(options)
    unknown = set(raw) - set(method.defaults)
    if unknown:
        raise ConfigurationError(f"{method.name} has no option(s) {sorted(unknown)}")
    opts = dict(method.defaults)
    for k, v in raw.items():
        opts[k] = _coerce(k, v, method.defaults[k])
    return opts


def format_options(options: str | dict | None) -> str:
    """Canonical option string: sorted keys, as given."""
    raw = parse_options(options)
    return ",".join(f"{k}={raw[k]}" for k in sorted(raw))


def run_method(name: str, G: LabeledGraph, H: LabeledGraph, costs: EditCostModel, options: str | dict | None = None,
               seed: int = 0, time_limit: float | None = None, workers: int = 1) -> Report:
    """Run a named method; bad names or options raise ConfigurationError."""
    method = get_method(name)
    opts = resolve_options(method, options)
    try:
        return method.run(G, H, costs, opts, seed, time_limit, workers)
    except BoundViolation:
        raise
    except ValidationError as exc:
        raise ConfigurationError(f"{method.name}: {exc}") from exc
