"""Price-of-fog, distance travelled by data, and p/q sweeps across architectures."""
from __future__ import annotations

import csv
import json
import math
import os
import statistics
import warnings
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Mapping, Optional, Sequence

from .cache import (ARCHITECTURES, CachePlan, CacheWorthySet, NonCacheableMarkedWarning,
                    achieved_hit_ratio, hit_mask, mark_cache_worthy, place_caches, tally_popularity)
from .demand import Request, apply_locality, apply_recommendation, item_sizes
from .geo import great_circle_distance
from .seeding import derive_seed
from .topology import Level, Topology

AXES = ("p", "q")


@dataclass(frozen=True)
class PriceOfFog:
    architecture: Level
    total_size_arch: int
    total_size_core: int
    value: Optional[float]

    @property
    def defined(self) -> bool:
        return self.value is not None


def price_of_fog(plan_arch: CachePlan, plan_core: CachePlan) -> PriceOfFog:
    """Ratio of the total cache size under ``plan_arch`` to the core-level total.

    Undefined (``value=None``) when nothing is cached at the core.
    """
    if plan_core.architecture is not Level.CORE:
        raise ValueError(f"reference plan must be core-level, got {plan_core.architecture.label}")
    core = plan_core.total_size
    value = plan_arch.total_size / core if core > 0 else None
    return PriceOfFog(plan_arch.architecture, plan_arch.total_size, core, value)


@dataclass(frozen=True)
class DistanceReport:
    architecture: Level
    mean_hit_distance_km: Optional[float]
    per_operator: Mapping[str, Optional[float]]
    mean_pair_distance_km: Optional[float] = None
    mean_hops: Optional[float] = None
    hit_count: int = 0

    @property
    def zero_hits(self) -> bool:
        return self.hit_count == 0


def mean_hit_distance(plan: CachePlan, requests: Iterable[Request], topology: Topology) -> DistanceReport:
    """Mean great-circle distance from the caching node to the serving base station over hits.

    Request-weighted; misses are excluded. ``mean_pair_distance_km`` is the
    unweighted mean over marked (item, cell) pairs.
    """
    reqs = list(requests)
    hits = hit_mask(plan, reqs, topology)
    dist_of_cell: dict[str, float] = {}

    def cell_distance(cell: str) -> float:
        d = dist_of_cell.get(cell)
        if d is None:
            bs = topology.cell_node(cell)
            d = dist_of_cell[cell] = great_circle_distance(
                topology.position(topology.ancestor(bs, plan.architecture)), topology.position(bs))
        return d

    total = 0.0
    n = 0
    for r, h in zip(reqs, hits):
        if h:
            total += cell_distance(r.cell_id)
            n += 1
    mean = total / n if n else None
    pair_d = [cell_distance(cell) for _, cell in sorted(plan.marked, key=lambda k: (k[1], k[0]))]
    pair_mean = sum(pair_d) / len(pair_d) if pair_d else None
    return DistanceReport(plan.architecture, mean, {topology.operator: mean}, pair_mean,
                          float(int(plan.architecture)) if n else None, n)


# -- one operator, one demand snapshot ------------------------------------------------

@dataclass
class Evaluation:
    operator: str
    worthy: CacheWorthySet
    plans: dict[Level, CachePlan]
    fog: dict[Level, PriceOfFog]
    distance: dict[Level, DistanceReport]
    hit_ratio: dict[Level, float]


def evaluate(topology: Topology, requests: Sequence[Request], target: float, *,
             weighting: str = "requests", size_mode: str = "mean", exclude_noncacheable: bool = False,
             architectures: Sequence[Level] = ARCHITECTURES) -> Evaluation:
    """Tally, mark and place for every architecture, then compute all metrics."""
    for r in requests:
        if not topology.has_cell(r.cell_id):
            raise KeyError(f"request cell {r.cell_id!r} is not in the {topology.operator!r} topology")
    with warnings.catch_warnings():
        # surfaced through CacheWorthySet.noncacheable_marked instead
        warnings.simplefilter("ignore", NonCacheableMarkedWarning)
        worthy = mark_cache_worthy(tally_popularity(requests), target, weighting, exclude_noncacheable)
    sizes = item_sizes(requests, size_mode)
    archs = sorted({Level.parse(a) for a in architectures} | {Level.CORE})
    plans = {a: place_caches(worthy, topology, a, sizes) for a in archs}
    core = plans[Level.CORE]
    fog = {a: price_of_fog(plans[a], core) for a in archs}
    distance = {a: mean_hit_distance(plans[a], requests, topology) for a in archs}
    hit = {a: achieved_hit_ratio(plans[a], requests, topology, weighting) for a in archs}
    return Evaluation(topology.operator, worthy, plans, fog, distance, hit)


# -- sweeps -----------------------------------------------------------------------

@dataclass
class Scenario:
    """Per-operator topologies plus an item-labelled request stream."""

    topologies: dict[str, Topology]
    requests: list[Request]

    def operator_requests(self) -> dict[str, list[Request]]:
        out: dict[str, list[Request]] = {op: [] for op in self.topologies}
        for r in self.requests:
            if r.operator not in out:
                raise KeyError(f"request operator {r.operator!r} has no topology")
            out[r.operator].append(r)
        return out


@dataclass(frozen=True)
class SweepRow:
    operator: str
    architecture: str
    axis: str
    axis_value: float
    seed_count: int
    total_size_bytes: float
    total_size_items: float
    price_of_fog: float
    mean_distance_km: float
    mean_hops: float
    achieved_hit_ratio: float
    infeasible_flag: bool
    total_size_bytes_std: float = 0.0
    total_size_items_std: float = 0.0
    price_of_fog_std: float = 0.0
    mean_distance_km_std: float = 0.0


ROW_FIELDS = tuple(f.name for f in fields(SweepRow))


@dataclass
class SweepResult:
    axis: str
    grid: list[float]
    rows: list[SweepRow] = field(default_factory=list)

    def row(self, operator: str, architecture, axis_value: float) -> SweepRow:
        label = Level.parse(architecture).label
        for r in self.rows:
            if r.operator == operator and r.architecture == label and r.axis_value == axis_value:
                return r
        raise KeyError((operator, label, axis_value))

    def series(self, operator: str, architecture, metric: str) -> list[float]:
        return [getattr(self.row(operator, architecture, v), metric) for v in self.grid]


@dataclass(frozen=True)
class SweepSettings:
    target: float = 0.5
    weighting: str = "requests"
    size_mode: str = "mean"
    exclude_noncacheable: bool = False
    top_fraction: float = 0.05
    items_per_cell: int = 5
    architectures: tuple = ARCHITECTURES


def _nan(x: Optional[float]) -> float:
    return math.nan if x is None else float(x)


def _point(scenario: Scenario, axis: str, value: float, seed: int, settings: SweepSettings) -> list[dict]:
    rows = []
    for op, reqs in scenario.operator_requests().items():
        sub = derive_seed(seed, "sweep", axis, op)
        if axis == "p":
            perturbed = apply_recommendation(reqs, value, settings.top_fraction, sub)
        else:
            perturbed = apply_locality(reqs, value, settings.items_per_cell, sub)
        ev = evaluate(scenario.topologies[op], perturbed, settings.target, weighting=settings.weighting,
                      size_mode=settings.size_mode, exclude_noncacheable=settings.exclude_noncacheable,
                      architectures=settings.architectures)
        for a in sorted(Level.parse(x) for x in settings.architectures):
            plan = ev.plans[a]
            rows.append({
                "operator": op, "architecture": a.label,
                "total_size_bytes": plan.total_size, "total_size_items": plan.total_items,
                "price_of_fog": _nan(ev.fog[a].value),
                "mean_distance_km": _nan(ev.distance[a].mean_hit_distance_km),
                "mean_hops": _nan(ev.distance[a].mean_hops),
                "achieved_hit_ratio": ev.hit_ratio[a],
                "infeasible": ev.worthy.infeasible,
            })
    return rows


def _point_task(args):
    return _point(*args)


def _mean_std(xs: Sequence[float]) -> tuple[float, float]:
    vals = [x for x in xs if not math.isnan(x)]
    if not vals:
        return math.nan, math.nan
    return statistics.fmean(vals), (statistics.pstdev(vals) if len(vals) > 1 else 0.0)


def run_sweep(scenario: Scenario, axis: str, grid: Sequence[float], seeds: Sequence[int], target: float = 0.5,
              settings: Optional[SweepSettings] = None, jobs: int = 1) -> SweepResult:
    """Perturb demand along ``axis`` for each grid value and seed, then size caches.

    For axis ``p`` the recommendation bias is applied, for ``q`` the
    locality bias. The target hit ratio stays fixed across the grid. Metrics
    are averaged over seeds (NaN values, e.g. an undefined price-of-fog, are
    skipped) and their population standard deviation is kept. A seed's
    perturbation draws do not depend on the grid value, so the switched
    requests at a lower value are a subset of those at a higher one.
    Results are identical for any ``jobs``.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    grid = [float(v) for v in grid]
    if not grid:
        raise ValueError("empty sweep grid")
    if any(not 0.0 <= v <= 1.0 for v in grid):
        raise ValueError(f"grid values must lie in [0, 1]: {grid}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"grid must be strictly increasing: {grid}")
    if not seeds:
        raise ValueError("at least one seed is required")
    settings = settings or SweepSettings()
    if target != settings.target:
        settings = SweepSettings(**{**asdict(settings), "target": target})

    tasks = [(scenario, axis, v, int(s), settings) for v in grid for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_point_task, tasks))
    else:
        outputs = [_point(*t) for t in tasks]

    grouped: dict[tuple, list[dict]] = defaultdict(list)
    order: list[tuple] = []
    for (_, _, v, _, _), rows in zip(tasks, outputs):
        for row in rows:
            key = (v, row["operator"], row["architecture"])
            if key not in grouped:
                order.append(key)
            grouped[key].append(row)

    result = SweepResult(axis, grid)
    for key in order:
        v, op, arch = key
        rs = grouped[key]
        b, b_sd = _mean_std([r["total_size_bytes"] for r in rs])
        it, it_sd = _mean_std([r["total_size_items"] for r in rs])
        pf, pf_sd = _mean_std([r["price_of_fog"] for r in rs])
        dk, dk_sd = _mean_std([r["mean_distance_km"] for r in rs])
        hops, _ = _mean_std([r["mean_hops"] for r in rs])
        hr, _ = _mean_std([r["achieved_hit_ratio"] for r in rs])
        result.rows.append(SweepRow(op, arch, axis, v, len(rs), b, it, pf, dk, hops, hr,
                                    any(r["infeasible"] for r in rs), b_sd, it_sd, pf_sd, dk_sd))
    return result


# -- reports ----------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(result: SweepResult, fmt: str, path) -> str:
    """Write one row per (operator, architecture, axis value) as CSV or JSON."""
    if not result.rows:
        raise ValueError("sweep result has no rows")
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    path = os.fspath(path)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ROW_FIELDS)
            for row in result.rows:
                w.writerow([_fmt(getattr(row, f)) for f in ROW_FIELDS])
    else:
        doc = {
            "axis": result.axis,
            "grid": result.grid,
            "rows": [{f: (None if isinstance(getattr(r, f), float) and math.isnan(getattr(r, f))
                          else getattr(r, f)) for f in ROW_FIELDS} for r in result.rows],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    return path


_INT_FIELDS = {"seed_count"}
_STR_FIELDS = {"operator", "architecture", "axis"}


def _coerce(name: str, raw):
    if name in _STR_FIELDS:
        return str(raw)
    if name in _INT_FIELDS:
        return int(raw)
    if name == "infeasible_flag":
        return raw if isinstance(raw, bool) else str(raw).lower() == "true"
    return math.nan if raw is None else float(raw)


def read_report(path) -> SweepResult:
    """Parse a report written by :func:`emit_report` (format picked from the extension)."""
    path = os.fspath(path)
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        rows = [SweepRow(**{f: _coerce(f, r[f]) for f in ROW_FIELDS}) for r in doc["rows"]]
        return SweepResult(doc["axis"], [float(v) for v in doc["grid"]], rows)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [SweepRow(**{f: _coerce(f, r[f]) for f in ROW_FIELDS}) for r in csv.DictReader(fh)]
    if not rows:
        raise ValueError(f"{path}: no rows")
    grid = sorted({r.axis_value for r in rows})
    return SweepResult(rows[0].axis, grid, rows)
