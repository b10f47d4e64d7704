"""Run configuration: a YAML document, validated into :class:`RunConfig`.

Every invalid value raises :class:`ConfigError` naming the offending key,
e.g. ``synth.operators[0].n_cells``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import yaml

from .demand import DEFAULT_SHARES, LA_BBOX, DemandConfig, DeploymentStyle, _validate_shares
from .records import DEFAULT_THRESHOLDS
from .seeding import derive_seed
from .topology import Level

ENV_OUTPUT_DIR = "FOGCACHE_OUTPUT_DIR"
ENV_JOBS = "FOGCACHE_JOBS"


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class OperatorSpec:
    name: str
    style: DeploymentStyle
    n_cells: int


@dataclass(frozen=True)
class SynthConfig:
    operators: tuple[OperatorSpec, ...]
    n_users: int = 200
    hours: int = 24
    requests_per_hour: float = 4.0
    category_shares: Mapping = field(default_factory=lambda: dict(DEFAULT_SHARES))
    bbox: tuple[float, float, float, float] = LA_BBOX


@dataclass(frozen=True)
class IngestConfig:
    trace_path: str
    schema: Mapping[str, str] = field(default_factory=dict)
    rules_path: Optional[str] = None
    thresholds: tuple[float, float] = DEFAULT_THRESHOLDS


@dataclass(frozen=True)
class SweepConfig:
    axis: str = "p"
    grid: tuple[float, ...] = (0.0, 0.1, 0.25, 0.5)
    seeds: tuple[int, ...] = ()
    n_seeds: int = 1
    formats: tuple[str, ...] = ("csv", "json")

    def seed_list(self, master: int) -> list[int]:
        if self.seeds:
            return list(self.seeds)
        return [derive_seed(master, "sweep-seed", k) for k in range(self.n_seeds)]


@dataclass(frozen=True)
class RunConfig:
    mode: str
    seed: int = 0
    output_dir: str = "out"
    fanout: int = 10
    grouping: str = "curve"
    target_hit_ratio: float = 0.5
    weighting: str = "requests"
    size_mode: str = "mean"
    exclude_noncacheable: bool = False
    architectures: tuple[Level, ...] = tuple(Level)
    demand: DemandConfig = DemandConfig()
    synth: Optional[SynthConfig] = None
    ingest: Optional[IngestConfig] = None
    sweep: SweepConfig = SweepConfig()
    jobs: int = 1


_TOP_KEYS = {"mode", "seed", "output_dir", "fanout", "grouping", "target_hit_ratio", "weighting",
             "size_mode", "exclude_noncacheable", "architectures", "demand", "synth", "ingest",
             "sweep", "jobs"}


def _int(d: Mapping, key: str, path: str, default=None, minimum: Optional[int] = None) -> int:
    raw = d.get(key, default)
    if raw is None:
        raise ConfigError(f"{path}{key}", "is required")
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(f"{path}{key}", f"must be an integer, got {raw!r}")
    if minimum is not None and raw < minimum:
        raise ConfigError(f"{path}{key}", f"must be >= {minimum}, got {raw}")
    return raw


def _float(d: Mapping, key: str, path: str, default=None, lo=None, hi=None) -> float:
    raw = d.get(key, default)
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{path}{key}", f"must be a number, got {raw!r}")
    v = float(raw)
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        raise ConfigError(f"{path}{key}", f"must be in [{lo}, {hi}], got {v}")
    return v


def _choice(d: Mapping, key: str, path: str, default: str, options) -> str:
    raw = d.get(key, default)
    if raw not in options:
        raise ConfigError(f"{path}{key}", f"must be one of {sorted(options)}, got {raw!r}")
    return raw


def _mapping(raw, key: str) -> Mapping:
    if raw is None:
        return {}
    if not isinstance(raw, Mapping):
        raise ConfigError(key, "must be a mapping")
    return raw


def _demand(raw: Mapping) -> DemandConfig:
    base = DemandConfig()
    unknown = set(raw) - set(DemandConfig.__dataclass_fields__) - {"seed"}
    if unknown:
        raise ConfigError(f"demand.{sorted(unknown)[0]}", "unknown key")
    kw: dict[str, Any] = {}
    for name in ("video_catalog_size", "popular_pool_size", "local_pool_size", "local_items_per_cell"):
        kw[name] = _int(raw, name, "demand.", getattr(base, name), minimum=1)
    for name in ("popular_hit_prob", "local_hit_prob", "rec_top_fraction", "rec_prob", "loc_prob"):
        kw[name] = _float(raw, name, "demand.", getattr(base, name), 0.0, 1.0)
    kw["zipf_exponent"] = _float(raw, "zipf_exponent", "demand.", base.zipf_exponent, 1e-12)
    if raw.get("catalog_path") is not None:
        kw["catalog_path"] = str(raw["catalog_path"])
    return DemandConfig(**kw)


def _synth(raw: Mapping) -> SynthConfig:
    ops_raw = raw.get("operators")
    if not isinstance(ops_raw, list) or not ops_raw:
        raise ConfigError("synth.operators", "must be a non-empty list")
    ops = []
    for i, o in enumerate(ops_raw):
        path = f"synth.operators[{i}]."
        o = _mapping(o, path[:-1])
        name = o.get("name")
        if not isinstance(name, str) or not name or "/" in name:
            raise ConfigError(path + "name", f"must be a non-empty string without '/', got {name!r}")
        style = _choice(o, "style", path, "sparse", {s.value for s in DeploymentStyle})
        ops.append(OperatorSpec(name, DeploymentStyle(style), _int(o, "n_cells", path, minimum=1)))
    if len({o.name for o in ops}) != len(ops):
        raise ConfigError("synth.operators", "operator names must be unique")
    shares_raw = raw.get("category_shares", {c.value: v for c, v in DEFAULT_SHARES.items()})
    try:
        shares = _validate_shares(_mapping(shares_raw, "synth.category_shares"))
    except ValueError as exc:
        raise ConfigError("synth.category_shares", str(exc)) from None
    bbox = raw.get("bbox", list(LA_BBOX))
    if (not isinstance(bbox, (list, tuple)) or len(bbox) != 4
            or not all(isinstance(v, (int, float)) for v in bbox)
            or not (-90 <= bbox[0] < bbox[2] <= 90 and -180 <= bbox[1] < bbox[3] <= 180)):
        raise ConfigError("synth.bbox", f"must be [lat_min, lon_min, lat_max, lon_max], got {bbox!r}")
    return SynthConfig(
        tuple(ops),
        n_users=_int(raw, "n_users", "synth.", 200, minimum=1),
        hours=_int(raw, "hours", "synth.", 24, minimum=1),
        requests_per_hour=_float(raw, "requests_per_hour", "synth.", 4.0, 1e-9),
        category_shares=shares,
        bbox=tuple(float(v) for v in bbox),
    )


def _ingest(raw: Mapping) -> IngestConfig:
    path = raw.get("trace_path")
    if not isinstance(path, str) or not path:
        raise ConfigError("ingest.trace_path", "is required in ingest mode")
    th = raw.get("thresholds", list(DEFAULT_THRESHOLDS))
    if (not isinstance(th, (list, tuple)) or len(th) != 2
            or not all(isinstance(v, (int, float)) for v in th) or not 0 <= th[0] < th[1]):
        raise ConfigError("ingest.thresholds", f"must be [static_km, vehicular_km] with 0 <= static < vehicular, got {th!r}")
    schema = _mapping(raw.get("schema"), "ingest.schema")
    return IngestConfig(path, {str(k): str(v) for k, v in schema.items()},
                        raw.get("rules_path"), (float(th[0]), float(th[1])))


def _sweep(raw: Mapping) -> SweepConfig:
    axis = _choice(raw, "axis", "sweep.", "p", {"p", "q"})
    grid = raw.get("grid", [0.0, 0.1, 0.25, 0.5])
    if (not isinstance(grid, (list, tuple)) or not grid
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in grid)):
        raise ConfigError("sweep.grid", f"must be a non-empty list of numbers, got {grid!r}")
    grid = tuple(float(v) for v in grid)
    if any(not 0 <= v <= 1 for v in grid):
        raise ConfigError("sweep.grid", f"values must lie in [0, 1], got {list(grid)}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("sweep.grid", "must be strictly increasing")
    seeds = raw.get("seeds", [])
    if not isinstance(seeds, (list, tuple)) or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
        raise ConfigError("sweep.seeds", f"must be a list of integers, got {seeds!r}")
    formats = raw.get("formats", ["csv", "json"])
    if not isinstance(formats, (list, tuple)) or not formats or any(f not in ("csv", "json") for f in formats):
        raise ConfigError("sweep.formats", f"must be a non-empty subset of [csv, json], got {formats!r}")
    return SweepConfig(axis, grid, tuple(seeds), _int(raw, "n_seeds", "sweep.", 1, minimum=1), tuple(formats))


def parse_config(raw: Mapping, env: Optional[Mapping[str, str]] = None) -> RunConfig:
    env = os.environ if env is None else env
    raw = _mapping(raw, "<root>")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    mode = _choice(raw, "mode", "", None, {"synth", "ingest"})
    archs_raw = raw.get("architectures", [lvl.label for lvl in Level])
    if not isinstance(archs_raw, (list, tuple)) or not archs_raw:
        raise ConfigError("architectures", "must be a non-empty list")
    try:
        archs = tuple(sorted({Level.parse(a) for a in archs_raw}))
    except ValueError as exc:
        raise ConfigError("architectures", str(exc)) from None

    output_dir = raw.get("output_dir", "out")
    if ENV_OUTPUT_DIR in env:
        output_dir = env[ENV_OUTPUT_DIR]
    jobs = _int(raw, "jobs", "", 1, minimum=1)
    if ENV_JOBS in env:
        try:
            jobs = int(env[ENV_JOBS])
        except ValueError:
            raise ConfigError(ENV_JOBS, f"must be an integer, got {env[ENV_JOBS]!r}") from None
        if jobs < 1:
            raise ConfigError(ENV_JOBS, f"must be >= 1, got {jobs}")

    return RunConfig(
        mode=mode,
        seed=_int(raw, "seed", "", 0),
        output_dir=str(output_dir),
        fanout=_int(raw, "fanout", "", 10, minimum=1),
        grouping=_choice(raw, "grouping", "", "curve", {"curve", "random"}),
        target_hit_ratio=_float(raw, "target_hit_ratio", "", 0.5, 0.0, 1.0),
        weighting=_choice(raw, "weighting", "", "requests", {"requests", "bytes"}),
        size_mode=_choice(raw, "size_mode", "", "mean", {"mean", "first", "unit"}),
        exclude_noncacheable=bool(raw.get("exclude_noncacheable", False)),
        architectures=archs,
        demand=_demand(_mapping(raw.get("demand"), "demand")),
        synth=_synth(_mapping(raw.get("synth"), "synth")) if mode == "synth" else None,
        ingest=_ingest(_mapping(raw.get("ingest"), "ingest")) if mode == "ingest" else None,
        sweep=_sweep(_mapping(raw.get("sweep"), "sweep")),
        jobs=jobs,
    )


def load_config(path, env: Optional[Mapping[str, str]] = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError("<file>", f"not valid YAML: {exc}") from None
    return parse_config(raw or {}, env)
