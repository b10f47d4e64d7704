"""Command-line driver: ``fogcache {synth,ingest,evaluate,sweep}``.

Exit codes: 0 success, 1 invalid configuration or input, 2 I/O error,
3 infeasible target or non-cacheable pairs marked (``evaluate --strict``).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from typing import Optional, Sequence

from .cache import write_plan_summary
from .config import ENV_JOBS, ENV_OUTPUT_DIR, ConfigError, RunConfig, load_config
from .demand import (DemandConfig, assign_content_ids, requests_from_records, synthesize_trace)
from .metrics import SweepSettings, emit_report, evaluate, run_sweep
from .records import ParseStats, TraceFormatError, filter_vehicular, load_rules, parse_trace, write_trace
from .seeding import derive_seed
from .store import SCHEMA_VERSION, dump_json, load_scenario, save_scenario
from .topology import build_topologies, build_tree, estimate_cells

log = logging.getLogger("fogcache")

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_INFEASIBLE = 0, 1, 2, 3


def _scenario_dir(cfg: RunConfig, args) -> str:
    return args.scenario or os.path.join(cfg.output_dir, "scenario")


def _print_summary(manifest: dict) -> None:
    for op, info in manifest["operators"].items():
        c = info["level_counts"]
        print(f"{op}: cells={c['BaseStation']} levels={c['BaseStation']}/{c['Ring']}/{c['Pod']}/{c['Core']} "
              f"requests={info['requests']}")
    print(f"total requests: {manifest['requests']}")


def cmd_synth(cfg: RunConfig, args) -> int:
    if cfg.synth is None:
        raise ConfigError("mode", "synth command needs mode: synth")
    s = cfg.synth
    cells, requests, records = [], [], []
    topologies = {}
    for spec in s.operators:
        op_seed = derive_seed(cfg.seed, "synth", spec.name)
        op_cells, op_records = synthesize_trace(spec.style, spec.n_cells, s.n_users, s.hours, s.category_shares,
                                                operator=spec.name, seed=op_seed, bbox=s.bbox,
                                                requests_per_hour=s.requests_per_hour)
        demand = dataclasses.replace(cfg.demand, seed=derive_seed(cfg.seed, "assign", spec.name))
        requests += assign_content_ids(requests_from_records(op_records), demand)
        topologies[spec.name] = build_tree(op_cells, cfg.fanout, derive_seed(cfg.seed, "tree", spec.name),
                                           cfg.grouping)
        cells += op_cells
        records += op_records
    out = _scenario_dir(cfg, args)
    manifest = save_scenario(out, cells, topologies, requests, {"mode": "synth", "seed": cfg.seed,
                                                                "fanout": cfg.fanout})
    write_trace(records, os.path.join(out, "trace.csv"))
    _print_summary(manifest)
    print(f"scenario written to {out}")
    return EXIT_OK


def cmd_ingest(cfg: RunConfig, args) -> int:
    if cfg.ingest is None:
        raise ConfigError("mode", "ingest command needs mode: ingest")
    ing = cfg.ingest
    trace_path = args.trace or ing.trace_path
    rules = load_rules(ing.rules_path) if ing.rules_path else None
    stats = ParseStats()
    records = list(parse_trace(trace_path, ing.schema, stats))
    cells = estimate_cells(records)
    if not cells:
        raise ConfigError("ingest.trace_path", f"{trace_path} has no records with a cell id")
    topologies = build_topologies(cells, cfg.fanout, derive_seed(cfg.seed, "tree"), cfg.grouping)
    vehicular = filter_vehicular(records, ing.thresholds)
    demand = dataclasses.replace(cfg.demand, seed=derive_seed(cfg.seed, "assign"))
    requests = assign_content_ids(requests_from_records(vehicular, rules), demand)
    out = _scenario_dir(cfg, args)
    manifest = save_scenario(out, cells, topologies, requests, {
        "mode": "ingest", "seed": cfg.seed, "fanout": cfg.fanout,
        "parse": {"rows": stats.rows, "parsed": stats.parsed, "malformed": stats.malformed},
        "vehicular_records": len(vehicular),
    })
    print(f"parsed {stats.parsed} of {stats.rows} rows ({stats.malformed} malformed), "
          f"{len(vehicular)} vehicular")
    _print_summary(manifest)
    print(f"scenario written to {out}")
    return EXIT_OK


def _none_if_nan(x):
    return None if x is None or x != x else x


def cmd_evaluate(cfg: RunConfig, args) -> int:
    scenario = load_scenario(_scenario_dir(cfg, args))
    out = os.path.join(cfg.output_dir, "evaluate")
    os.makedirs(os.path.join(out, "plans"), exist_ok=True)
    report = {"schema_version": SCHEMA_VERSION, "target_hit_ratio": cfg.target_hit_ratio,
              "weighting": cfg.weighting, "size_mode": cfg.size_mode, "operators": {}}
    all_plans = []
    flagged = False
    for op, reqs in scenario.operator_requests().items():
        ev = evaluate(scenario.topologies[op], reqs, cfg.target_hit_ratio, weighting=cfg.weighting,
                      size_mode=cfg.size_mode, exclude_noncacheable=cfg.exclude_noncacheable,
                      architectures=cfg.architectures)
        flagged |= ev.worthy.infeasible or ev.worthy.noncacheable_marked
        os.makedirs(os.path.join(out, "plans", op), exist_ok=True)
        archs = {}
        for a in cfg.architectures:
            plan = ev.plans[a]
            plan.save(os.path.join(out, "plans", op, f"{a.label}.json"))
            all_plans.append(plan)
            d = ev.distance[a]
            archs[a.label] = {
                "total_size": plan.total_size, "total_items": plan.total_items, "node_count": plan.node_count,
                "price_of_fog": ev.fog[a].value, "core_total_size": ev.fog[a].total_size_core,
                "mean_distance_km": d.mean_hit_distance_km, "mean_pair_distance_km": d.mean_pair_distance_km,
                "mean_hops": d.mean_hops, "hit_count": d.hit_count, "achieved_hit_ratio": ev.hit_ratio[a],
            }
        report["operators"][op] = {
            "requests": len(reqs), "marked_pairs": len(ev.worthy.pairs),
            "achieved_hit_ratio": ev.worthy.achieved_hit_ratio, "infeasible": ev.worthy.infeasible,
            "noncacheable_marked": ev.worthy.noncacheable_marked, "architectures": archs,
        }
        for a in cfg.architectures:
            r = archs[a.label]
            pof = "undefined" if r["price_of_fog"] is None else f"{r['price_of_fog']:.4f}"
            dist = "undefined" if r["mean_distance_km"] is None else f"{r['mean_distance_km']:.3f}"
            print(f"{op} {a.label:<11} total={r['total_size']} items={r['total_items']} "
                  f"price_of_fog={pof} mean_km={dist} hit_ratio={r['achieved_hit_ratio']:.4f}")
    write_plan_summary(all_plans, os.path.join(out, "summary.csv"))
    dump_json(report, os.path.join(out, "metrics.json"))
    if flagged:
        log.warning("target infeasible or non-cacheable pairs marked for at least one operator")
        if args.strict:
            return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    scenario = load_scenario(_scenario_dir(cfg, args))
    sw = cfg.sweep
    settings = SweepSettings(cfg.target_hit_ratio, cfg.weighting, cfg.size_mode, cfg.exclude_noncacheable,
                             cfg.demand.rec_top_fraction, cfg.demand.local_items_per_cell, cfg.architectures)
    result = run_sweep(scenario, sw.axis, sw.grid, sw.seed_list(cfg.seed), cfg.target_hit_ratio,
                       settings, jobs=cfg.jobs)
    out = os.path.join(cfg.output_dir, "sweep")
    os.makedirs(out, exist_ok=True)
    for fmt in sw.formats:
        path = emit_report(result, fmt, os.path.join(out, f"sweep_{sw.axis}.{fmt}"))
        print(f"wrote {path}")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "ingest": cmd_ingest, "evaluate": cmd_evaluate, "sweep": cmd_sweep}


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fogcache", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("-c", "--config", required=name in ("synth", "ingest"),
                       help="YAML run configuration")
        p.add_argument("-o", "--out", help=f"output directory (env {ENV_OUTPUT_DIR})")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--scenario", help="scenario directory (default <out>/scenario)")
        p.add_argument("--target", type=float, help="target hit ratio")
        p.add_argument("--jobs", type=int, help=f"worker processes (env {ENV_JOBS})")
        if name == "ingest":
            p.add_argument("--trace", help="trace CSV, overrides ingest.trace_path")
        if name == "evaluate":
            p.add_argument("--strict", action="store_true", help="exit 3 on infeasible targets")
        if name == "sweep":
            p.add_argument("--axis", choices=("p", "q"))
            p.add_argument("--grid", type=_floats, help="comma-separated axis values")
            p.add_argument("--seeds", type=_ints, help="comma-separated sweep seeds")
            p.add_argument("--n-seeds", type=int, help="derive this many seeds from the master seed")
    return parser


def _resolve(args) -> RunConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = RunConfig(mode="synth", output_dir=os.environ.get(ENV_OUTPUT_DIR, "out"),
                        jobs=int(os.environ.get(ENV_JOBS, "1")), demand=DemandConfig())
    overrides = {}
    if args.out:
        overrides["output_dir"] = args.out
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.target is not None:
        if not 0 <= args.target <= 1:
            raise ConfigError("--target", f"must be in [0, 1], got {args.target}")
        overrides["target_hit_ratio"] = args.target
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigError("--jobs", f"must be >= 1, got {args.jobs}")
        overrides["jobs"] = args.jobs
    if args.command == "sweep":
        sw = {}
        if args.axis:
            sw["axis"] = args.axis
        if args.grid is not None:
            grid = tuple(args.grid)
            if not grid or any(not 0 <= v <= 1 for v in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError("--grid", f"must be strictly increasing values in [0, 1], got {list(grid)}")
            sw["grid"] = grid
        if args.seeds is not None:
            sw["seeds"] = tuple(args.seeds)
        if args.n_seeds is not None:
            if args.n_seeds < 1:
                raise ConfigError("--n-seeds", f"must be >= 1, got {args.n_seeds}")
            sw["n_seeds"], sw["seeds"] = args.n_seeds, ()
        if sw:
            overrides["sweep"] = dataclasses.replace(cfg.sweep, **sw)
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (TraceFormatError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
