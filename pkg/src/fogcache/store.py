"""Scenario directory layout (schema_version 1)::

    <dir>/manifest.json            schema_version, mode, seed, per-operator counts
    <dir>/cells.json               cell estimates (hull, barycenter, area, observations)
    <dir>/topologies/<op>.json     one tree per operator
    <dir>/requests.csv             item-labelled request stream
    <dir>/trace.csv                synthetic WeFi-shaped records (synth mode only)
"""
from __future__ import annotations

import json
import os
from typing import Iterable, Mapping, Optional

from .demand import Request, read_requests_csv, write_requests_csv
from .metrics import Scenario
from .topology import CellEstimate, Topology

SCHEMA_VERSION = 1


def dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def cells_to_json(cells: Iterable[CellEstimate]) -> list[dict]:
    return [{"cell_id": c.cell_id, "operator": c.operator, "hull": [list(v) for v in c.hull],
             "barycenter": list(c.barycenter), "area_km2": c.area_km2,
             "observation_count": c.observation_count} for c in cells]


def cells_from_json(data: Iterable[Mapping]) -> list[CellEstimate]:
    return [CellEstimate(d["cell_id"], d["operator"], tuple(tuple(v) for v in d["hull"]),
                         tuple(d["barycenter"]), float(d["area_km2"]), int(d["observation_count"]))
            for d in data]


def save_scenario(directory, cells: list[CellEstimate], topologies: Mapping[str, Topology],
                  requests: list[Request], manifest_extra: Optional[Mapping] = None) -> dict:
    os.makedirs(os.path.join(directory, "topologies"), exist_ok=True)
    dump_json(cells_to_json(cells), os.path.join(directory, "cells.json"))
    for op, topo in topologies.items():
        topo.save(os.path.join(directory, "topologies", f"{op}.json"))
    write_requests_csv(requests, os.path.join(directory, "requests.csv"))
    per_op = {}
    for op, topo in topologies.items():
        counts = topo.level_counts
        per_op[op] = {
            "level_counts": {lvl.label: counts[lvl] for lvl in sorted(counts)},
            "requests": sum(1 for r in requests if r.operator == op),
        }
    manifest = {"schema_version": SCHEMA_VERSION, "operators": per_op, "requests": len(requests)}
    manifest.update(manifest_extra or {})
    dump_json(manifest, os.path.join(directory, "manifest.json"))
    return manifest


def load_scenario(directory) -> Scenario:
    manifest_path = os.path.join(directory, "manifest.json")
    if not os.path.exists(manifest_path):
        raise FileNotFoundError(f"no scenario manifest at {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported scenario schema_version {manifest.get('schema_version')!r}")
    topologies = {op: Topology.load(os.path.join(directory, "topologies", f"{op}.json"))
                  for op in manifest["operators"]}
    return Scenario(topologies, read_requests_csv(os.path.join(directory, "requests.csv")))
