"""Cell position estimates and per-operator four-level core network trees.

Base stations sit at the centroid of the convex hull of the positions users
reported while attached to them. Base stations are then grouped into rings,
rings into aggregation pods, and pods under core switches, ``fanout`` children
per parent.
"""
from __future__ import annotations

import enum
import json
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .geo import (LatLon, convex_hull, hilbert_keys, mean_point, polygon_area_km2,
                  polygon_centroid)
from .records import TraceRecord

SCHEMA_VERSION = 1


class Level(enum.IntEnum):
    """Network levels, ordered from the edge (0) to the core (3)."""

    BASE_STATION = 0
    RING = 1
    POD = 2
    CORE = 3

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, value) -> "Level":
        if isinstance(value, Level):
            return value
        if isinstance(value, int):
            return cls(value)
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        for lvl, lab in _LABELS.items():
            if key in (lab.lower(), lvl.name.lower().replace("_", "")):
                return lvl
        raise ValueError(f"unknown level {value!r}")


_LABELS = {Level.BASE_STATION: "BaseStation", Level.RING: "Ring", Level.POD: "Pod", Level.CORE: "Core"}
_PREFIX = {Level.BASE_STATION: "bs", Level.RING: "ring", Level.POD: "pod", Level.CORE: "core"}


@dataclass(frozen=True)
class CellEstimate:
    cell_id: str
    operator: str
    hull: tuple[LatLon, ...]
    barycenter: LatLon
    area_km2: float
    observation_count: int


def estimate_cell(cell_id: str, operator: str, positions: Sequence[LatLon]) -> CellEstimate:
    if not positions:
        raise ValueError(f"cell {cell_id} has no observations")
    hull = convex_hull(positions)
    if len(hull) >= 3:
        center = polygon_centroid(hull)
        area = polygon_area_km2(hull)
    else:
        # degenerate hull: point or segment (collinear inputs collapse to endpoints)
        center = mean_point(positions)
        area = 0.0
    return CellEstimate(cell_id, operator, tuple(hull), center, area, len(positions))


def estimate_cells(records: Iterable[TraceRecord]) -> list[CellEstimate]:
    """One estimate per (operator, cell_id) seen in ``records``, sorted by that key.

    Records without a cell id are ignored.
    """
    seen: dict[tuple[str, str], list[LatLon]] = defaultdict(list)
    for r in records:
        if r.cell_id:
            seen[(r.operator, r.cell_id)].append(r.position)
    return [estimate_cell(cell, op, pts) for (op, cell), pts in sorted(seen.items())]


@dataclass(frozen=True)
class TopologyNode:
    node_id: str
    level: Level
    position: LatLon
    parent: Optional[str]
    children: tuple[str, ...] = ()
    cell_id: Optional[str] = None


@dataclass
class Topology:
    operator: str
    nodes: dict[str, TopologyNode]
    fanout: int = 10
    _cell_index: dict[str, str] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._cell_index = {n.cell_id: n.node_id for n in self.nodes.values()
                            if n.level is Level.BASE_STATION and n.cell_id is not None}
        # ancestor table: bs -> (bs, ring, pod, core)
        self._chain: dict[str, tuple[str, ...]] = {}
        for bs in self._cell_index.values():
            chain = [bs]
            cur = self.nodes[bs]
            while cur.parent is not None:
                cur = self.nodes[cur.parent]
                chain.append(cur.node_id)
            self._chain[bs] = tuple(chain)

    @property
    def level_counts(self) -> dict[Level, int]:
        counts = {lvl: 0 for lvl in Level}
        for n in self.nodes.values():
            counts[n.level] += 1
        return counts

    def level_nodes(self, level: Level) -> list[TopologyNode]:
        return [n for n in self.nodes.values() if n.level is level]

    @property
    def cells(self) -> list[str]:
        return list(self._cell_index)

    def has_cell(self, cell_id: str) -> bool:
        return cell_id in self._cell_index

    def cell_node(self, cell_id: str) -> str:
        try:
            return self._cell_index[cell_id]
        except KeyError:
            raise KeyError(f"cell {cell_id!r} is not in the {self.operator!r} topology") from None

    def ancestor(self, bs: str, level: Level) -> str:
        try:
            chain = self._chain[bs]
        except KeyError:
            raise KeyError(f"{bs!r} is not a base station of {self.operator!r}") from None
        return chain[int(level)]

    def position(self, node_id: str) -> LatLon:
        return self.nodes[node_id].position

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        nodes = []
        for n in self.nodes.values():
            entry = {
                "id": n.node_id,
                "level": n.level.label,
                "parent": n.parent,
                "position": [n.position[0], n.position[1]],
                "children": list(n.children),
            }
            if n.cell_id is not None:
                entry["cell_id"] = n.cell_id
            nodes.append(entry)
        return {"schema_version": SCHEMA_VERSION, "operator": self.operator,
                "fanout": self.fanout, "nodes": nodes}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Topology":
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported topology schema_version {version!r}")
        nodes = {}
        for e in data["nodes"]:
            n = TopologyNode(e["id"], Level.parse(e["level"]), (float(e["position"][0]), float(e["position"][1])),
                             e.get("parent"), tuple(e.get("children", ())), e.get("cell_id"))
            nodes[n.node_id] = n
        return cls(data["operator"], nodes, int(data.get("fanout", 10)))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Topology":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def from_nested(cls, operator: str, cores: Sequence, positions: Optional[Mapping[str, LatLon]] = None,
                    fanout: int = 10) -> "Topology":
        """Build a topology from explicit nesting ``cores -> pods -> rings -> cell ids``.

        Handy for hand-made instances. Cell positions default to (0, 0); upper
        levels sit at the mean of their children.
        """
        positions = positions or {}
        nodes: dict[str, TopologyNode] = {}
        counters = defaultdict(int)

        def add(level: Level, spec) -> tuple[str, LatLon]:
            if level is Level.BASE_STATION:
                cell = str(spec)
                nid = f"{_PREFIX[level]}:{cell}"
                pos = tuple(positions.get(cell, (0.0, 0.0)))
                nodes[nid] = TopologyNode(nid, level, pos, None, (), cell)
                return nid, pos
            kids = [add(Level(level - 1), s) for s in spec]
            nid = f"{_PREFIX[level]}:{counters[level]}"
            counters[level] += 1
            pos = mean_point([p for _, p in kids])
            for kid, _ in kids:
                nodes[kid] = _with_parent(nodes[kid], nid)
            nodes[nid] = TopologyNode(nid, level, pos, None, tuple(k for k, _ in kids))
            return nid, pos

        for core in cores:
            add(Level.CORE, core)
        return cls(operator, nodes, fanout)


def _with_parent(node: TopologyNode, parent: str) -> TopologyNode:
    return TopologyNode(node.node_id, node.level, node.position, parent, node.children, node.cell_id)


def expected_level_counts(n_cells: int, fanout: int) -> dict[Level, int]:
    """Ceil-division level sizes for ``n_cells`` base stations."""
    counts = {Level.BASE_STATION: n_cells}
    n = n_cells
    for lvl in (Level.RING, Level.POD, Level.CORE):
        n = math.ceil(n / fanout)
        counts[lvl] = n
    return counts


def build_tree(cells: Sequence[CellEstimate], fanout: int = 10, seed: int = 0,
               grouping: str = "curve") -> Topology:
    """Group one operator's base stations into rings, pods and core switches.

    With ``grouping="curve"`` the nodes of each level are ordered along a
    Hilbert curve over their positions (ties by node id) and cut into
    consecutive chunks of ``fanout``; ``seed`` is unused. With
    ``grouping="random"`` each level is shuffled with ``random.Random(seed)``
    before chunking.
    """
    if not cells:
        raise ValueError("cannot build a topology from an empty cell list")
    if fanout < 1:
        raise ValueError(f"fanout must be >= 1, got {fanout}")
    if grouping not in ("curve", "random"):
        raise ValueError(f"unknown grouping {grouping!r}")
    operators = {c.operator for c in cells}
    if len(operators) != 1:
        raise ValueError(f"cells span several operators: {sorted(operators)}")
    ids = [c.cell_id for c in cells]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate cell ids")

    rng = random.Random(seed)
    nodes: dict[str, TopologyNode] = {}
    layer: list[TopologyNode] = []
    for c in sorted(cells, key=lambda c: c.cell_id):
        nid = f"bs:{c.cell_id}"
        layer.append(TopologyNode(nid, Level.BASE_STATION, c.barycenter, None, (), c.cell_id))

    for level in (Level.RING, Level.POD, Level.CORE):
        if grouping == "curve":
            keys = hilbert_keys([n.position for n in layer])
            order = sorted(range(len(layer)), key=lambda i: (keys[i], layer[i].node_id))
            layer = [layer[i] for i in order]
        else:
            rng.shuffle(layer)
        parents = []
        for k in range(0, len(layer), fanout):
            chunk = layer[k:k + fanout]
            pid = f"{_PREFIX[level]}:{len(parents)}"
            pos = mean_point([n.position for n in chunk])
            for n in chunk:
                nodes[n.node_id] = _with_parent(n, pid)
            parents.append(TopologyNode(pid, level, pos, None, tuple(n.node_id for n in chunk)))
        layer = parents
    for n in layer:
        nodes[n.node_id] = n
    return Topology(next(iter(operators)), nodes, fanout)


def build_topologies(cells: Iterable[CellEstimate], fanout: int = 10, seed: int = 0,
                     grouping: str = "curve") -> dict[str, Topology]:
    """One independent tree per operator."""
    by_op: dict[str, list[CellEstimate]] = defaultdict(list)
    for c in cells:
        by_op[c.operator].append(c)
    return {op: build_tree(cs, fanout, seed, grouping) for op, cs in sorted(by_op.items())}


def ancestor_at_level(topology: Topology, bs: str, level: Level) -> str:
    node = topology.nodes.get(bs)
    if node is None:
        raise KeyError(f"unknown node {bs!r}")
    if node.level is not Level.BASE_STATION:
        raise ValueError(f"{bs!r} is a {node.level.label} node, not a base station")
    return topology.ancestor(bs, Level.parse(level))
