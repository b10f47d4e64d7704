"""Cache sizing for a target hit ratio under the four caching architectures.

The procedure is an offline sizing exercise: tally how often each item is
requested in each cell, mark the most popular (item, cell) pairs until they
cover the target share of demand, then store one copy of every marked item
at the node responsible for the pair's cell and add up the sizes.
"""
from __future__ import annotations

import csv
import json
import statistics
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .demand import Request
from .records import NON_CACHEABLE
from .topology import Level, Topology

Architecture = Level
ARCHITECTURES = tuple(Level)

Pair = tuple[str, str]  # (item, cell)


class NonCacheableMarkedWarning(UserWarning):
    """The target could only be met by marking pairs of non-cacheable categories."""


@dataclass(frozen=True)
class PairPopularity:
    item: str
    cell: str
    request_count: int
    byte_count: int
    cacheable: bool = True

    @property
    def key(self) -> Pair:
        return (self.item, self.cell)


@dataclass(frozen=True)
class CacheWorthySet:
    target_hit_ratio: float
    pairs: tuple[PairPopularity, ...]
    achieved_hit_ratio: float
    weighting: str = "requests"
    infeasible: bool = False
    noncacheable_marked: bool = False
    total_weight: int = 0

    @property
    def keys(self) -> frozenset[Pair]:
        return frozenset(p.key for p in self.pairs)

    def per_cell(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = defaultdict(set)
        for p in self.pairs:
            out[p.cell].add(p.item)
        return dict(out)


@dataclass(frozen=True)
class CachePlan:
    architecture: Level
    contents: Mapping[str, frozenset[str]]
    node_sizes: Mapping[str, int]
    total_size: int
    marked: frozenset[Pair] = field(default=frozenset(), repr=False)
    operator: str = ""

    @property
    def total_items(self) -> int:
        return sum(len(v) for v in self.contents.values())

    @property
    def node_count(self) -> int:
        return len(self.contents)

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "architecture": self.architecture.label,
            "total_size": self.total_size,
            "total_items": self.total_items,
            "nodes": {n: {"items": sorted(self.contents[n]), "size": self.node_sizes[n]}
                      for n in sorted(self.contents)},
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")


def tally_popularity(requests: Iterable[Request]) -> list[PairPopularity]:
    """Request and byte counts for every distinct (item, cell) pair.

    A pair is non-cacheable only when all its requests belong to a
    non-cacheable category. Output is sorted by (cell, item).
    """
    counts: dict[Pair, list] = {}
    for r in requests:
        key = (r.item, r.cell_id)
        slot = counts.get(key)
        if slot is None:
            slot = counts[key] = [0, 0, False]
        slot[0] += 1
        slot[1] += r.bytes
        if r.category not in NON_CACHEABLE:
            slot[2] = True
    return [PairPopularity(item, cell, c, b, ok)
            for (item, cell), (c, b, ok) in sorted(counts.items(), key=lambda kv: (kv[0][1], kv[0][0]))]


def merge_tallies(*tallies: Sequence[PairPopularity]) -> list[PairPopularity]:
    """Combine tallies of disjoint request shards."""
    acc: dict[Pair, list] = {}
    for tally in tallies:
        for p in tally:
            slot = acc.setdefault(p.key, [0, 0, False])
            slot[0] += p.request_count
            slot[1] += p.byte_count
            slot[2] = slot[2] or p.cacheable
    return [PairPopularity(i, c, n, b, ok)
            for (i, c), (n, b, ok) in sorted(acc.items(), key=lambda kv: (kv[0][1], kv[0][0]))]


def _weight(p: PairPopularity, weighting: str) -> int:
    if weighting == "requests":
        return p.request_count
    if weighting == "bytes":
        return p.byte_count
    raise ValueError(f"unknown weighting {weighting!r}")


def mark_cache_worthy(pairs: Iterable[PairPopularity], target: float, weighting: str = "requests",
                      exclude_noncacheable: bool = False) -> CacheWorthySet:
    """Greedily mark the heaviest pairs until they cover ``target`` of the total weight.

    Pairs are visited by decreasing weight, ties by ascending (cell, item).
    Non-cacheable pairs take part unless ``exclude_noncacheable`` is set; if
    one gets marked, ``noncacheable_marked`` is set and a
    :class:`NonCacheableMarkedWarning` is issued. When the target cannot be
    reached, everything eligible is marked and ``infeasible`` is set.
    """
    if not 0.0 <= target <= 1.0:
        raise ValueError(f"target hit ratio must be in [0, 1], got {target}")
    pairs = list(pairs)
    ordered = sorted(pairs, key=lambda p: (-_weight(p, weighting), p.cell, p.item))
    total = sum(_weight(p, weighting) for p in pairs)

    marked: list[PairPopularity] = []
    cum = 0
    reached = target == 0.0
    if not reached:
        for p in ordered:
            if exclude_noncacheable and not p.cacheable:
                continue
            marked.append(p)
            cum += _weight(p, weighting)
            if cum / total >= target:
                reached = True
                break
    achieved = cum / total if total else 0.0
    flagged = any(not p.cacheable for p in marked)
    if flagged:
        warnings.warn(f"target {target} required marking non-cacheable pairs", NonCacheableMarkedWarning,
                      stacklevel=2)
    return CacheWorthySet(target, tuple(marked), achieved, weighting, not reached, flagged, total)


def place_caches(worthy: CacheWorthySet, topology: Topology, architecture, sizes: Optional[Mapping[str, int]] = None
                 ) -> CachePlan:
    """Put one copy of each marked item at the node serving its cell.

    ``sizes`` maps item -> bytes; ``None`` means unit sizes.
    """
    level = Level.parse(architecture)
    contents: dict[str, set[str]] = defaultdict(set)
    for p in worthy.pairs:
        node = topology.ancestor(topology.cell_node(p.cell), level)
        contents[node].add(p.item)
    size = (lambda item: 1) if sizes is None else sizes.__getitem__
    node_sizes = {n: sum(size(i) for i in items) for n, items in contents.items()}
    return CachePlan(level, {n: frozenset(v) for n, v in contents.items()}, node_sizes,
                     sum(node_sizes.values()), worthy.keys, topology.operator)


def hit_mask(plan: CachePlan, requests: Sequence[Request], topology: Topology) -> list[bool]:
    """Per-request hit flags.

    A request hits when its (item, cell) pair was marked and the item is
    stored at the node serving that cell; a sibling cell's copy at a shared
    node does not count.
    """
    out = []
    cache_node: dict[str, str] = {}
    for r in requests:
        if (r.item, r.cell_id) not in plan.marked:
            out.append(False)
            continue
        node = cache_node.get(r.cell_id)
        if node is None:
            node = cache_node[r.cell_id] = topology.ancestor(topology.cell_node(r.cell_id), plan.architecture)
        out.append(r.item in plan.contents.get(node, ()))
    return out


def achieved_hit_ratio(plan: CachePlan, requests: Iterable[Request], topology: Topology,
                       weighting: str = "requests") -> float:
    reqs = list(requests)
    if not reqs:
        return 0.0
    hits = hit_mask(plan, reqs, topology)
    if weighting == "requests":
        return sum(hits) / len(reqs)
    if weighting == "bytes":
        return sum(r.bytes for r, h in zip(reqs, hits) if h) / sum(r.bytes for r in reqs)
    raise ValueError(f"unknown weighting {weighting!r}")


def plan_summary(plan: CachePlan) -> dict:
    sizes = sorted(plan.node_sizes.values())
    return {
        "operator": plan.operator,
        "architecture": plan.architecture.label,
        "total_size": plan.total_size,
        "total_items": plan.total_items,
        "node_count": plan.node_count,
        "min_node_size": sizes[0] if sizes else 0,
        "median_node_size": statistics.median(sizes) if sizes else 0,
        "max_node_size": sizes[-1] if sizes else 0,
    }


SUMMARY_FIELDS = ("operator", "architecture", "total_size", "total_items", "node_count",
                  "min_node_size", "median_node_size", "max_node_size")


def write_plan_summary(plans: Iterable[CachePlan], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, SUMMARY_FIELDS, lineterminator="\n")
        w.writeheader()
        for plan in plans:
            w.writerow(plan_summary(plan))


def node_size_distribution(plan: CachePlan) -> list[int]:
    """Sorted per-node cache sizes, for CDF plots."""
    return sorted(plan.node_sizes.values())
