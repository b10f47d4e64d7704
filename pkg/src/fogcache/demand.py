"""Per-item content demand: ID assignment, recommendation/locality bias, synthetic scenarios.

Item IDs are plain strings with a readable structure, always prefixed by
the category so items of different apps never collide::

    YouTube/vid/<rank>                 Zipf (or empirical) video catalog
    News/pop/<k>                       category-wide popular pool
    Maps/loc/<operator>/<cell>/<k>     pool specific to one cell
    RealTime/new/<operator>/<index>    fresh, never requested again
    local/<operator>/<cell>/<k>        locality overlay items (any category)

All randomness comes from ``numpy.random.default_rng([seed, tag])`` with one
draw per request index, so results depend only on (input, parameters, seed).
"""
from __future__ import annotations

import csv
import datetime as dt
import enum
import functools
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .geo import EARTH_RADIUS_KM, LatLon
from .records import (NON_CACHEABLE, CategoryRule, ContentCategory, Technology, TraceRecord,
                      map_app_to_category)
from .topology import CellEstimate, estimate_cell

C = ContentCategory

# stream tags for default_rng([seed, tag])
_TAG_ASSIGN = 11
_TAG_RECOMMEND = 23
_TAG_LOCALITY = 37
_TAG_SYNTH = 41


@dataclass(frozen=True)
class Request:
    user_id: str
    day: dt.date
    hour: int
    cell_id: str
    operator: str
    category: Optional[ContentCategory]
    item: Optional[str]
    bytes: int

    def __post_init__(self):
        if self.bytes <= 0:
            raise ValueError(f"request bytes must be positive, got {self.bytes}")


@dataclass(frozen=True)
class ContentItem:
    item_id: str
    category: ContentCategory
    size_bytes: int
    local_to: Optional[str] = None


@dataclass(frozen=True)
class DemandConfig:
    zipf_exponent: float = 0.8
    video_catalog_size: int = 1_000_000
    popular_pool_size: int = 50
    popular_hit_prob: float = 0.9
    local_pool_size: int = 10
    local_hit_prob: float = 0.9
    rec_top_fraction: float = 0.05
    rec_prob: float = 0.0
    local_items_per_cell: int = 5
    loc_prob: float = 0.0
    seed: int = 0
    catalog_path: Optional[str] = None

    def __post_init__(self):
        for name in ("popular_hit_prob", "local_hit_prob", "rec_top_fraction", "rec_prob", "loc_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        for name in ("video_catalog_size", "popular_pool_size", "local_pool_size", "local_items_per_cell"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.zipf_exponent <= 0:
            raise ValueError(f"zipf_exponent must be positive, got {self.zipf_exponent}")


# -- video catalog ---------------------------------------------------------------

@functools.lru_cache(maxsize=8)
def zipf_cdf(n: int, exponent: float) -> np.ndarray:
    """Cumulative distribution of a Zipf law truncated to ranks 1..n."""
    w = np.arange(1, n + 1, dtype=np.float64) ** -exponent
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    return cdf


@dataclass(frozen=True)
class VideoCatalog:
    """Sampling table for YouTube/OnDemand items: ids plus a cumulative distribution."""

    ids: tuple[str, ...]
    cdf: np.ndarray

    @classmethod
    def zipf(cls, size: int, exponent: float) -> "VideoCatalog":
        return cls((), zipf_cdf(size, exponent))

    @classmethod
    def from_weights(cls, weights: Mapping[str, float]) -> "VideoCatalog":
        items = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))
        w = np.array([float(v) for _, v in items])
        if len(w) == 0 or (w < 0).any() or w.sum() <= 0:
            raise ValueError("empirical catalog needs non-negative weights with a positive sum")
        cdf = np.cumsum(w)
        cdf /= cdf[-1]
        return cls(tuple(k for k, _ in items), cdf)

    def label(self, rank_index: int) -> str:
        return self.ids[rank_index] if self.ids else str(rank_index + 1)

    def sample(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms in [0, 1) to 0-based rank indices."""
        return np.minimum(np.searchsorted(self.cdf, u, side="right"), len(self.cdf) - 1)


def load_catalog(path) -> VideoCatalog:
    """Read an ``item,weight`` CSV (e.g. view counts) into a catalog."""
    with open(path, newline="", encoding="utf-8") as fh:
        weights = {row["item"]: float(row["weight"]) for row in csv.DictReader(fh)}
    return VideoCatalog.from_weights(weights)


def _catalog_for(config: DemandConfig) -> VideoCatalog:
    if config.catalog_path:
        return load_catalog(config.catalog_path)
    return VideoCatalog.zipf(config.video_catalog_size, config.zipf_exponent)


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, tag])


# -- content assignment --------------------------------------------------------

def assign_content_ids(requests: Iterable[Request], config: DemandConfig,
                       catalog: Optional[VideoCatalog] = None) -> list[Request]:
    """Give every request a content item according to its category.

    RealTime, Players and Other get a fresh item per request. YouTube and
    OnDemand draw from the video catalog. News and Sports pick one of
    ``popular_pool_size`` category-wide items with ``popular_hit_prob``,
    Weather and Maps one of ``local_pool_size`` items of their own cell with
    ``local_hit_prob``; the remaining requests get a fresh item.
    """
    reqs = list(requests)
    n = len(reqs)
    if catalog is None and any(r.category in (C.YOUTUBE, C.ON_DEMAND) for r in reqs):
        catalog = _catalog_for(config)
    rng = _rng(config.seed, _TAG_ASSIGN)
    branch = rng.random(n)
    pick = rng.random(n)
    video = catalog.sample(rng.random(n)) if catalog is not None else None

    out = []
    for i, r in enumerate(reqs):
        cat = r.category
        if cat is None:
            raise ValueError(f"request {i} (user {r.user_id}) has no category")
        fresh = f"{cat.value}/new/{r.operator}/{i}"
        if cat in (C.YOUTUBE, C.ON_DEMAND):
            item = f"{cat.value}/vid/{catalog.label(int(video[i]))}"
        elif cat in (C.NEWS, C.SPORTS):
            if branch[i] < config.popular_hit_prob:
                item = f"{cat.value}/pop/{int(pick[i] * config.popular_pool_size)}"
            else:
                item = fresh
        elif cat in (C.WEATHER, C.MAPS):
            if branch[i] < config.local_hit_prob:
                item = f"{cat.value}/loc/{r.operator}/{r.cell_id}/{int(pick[i] * config.local_pool_size)}"
            else:
                item = fresh
        else:
            item = fresh
        out.append(replace(r, item=item))
    return out


def item_category(item_id: str) -> Optional[ContentCategory]:
    """Category encoded in an item id, or None for locality overlay / foreign ids."""
    head = item_id.split("/", 1)[0]
    try:
        return ContentCategory(head)
    except ValueError:
        return None


def item_sizes(requests: Iterable[Request], mode: str = "mean") -> dict[str, int]:
    """Size of every requested item.

    ``mean`` averages the bytes of the item's requests (rounded, at least 1),
    ``first`` keeps the bytes of its first request and ``unit`` sets every
    size to 1 so totals count items.
    """
    if mode == "unit":
        return {r.item: 1 for r in requests}
    if mode == "first":
        sizes: dict[str, int] = {}
        for r in requests:
            sizes.setdefault(r.item, r.bytes)
        return sizes
    if mode != "mean":
        raise ValueError(f"unknown size mode {mode!r}")
    tot: dict[str, int] = defaultdict(int)
    cnt: Counter = Counter()
    for r in requests:
        tot[r.item] += r.bytes
        cnt[r.item] += 1
    return {k: max(1, round(tot[k] / cnt[k])) for k in tot}


def content_items(requests: Iterable[Request], sizes: Mapping[str, int]) -> list[ContentItem]:
    reqs = list(requests)
    seen: dict[str, ContentItem] = {}
    for r in reqs:
        if r.item in seen:
            continue
        local_to = None
        parts = r.item.split("/")
        if (parts[0] == "local" or (len(parts) > 1 and parts[1] == "loc")) and len(parts) >= 4:
            local_to = parts[-2]
        seen[r.item] = ContentItem(r.item, item_category(r.item) or r.category, sizes[r.item], local_to)
    return list(seen.values())


# -- recommendation and locality ---------------------------------------------------

def switch_mask(n: int, prob: float, seed: int, tag: int = _TAG_RECOMMEND) -> tuple[np.ndarray, np.ndarray]:
    """Per-index switch decisions and the uniforms used to choose the target item.

    The decisions for a fixed seed are nested in ``prob``: every index
    switched at a lower probability is also switched at a higher one.
    """
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {prob}")
    rng = _rng(seed, tag)
    u = rng.random(n)
    pick = rng.random(n)
    return u < prob, pick


def popular_pools(requests: Iterable[Request], top_fraction: float) -> dict[ContentCategory, list[str]]:
    """Top ``top_fraction`` of each category's distinct items by request count.

    Pool size is ``ceil(top_fraction * distinct_items)``; ties go to the
    smaller item id. RealTime and Players get no pool.
    """
    if not 0.0 <= top_fraction <= 1.0:
        raise ValueError(f"top_fraction must be in [0, 1], got {top_fraction}")
    counts: dict[ContentCategory, Counter] = defaultdict(Counter)
    for r in requests:
        if r.category not in NON_CACHEABLE:
            counts[r.category][r.item] += 1
    pools = {}
    for cat, cnt in counts.items():
        k = math.ceil(round(top_fraction * len(cnt), 9))
        if k:
            pools[cat] = [item for item, _ in sorted(cnt.items(), key=lambda kv: (-kv[1], kv[0]))[:k]]
    return pools


def export_pools(pools: Mapping[ContentCategory, Sequence[str]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({c.value: list(v) for c, v in sorted(pools.items(), key=lambda kv: kv[0].value)},
                  fh, indent=1)
        fh.write("\n")


def apply_recommendation(requests: Iterable[Request], p: float, top_fraction: float = 0.05,
                         seed: int = 0) -> list[Request]:
    """Bias demand towards each category's most popular items.

    Pools are computed once from the unperturbed input, then each eligible
    request independently moves to a uniform pick from its category's pool
    with probability ``p`` (possibly landing on its own item). RealTime and
    Players requests are left alone.
    """
    reqs = list(requests)
    if p == 0:
        return reqs
    pools = popular_pools(reqs, top_fraction)
    mask, pick = switch_mask(len(reqs), p, seed, _TAG_RECOMMEND)
    out = []
    for i, r in enumerate(reqs):
        pool = pools.get(r.category)
        if mask[i] and pool and r.category not in NON_CACHEABLE:
            r = replace(r, item=pool[int(pick[i] * len(pool))])
        out.append(r)
    return out


def local_item(operator: str, cell_id: str, k: int) -> str:
    return f"local/{operator}/{cell_id}/{k}"


def apply_locality(requests: Iterable[Request], q: float, items_per_cell: int = 5,
                   seed: int = 0) -> list[Request]:
    """Move each request, with probability ``q``, to one of its cell's local items.

    Every cell gets ``items_per_cell`` dedicated items, shared by all
    categories.
    """
    if items_per_cell < 1:
        raise ValueError(f"items_per_cell must be >= 1, got {items_per_cell}")
    reqs = list(requests)
    for i, r in enumerate(reqs):
        if not r.cell_id:
            raise ValueError(f"request {i} (user {r.user_id}) has no cell")
    if q == 0:
        return reqs
    mask, pick = switch_mask(len(reqs), q, seed, _TAG_LOCALITY)
    return [replace(r, item=local_item(r.operator, r.cell_id, int(pick[i] * items_per_cell))) if mask[i] else r
            for i, r in enumerate(reqs)]


def perturb(requests: Sequence[Request], config: DemandConfig) -> list[Request]:
    """Recommendation bias followed by locality bias, both per ``config``."""
    out = apply_recommendation(requests, config.rec_prob, config.rec_top_fraction, config.seed)
    return apply_locality(out, config.loc_prob, config.local_items_per_cell, config.seed)


# -- records -> requests ---------------------------------------------------------

def requests_from_records(records: Iterable[TraceRecord],
                          rules: Optional[Sequence[CategoryRule]] = None) -> list[Request]:
    """Requests for every cellular record that has a cell and downloaded bytes."""
    out = []
    for r in records:
        if not r.cell_id or not r.technology.cellular or r.bytes_down <= 0:
            continue
        out.append(Request(r.user_id, r.day, r.hour, r.cell_id, r.operator,
                           map_app_to_category(r.app_class, rules), None, r.bytes_down))
    return out


# -- synthetic scenarios -------------------------------------------------------

class DeploymentStyle(str, enum.Enum):
    """Many small cells clustered around hotspots, or few large evenly spread cells."""

    DENSE = "dense"
    SPARSE = "sparse"


DEFAULT_SHARES: dict[ContentCategory, float] = {
    C.YOUTUBE: 0.40, C.ON_DEMAND: 0.25, C.REAL_TIME: 0.15, C.PLAYERS: 0.05,
    C.NEWS: 0.05, C.SPORTS: 0.04, C.WEATHER: 0.03, C.MAPS: 0.03,
}

# median bytes per request; lognormal sigma applies to all
DEFAULT_MEDIAN_BYTES: dict[ContentCategory, int] = {
    C.YOUTUBE: 8_000_000, C.ON_DEMAND: 20_000_000, C.REAL_TIME: 5_000_000, C.PLAYERS: 3_000_000,
    C.NEWS: 1_000_000, C.SPORTS: 2_000_000, C.WEATHER: 200_000, C.MAPS: 500_000,
    C.OTHER: 500_000,
}
SIZE_SIGMA = 1.0

APP_CLASS: dict[ContentCategory, str] = {
    C.YOUTUBE: "COM.GOOGLE.ANDROID.YOUTUBE",
    C.ON_DEMAND: "COM.NETFLIX.MEDIACLIENT",
    C.REAL_TIME: "TV.PERISCOPE.ANDROID",
    C.PLAYERS: "ORG.VIDEOLAN.VLC",
    C.WEATHER: "COM.WEATHER.WEATHER",
    C.MAPS: "COM.GOOGLE.ANDROID.APPS.MAPS",
    C.NEWS: "COM.CNN.MOBILE.ANDROID.PHONE",
    C.SPORTS: "COM.GOTV.NFLGAMECENTER.US.LITE",
    C.OTHER: "COM.WEFI.WEFI",
}
BEACON_APP = "COM.WEFI.WEFI"

LA_BBOX = (33.70, -118.70, 34.30, -118.00)  # lat_min, lon_min, lat_max, lon_max
START_DAY = dt.date(2015, 10, 1)


def _validate_shares(shares: Mapping) -> dict[ContentCategory, float]:
    try:
        parsed = {ContentCategory(k): float(v) for k, v in shares.items()}
    except ValueError as exc:
        raise ValueError(f"invalid category share: {exc}") from None
    if any(v < 0 for v in parsed.values()):
        raise ValueError("category shares must be non-negative")
    if not math.isclose(sum(parsed.values()), 1.0, abs_tol=1e-9):
        raise ValueError(f"category shares sum to {sum(parsed.values())}, expected 1")
    return parsed


def _project(lat: np.ndarray, lon: np.ndarray, lat0: float) -> np.ndarray:
    k = math.pi / 180.0 * EARTH_RADIUS_KM
    return np.column_stack([lon * k * math.cos(math.radians(lat0)), lat * k])


def _place_sites(rng: np.random.Generator, style: DeploymentStyle, n: int, bbox) -> np.ndarray:
    lat_lo, lon_lo, lat_hi, lon_hi = bbox
    h, w = lat_hi - lat_lo, lon_hi - lon_lo
    if style is DeploymentStyle.SPARSE:
        cols = max(1, math.ceil(math.sqrt(n * w / h)))
        rows = math.ceil(n / cols)
        idx = np.arange(n)
        lat = lat_lo + (idx // cols + 0.5 + rng.uniform(-0.35, 0.35, n)) * h / rows
        lon = lon_lo + (idx % cols + 0.5 + rng.uniform(-0.35, 0.35, n)) * w / cols
    else:
        n_hot = max(1, min(8, n // 25))
        centers = np.column_stack([rng.uniform(lat_lo + 0.2 * h, lat_hi - 0.2 * h, n_hot),
                                   rng.uniform(lon_lo + 0.2 * w, lon_hi - 0.2 * w, n_hot)])
        clustered = rng.random(n) < 0.7
        which = rng.integers(0, n_hot, n)
        lat = np.where(clustered, centers[which, 0] + rng.normal(0, 0.08 * h, n), rng.uniform(lat_lo, lat_hi, n))
        lon = np.where(clustered, centers[which, 1] + rng.normal(0, 0.08 * w, n), rng.uniform(lon_lo, lon_hi, n))
        lat = np.clip(lat, lat_lo, lat_hi)
        lon = np.clip(lon, lon_lo, lon_hi)
    return np.column_stack([lat, lon])


def _hexagon(center: LatLon, radius_km: float) -> list[LatLon]:
    dlat = radius_km / (math.pi / 180.0 * EARTH_RADIUS_KM)
    dlon = dlat / max(1e-9, math.cos(math.radians(center[0])))
    return [(center[0] + dlat * math.sin(a), center[1] + dlon * math.cos(a))
            for a in (k * math.pi / 3 for k in range(6))]


def synthesize_trace(style, n_cells: int, n_users: int, hours: int,
                     category_shares: Optional[Mapping] = None, *, operator: str = "synth",
                     seed: int = 0, bbox=LA_BBOX, requests_per_hour: float = 4.0,
                     speed_kmh: tuple[float, float] = (20.0, 60.0),
                     static_fraction: float = 0.0) -> tuple[list[CellEstimate], list[TraceRecord]]:
    """Cells plus a WeFi-shaped record stream for one operator.

    Moving users follow random waypoints inside ``bbox`` and attach to the
    nearest cell site. Each (user, hour) emits position-only records at the
    start and end of the hour and ``Poisson(requests_per_hour)`` app
    records in between. Static users (``static_fraction``) stay put on Wi-Fi.
    """
    style = DeploymentStyle(style)
    for name, v in (("n_cells", n_cells), ("n_users", n_users), ("hours", hours)):
        if int(v) < 1:
            raise ValueError(f"{name} must be >= 1, got {v}")
    shares = _validate_shares(category_shares if category_shares is not None else DEFAULT_SHARES)
    rng = _rng(seed, _TAG_SYNTH)

    sites = _place_sites(rng, style, n_cells, bbox)
    lat0 = (bbox[0] + bbox[2]) / 2
    site_xy = _project(sites[:, 0], sites[:, 1], lat0)
    tree = cKDTree(site_xy)
    cell_ids = [f"{operator}-{k:05d}" for k in range(n_cells)]
    if n_cells > 1:
        nn_dist, _ = tree.query(site_xy, k=2)
        radii = np.maximum(0.6 * nn_dist[:, 1], 0.2)
    else:
        radii = np.array([5.0])
    cells = []
    for k in range(n_cells):
        center = (float(sites[k, 0]), float(sites[k, 1]))
        est = estimate_cell(cell_ids[k], operator, _hexagon(center, float(radii[k])))
        # the hexagon's centroid equals its center up to rounding; keep the exact site
        cells.append(replace(est, barycenter=center))

    cats = list(shares)
    probs = np.array([shares[c] for c in cats])
    probs /= probs.sum()
    lat_lo, lon_lo, lat_hi, lon_hi = bbox
    kx = math.pi / 180.0 * EARTH_RADIUS_KM * math.cos(math.radians(lat0))
    ky = math.pi / 180.0 * EARTH_RADIUS_KM

    records: list[TraceRecord] = []
    for u in range(n_users):
        uid = f"u{u:06d}"
        static = rng.random() < static_fraction
        pos = np.array([rng.uniform(lat_lo, lat_hi), rng.uniform(lon_lo, lon_hi)])
        target = np.array([rng.uniform(lat_lo, lat_hi), rng.uniform(lon_lo, lon_hi)])
        speed = rng.uniform(*speed_kmh)
        for h in range(hours):
            day = START_DAY + dt.timedelta(days=h // 24)
            hour = h % 24
            n_req = int(rng.poisson(requests_per_hour))
            times = np.sort(rng.random(n_req))
            stops = np.concatenate([[0.0], times, [1.0]])
            # walk the hour, sampling positions at each stop
            samples = []
            t_prev = 0.0
            for t in stops:
                if not static:
                    budget = (t - t_prev) * speed
                    while budget > 0:
                        d_km = math.hypot((target[0] - pos[0]) * ky, (target[1] - pos[1]) * kx)
                        if d_km <= budget:
                            pos = target
                            budget -= d_km
                            target = np.array([rng.uniform(lat_lo, lat_hi), rng.uniform(lon_lo, lon_hi)])
                        else:
                            pos = pos + (target - pos) * (budget / d_km)
                            budget = 0.0
                t_prev = t
                samples.append((float(pos[0]), float(pos[1])))
            pts = np.array(samples)
            _, nearest = tree.query(_project(pts[:, 0], pts[:, 1], lat0))
            req_cats = rng.choice(len(cats), size=n_req, p=probs)
            sizes = rng.lognormal(0.0, SIZE_SIGMA, n_req)
            techs = rng.random(len(samples))
            for j, (lat, lon) in enumerate(samples):
                if static:
                    tech, cell = Technology.WIFI, None
                else:
                    tech = Technology.LTE if techs[j] < 0.7 else Technology.G3
                    cell = cell_ids[int(nearest[j])]
                if j == 0 or j == len(samples) - 1:
                    app, down = BEACON_APP, 0
                else:
                    cat = cats[int(req_cats[j - 1])]
                    app = APP_CLASS[cat]
                    down = max(1, int(DEFAULT_MEDIAN_BYTES[cat] * sizes[j - 1]))
                records.append(TraceRecord(day, hour, uid, lat, lon, operator, cell, tech, app, down, 0))
    return cells, records


def generate_synthetic_scenario(style, n_cells: int, n_users: int, hours: int,
                                category_shares: Optional[Mapping] = None,
                                config: DemandConfig = DemandConfig(), *, operator: str = "synth",
                                bbox=LA_BBOX, requests_per_hour: float = 4.0,
                                catalog: Optional[VideoCatalog] = None) -> tuple[list[CellEstimate], list[Request]]:
    """Cells and item-labelled requests for one synthetic operator, seeded by ``config.seed``."""
    cells, records = synthesize_trace(style, n_cells, n_users, hours, category_shares,
                                      operator=operator, seed=config.seed, bbox=bbox,
                                      requests_per_hour=requests_per_hour)
    requests = assign_content_ids(requests_from_records(records), config, catalog)
    return cells, requests


# -- serialization --------------------------------------------------------------

REQUEST_FIELDS = ("user_id", "day", "hour", "cell_id", "operator", "category", "item", "bytes")


def _request_row(r: Request) -> list:
    return [r.user_id, r.day.isoformat(), r.hour, r.cell_id, r.operator,
            r.category.value if r.category else "", r.item or "", r.bytes]


def _request_from_row(row: Mapping) -> Request:
    return Request(str(row["user_id"]), dt.date.fromisoformat(str(row["day"])), int(row["hour"]),
                   str(row["cell_id"]), str(row["operator"]),
                   ContentCategory(row["category"]) if row["category"] else None,
                   str(row["item"]) if row["item"] else None, int(row["bytes"]))


def write_requests_csv(requests: Iterable[Request], path) -> int:
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REQUEST_FIELDS)
        for r in requests:
            w.writerow(_request_row(r))
            n += 1
    return n


def read_requests_csv(path) -> list[Request]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [_request_from_row(row) for row in csv.DictReader(fh)]


def write_requests_jsonl(requests: Iterable[Request], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for r in requests:
            fh.write(json.dumps(dict(zip(REQUEST_FIELDS, _request_row(r))), separators=(",", ":")))
            fh.write("\n")
            n += 1
    return n


def read_requests_jsonl(path) -> list[Request]:
    with open(path, encoding="utf-8") as fh:
        return [_request_from_row(json.loads(line)) for line in fh if line.strip()]
