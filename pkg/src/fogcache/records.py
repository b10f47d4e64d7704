"""Trace records, app-to-category mapping and per-hour mobility classification."""
from __future__ import annotations

import csv
import datetime as dt
import enum
import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .geo import LatLon, path_length

logger = logging.getLogger(__name__)


class Technology(str, enum.Enum):
    G3 = "3G"
    LTE = "LTE"
    WIFI = "WiFi"
    NONE = "None"

    @property
    def cellular(self) -> bool:
        return self in (Technology.G3, Technology.LTE)


class ContentCategory(str, enum.Enum):
    YOUTUBE = "YouTube"
    ON_DEMAND = "OnDemand"
    REAL_TIME = "RealTime"
    PLAYERS = "Players"
    WEATHER = "Weather"
    MAPS = "Maps"
    NEWS = "News"
    SPORTS = "Sports"
    OTHER = "Other"


#: categories whose requests never repeat, so caching them is pointless
NON_CACHEABLE = frozenset({ContentCategory.REAL_TIME, ContentCategory.PLAYERS})


class MobilityClass(str, enum.Enum):
    STATIC = "Static"
    PEDESTRIAN = "Pedestrian"
    VEHICULAR = "Vehicular"


@dataclass(frozen=True)
class TraceRecord:
    day: dt.date
    hour: int
    user_id: str
    lat: float
    lon: float
    operator: str
    cell_id: Optional[str]
    technology: Technology
    app_class: str
    bytes_down: int
    bytes_up: int
    ssid: str = ""
    bssid: str = ""

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude out of range: {self.lon}")
        if not 0 <= self.hour <= 23:
            raise ValueError(f"hour out of range: {self.hour}")
        if self.bytes_down < 0 or self.bytes_up < 0:
            raise ValueError("negative byte count")

    @property
    def position(self) -> LatLon:
        return (self.lat, self.lon)


# field name -> CSV column name
DEFAULT_SCHEMA: dict[str, str] = {
    "day": "day",
    "hour": "hour",
    "user_id": "user_id",
    "lat": "lat",
    "lon": "lon",
    "operator": "operator",
    "cell_id": "cell_id",
    "technology": "technology",
    "app_class": "app_class",
    "bytes_down": "bytes_down",
    "bytes_up": "bytes_up",
    "ssid": "ssid",
    "bssid": "bssid",
}
OPTIONAL_FIELDS = frozenset({"ssid", "bssid"})


class TraceFormatError(ValueError):
    """Raised when a trace file cannot be used at all."""


@dataclass
class ParseStats:
    rows: int = 0
    parsed: int = 0
    malformed: int = 0

    def merge(self, other: "ParseStats") -> "ParseStats":
        return ParseStats(self.rows + other.rows, self.parsed + other.parsed,
                          self.malformed + other.malformed)


def _parse_technology(value: str) -> Technology:
    v = value.strip()
    if v == "":
        return Technology.NONE
    for tech in Technology:
        if v.lower() == tech.value.lower():
            return tech
    raise ValueError(f"unknown technology {value!r}")


def _row_to_record(row: Mapping[str, str], schema: Mapping[str, str]) -> TraceRecord:
    get = lambda name: (row.get(schema[name]) or "") if name in schema else ""  # noqa: E731
    cell = get("cell_id").strip()
    return TraceRecord(
        day=dt.date.fromisoformat(get("day").strip()),
        hour=int(get("hour")),
        user_id=get("user_id"),
        lat=float(get("lat")),
        lon=float(get("lon")),
        operator=get("operator"),
        cell_id=cell or None,
        technology=_parse_technology(get("technology")),
        app_class=get("app_class"),
        bytes_down=int(get("bytes_down")),
        bytes_up=int(get("bytes_up")),
        ssid=get("ssid"),
        bssid=get("bssid"),
    )


def parse_trace(path, schema: Optional[Mapping[str, str]] = None,
                stats: Optional[ParseStats] = None,
                max_malformed_fraction: float = 0.5) -> Iterator[TraceRecord]:
    """Stream :class:`TraceRecord` objects from a WeFi-shaped CSV file.

    Rows that fail to parse or violate a field bound are skipped and counted
    in ``stats``. Once the file is exhausted, a :class:`TraceFormatError` is
    raised if more than ``max_malformed_fraction`` of the rows were bad.

    Parameters
    ----------
    path : path-like
        CSV file with a header row.
    schema : mapping, optional
        Overrides for :data:`DEFAULT_SCHEMA` (field name -> column name).
    stats : ParseStats, optional
        Counter object updated in place while iterating.
    """
    cols = dict(DEFAULT_SCHEMA)
    if schema:
        cols.update(schema)
    stats = stats if stats is not None else ParseStats()
    if not os.path.exists(path):
        raise FileNotFoundError(f"trace file not found: {path}")

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise TraceFormatError(f"{path}: missing header row")
        missing = [cols[f] for f in cols if f not in OPTIONAL_FIELDS and cols[f] not in header]
        if missing:
            raise TraceFormatError(f"{path}: header lacks required column(s) {', '.join(missing)}")
        for line_no, row in enumerate(reader, start=2):
            stats.rows += 1
            try:
                rec = _row_to_record(row, cols)
            except (ValueError, TypeError) as exc:
                stats.malformed += 1
                logger.debug("%s:%d skipped: %s", path, line_no, exc)
                continue
            stats.parsed += 1
            yield rec

    if stats.rows and stats.malformed > max_malformed_fraction * stats.rows:
        raise TraceFormatError(
            f"{path}: {stats.malformed} of {stats.rows} rows malformed "
            f"(limit {max_malformed_fraction:.0%})"
        )


def write_trace(records: Iterable[TraceRecord], path, schema: Optional[Mapping[str, str]] = None) -> int:
    """Write records in the same CSV layout :func:`parse_trace` reads. Returns the row count."""
    cols = dict(DEFAULT_SCHEMA)
    if schema:
        cols.update(schema)
    names = list(DEFAULT_SCHEMA)
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([cols[f] for f in names])
        for r in records:
            writer.writerow([
                r.day.isoformat(), r.hour, r.user_id, repr(r.lat), repr(r.lon), r.operator,
                r.cell_id or "", r.technology.value, r.app_class, r.bytes_down, r.bytes_up,
                r.ssid, r.bssid,
            ])
            n += 1
    return n


# -- app class -> category ---------------------------------------------------

@dataclass(frozen=True)
class CategoryRule:
    """Case-insensitive matcher; a leading ``^`` anchors the pattern as a prefix."""

    pattern: str
    category: ContentCategory

    def matches(self, app_class: str) -> bool:
        name = app_class.upper()
        if self.pattern.startswith("^"):
            return name.startswith(self.pattern[1:].upper())
        return self.pattern.upper() in name


def load_rules(path=None) -> list[CategoryRule]:
    """Read an ordered (pattern, category) table; the bundled defaults if ``path`` is None."""
    if path is None:
        text = resources.files("fogcache").joinpath("data/category_rules.csv").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    rows = csv.DictReader(text.splitlines())
    rules = [CategoryRule(r["pattern"].strip(), ContentCategory(r["category"].strip())) for r in rows]
    if not rules:
        raise ValueError("category rule table is empty")
    return rules


_DEFAULT_RULES: Optional[list[CategoryRule]] = None


def default_rules() -> list[CategoryRule]:
    global _DEFAULT_RULES
    if _DEFAULT_RULES is None:
        _DEFAULT_RULES = load_rules()
    return _DEFAULT_RULES


def map_app_to_category(app_class: str, rules: Optional[Sequence[CategoryRule]] = None) -> ContentCategory:
    """First matching rule wins; unmatched class names fall into ``Other``."""
    for rule in rules if rules is not None else default_rules():
        if rule.matches(app_class):
            return rule.category
    return ContentCategory.OTHER


# -- mobility ------------------------------------------------------------------

DEFAULT_THRESHOLDS = (0.05, 5.0)

BucketKey = tuple[str, dt.date, int]


@dataclass
class UserHourProfile:
    user_id: str
    day: dt.date
    hour: int
    positions: list[LatLon] = field(default_factory=list)

    @property
    def distance_km(self) -> float:
        return path_length(self.positions)

    @property
    def mobility(self) -> MobilityClass:
        return classify_mobility(self)


def build_profiles(records: Iterable[TraceRecord]) -> dict[BucketKey, UserHourProfile]:
    """Group record positions per (user, day, hour), keeping file order."""
    profiles: dict[BucketKey, UserHourProfile] = {}
    for r in records:
        key = (r.user_id, r.day, r.hour)
        prof = profiles.get(key)
        if prof is None:
            prof = profiles[key] = UserHourProfile(r.user_id, r.day, r.hour)
        prof.positions.append(r.position)
    return profiles


def classify_mobility(profile: UserHourProfile,
                      thresholds: tuple[float, float] = DEFAULT_THRESHOLDS) -> MobilityClass:
    static_km, vehicular_km = thresholds
    if not 0 <= static_km < vehicular_km:
        raise ValueError(f"bad mobility thresholds {thresholds}")
    if not profile.positions:
        raise ValueError(f"no positions for user {profile.user_id} on {profile.day} hour {profile.hour}")
    d = profile.distance_km
    if d > vehicular_km:
        return MobilityClass.VEHICULAR
    if d <= static_km:
        return MobilityClass.STATIC
    return MobilityClass.PEDESTRIAN


def filter_vehicular(records: Iterable[TraceRecord],
                     thresholds: tuple[float, float] = DEFAULT_THRESHOLDS) -> list[TraceRecord]:
    """Keep the records whose (user, day, hour) bucket is vehicular.

    A user can be vehicular in one hour and static in the next; the decision
    is made per bucket, not per user.
    """
    records = list(records)
    profiles = build_profiles(records)
    vehicular = {k for k, p in profiles.items()
                 if classify_mobility(p, thresholds) is MobilityClass.VEHICULAR}
    return [r for r in records if (r.user_id, r.day, r.hour) in vehicular]


def category_volume(records: Iterable[TraceRecord],
                    rules: Optional[Sequence[CategoryRule]] = None) -> dict[ContentCategory, int]:
    """Downloaded bytes per content category."""
    out: dict[ContentCategory, int] = defaultdict(int)
    for r in records:
        out[map_app_to_category(r.app_class, rules)] += r.bytes_down
    return dict(out)
