"""Geodesy and planar geometry helpers used by the topology builder."""
from __future__ import annotations

import math
from typing import Iterable, Sequence

EARTH_RADIUS_KM = 6371.0

LatLon = tuple[float, float]


def great_circle_distance(a: LatLon, b: LatLon) -> float:
    """Haversine distance in kilometers between two (lat, lon) points.

    Parameters
    ----------
    a, b : tuple of float
        Points as (latitude, longitude) in decimal degrees.

    Returns
    -------
    float
        Distance on a sphere of radius 6371 km.

    Examples
    --------
    >>> round(great_circle_distance((0.0, 0.0), (0.0, 1.0)), 2)
    111.19
    """
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    # clamp: rounding can push h a hair above 1 for antipodal points
    h = min(1.0, max(0.0, h))
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


def path_length(points: Sequence[LatLon]) -> float:
    """Sum of great-circle distances between consecutive points."""
    return sum(great_circle_distance(points[i - 1], points[i]) for i in range(1, len(points)))


def _cross(o: LatLon, a: LatLon, b: LatLon) -> float:
    # planar frame is x = lon, y = lat
    return (a[1] - o[1]) * (b[0] - o[0]) - (a[0] - o[0]) * (b[1] - o[1])


def convex_hull(points: Iterable[LatLon]) -> list[LatLon]:
    """Convex hull by Andrew's monotone chain.

    Coordinates are treated as planar (x=lon, y=lat). Vertices come back in
    counterclockwise order, without repeating the first one.
    Collinear boundary points are dropped. Degenerate inputs return the
    distinct points (one point, or the two endpoints of a segment).
    """
    pts = sorted(set((float(p[0]), float(p[1])) for p in points))
    if len(pts) <= 2:
        return pts

    lower: list[LatLon] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[LatLon] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _relative(vertices: Sequence[LatLon]) -> list[tuple[float, float]]:
    # (x, y) offsets from the first vertex; avoids cancellation at large coordinates
    y0, x0 = vertices[0]
    return [(x - x0, y - y0) for y, x in vertices]


def polygon_signed_area(vertices: Sequence[LatLon]) -> float:
    """Shoelace area in squared degrees; positive for counterclockwise order."""
    n = len(vertices)
    if n < 3:
        return 0.0
    rel = _relative(vertices)
    acc = 0.0
    for i in range(n):
        x1, y1 = rel[i - 1]
        x2, y2 = rel[i]
        acc += x1 * y2 - x2 * y1
    return acc / 2.0


def polygon_centroid(vertices: Sequence[LatLon]) -> LatLon:
    """Area centroid of a simple polygon; falls back to the vertex mean if degenerate."""
    area = polygon_signed_area(vertices)
    if len(vertices) < 3 or area == 0.0:
        return mean_point(vertices)
    rel = _relative(vertices)
    cx = cy = 0.0
    for i in range(len(rel)):
        x1, y1 = rel[i - 1]
        x2, y2 = rel[i]
        f = x1 * y2 - x2 * y1
        cx += (x1 + x2) * f
        cy += (y1 + y2) * f
    return vertices[0][0] + cy / (6.0 * area), vertices[0][1] + cx / (6.0 * area)


def mean_point(points: Sequence[LatLon]) -> LatLon:
    if not points:
        raise ValueError("mean of an empty point set")
    n = len(points)
    return sum(p[0] for p in points) / n, sum(p[1] for p in points) / n


def polygon_area_km2(vertices: Sequence[LatLon]) -> float:
    """Approximate area of a small lat/lon polygon in km^2.

    Uses an equirectangular projection around the polygon's mean latitude,
    which is accurate at city scale.
    """
    if len(vertices) < 3:
        return 0.0
    lat0 = math.radians(sum(v[0] for v in vertices) / len(vertices))
    ky = math.pi / 180.0 * EARTH_RADIUS_KM
    kx = ky * math.cos(lat0)
    projected = [(v[0] * ky, v[1] * kx) for v in vertices]
    return abs(polygon_signed_area(projected))


def point_in_convex(point: LatLon, hull: Sequence[LatLon], eps: float = 1e-9) -> bool:
    """True if ``point`` lies inside or on a counterclockwise convex hull."""
    if not hull:
        return False
    if len(hull) == 1:
        return math.isclose(point[0], hull[0][0], abs_tol=eps) and math.isclose(
            point[1], hull[0][1], abs_tol=eps
        )
    if len(hull) == 2:
        a, b = hull
        if abs(_cross(a, b, point)) > eps * max(1.0, abs(b[0] - a[0]) + abs(b[1] - a[1])):
            return False
        return (
            min(a[0], b[0]) - eps <= point[0] <= max(a[0], b[0]) + eps
            and min(a[1], b[1]) - eps <= point[1] <= max(a[1], b[1]) + eps
        )
    n = len(hull)
    return all(_cross(hull[i], hull[(i + 1) % n], point) >= -eps for i in range(n))


def hilbert_index(x: int, y: int, order: int) -> int:
    """Position of integer cell (x, y) along a Hilbert curve over a 2**order grid."""
    n = 1 << order
    d = 0
    s = n >> 1
    while s > 0:
        rx = 1 if (x & s) else 0
        ry = 1 if (y & s) else 0
        d += s * s * ((3 * rx) ^ ry)
        # rotate quadrant
        if ry == 0:
            if rx == 1:
                x = n - 1 - x
                y = n - 1 - y
            x, y = y, x
        s >>= 1
    return d


def hilbert_keys(points: Sequence[LatLon], order: int = 16) -> list[int]:
    """Hilbert keys for points normalized to their common bounding box."""
    if not points:
        return []
    lats = [p[0] for p in points]
    lons = [p[1] for p in points]
    lat_lo, lon_lo = min(lats), min(lons)
    span = max(max(lats) - lat_lo, max(lons) - lon_lo) or 1.0
    top = (1 << order) - 1
    keys = []
    for lat, lon in points:
        x = min(top, int((lon - lon_lo) / span * top))
        y = min(top, int((lat - lat_lo) / span * top))
        keys.append(hilbert_index(x, y, order))
    return keys
