"""Planar geometry: polygon containment, uniform point sampling, distances.

Coordinates are treated as plain cartesian values; distances are Euclidean
and only ever used ordinally (closest firm, closest candidate), so no
projection or geodesic correction is applied.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

MAX_SAMPLING_ATTEMPTS = 1_000_000

# A ring is a sequence of (x, y) vertices, implicitly closed.
# A polygon is a list of rings (outer ring first, optional holes after);
# a multipolygon is a list of polygons.
Ring = Sequence[Sequence[float]]
Polygon = Sequence[Ring]


class GeometryError(ValueError):
    """Degenerate geometry or an exhausted sampling budget."""


class Point(NamedTuple):
    x: float
    y: float


def distance(a: Point | Sequence[float], b: Point | Sequence[float]) -> float:
    """Euclidean distance between two points."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _is_ring(poly) -> bool:
    # A bare ring is a sequence whose elements are coordinate pairs.
    head = poly[0]
    return len(head) == 2 and isinstance(head[0], (int, float))


def as_rings(poly: Ring | Polygon) -> list[list[tuple[float, float]]]:
    """Normalize a bare ring or a ring list into a list of vertex lists."""
    if not poly:
        raise GeometryError("empty polygon")
    rings = [poly] if _is_ring(poly) else list(poly)
    out = []
    for ring in rings:
        if len(ring) < 3:
            raise GeometryError(f"polygon ring has {len(ring)} vertices, need >= 3")
        out.append([(float(x), float(y)) for x, y in ring])
    return out


def ring_area(ring: Ring) -> float:
    """Unsigned shoelace area of one ring."""
    acc = 0.0
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i][0], ring[i][1]
        x2, y2 = ring[(i + 1) % n][0], ring[(i + 1) % n][1]
        acc += x1 * y2 - x2 * y1
    return abs(acc) / 2.0


def polygon_area(poly: Ring | Polygon) -> float:
    return sum(ring_area(r) for r in as_rings(poly))


def envelope(poly: Ring | Polygon) -> tuple[float, float, float, float]:
    """Axis-aligned bounding box (minx, miny, maxx, maxy)."""
    rings = as_rings(poly)
    xs = [x for ring in rings for x, _ in ring]
    ys = [y for ring in rings for _, y in ring]
    return min(xs), min(ys), max(xs), max(ys)


def _on_segment(px, py, x1, y1, x2, y2) -> bool:
    cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
    scale = max(abs(x2 - x1), abs(y2 - y1), 1.0)
    if abs(cross) > 1e-12 * scale:
        return False
    return min(x1, x2) - 1e-12 <= px <= max(x1, x2) + 1e-12 and (
        min(y1, y2) - 1e-12 <= py <= max(y1, y2) + 1e-12
    )


def contains(poly: Ring | Polygon, p: Point | Sequence[float]) -> bool:
    """Even-odd containment test; points on the boundary count as inside."""
    rings = as_rings(poly)
    px, py = float(p[0]), float(p[1])
    inside = False
    for ring in rings:
        n = len(ring)
        for i in range(n):
            x1, y1 = ring[i]
            x2, y2 = ring[(i + 1) % n]
            if _on_segment(px, py, x1, y1, x2, y2):
                return True
            if (y1 > py) != (y2 > py):
                x_cross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
                if px < x_cross:
                    inside = not inside
    return inside


def random_point_in_polygon(poly: Ring | Polygon, rng) -> Point:
    """Uniform random point via rejection sampling over the envelope."""
    rings = as_rings(poly)
    if polygon_area(rings) <= 0.0:
        raise GeometryError("cannot sample in a zero-area polygon")
    minx, miny, maxx, maxy = envelope(rings)
    for _ in range(MAX_SAMPLING_ATTEMPTS):
        p = Point(rng.uniform(minx, maxx), rng.uniform(miny, maxy))
        if contains(rings, p):
            return p
    raise GeometryError("sampling budget exhausted; polygon too thin or invalid")


@dataclass
class RegionBoundary:
    """One municipality's geometry plus its urban sub-zones.

    `outer` is a multipolygon; `urban_zones` is a possibly empty list of
    polygons lying (at least partly) inside it.
    """

    region_id: str
    name: str
    outer: list[list[list[tuple[float, float]]]]
    urban_zones: list[list[list[tuple[float, float]]]] = field(default_factory=list)
    hdi: float | None = None
    acp_id: str | None = None
    urban_share: float | None = None
    envelope: tuple[float, float, float, float] = field(init=False)

    def __post_init__(self):
        self.outer = [as_rings(p) for p in self.outer]
        self.urban_zones = [as_rings(p) for p in self.urban_zones]
        xs, ys = [], []
        for polygon in self.outer:
            minx, miny, maxx, maxy = envelope(polygon)
            xs += [minx, maxx]
            ys += [miny, maxy]
        self.envelope = (min(xs), min(ys), max(xs), max(ys))

    def area(self) -> float:
        return sum(polygon_area(p) for p in self.outer)

    def contains_point(self, p) -> bool:
        minx, miny, maxx, maxy = self.envelope
        if not (minx <= p[0] <= maxx and miny <= p[1] <= maxy):
            return False
        return any(contains(polygon, p) for polygon in self.outer)

    def in_urban_zone(self, p) -> bool:
        return any(contains(polygon, p) for polygon in self.urban_zones)

    def urban_area_fraction(self) -> float:
        total = self.area()
        if total <= 0 or not self.urban_zones:
            return 0.0
        urban = sum(polygon_area(p) for p in self.urban_zones)
        return min(1.0, urban / total)

    def urban_probability(self) -> float:
        """Chance a sampled address is urban: explicit share, else area fraction."""
        if not self.urban_zones:
            return 0.0
        if self.urban_share is not None:
            return min(1.0, max(0.0, self.urban_share))
        return self.urban_area_fraction()

    def sample_point(self, rng, urban: bool | None = None) -> Point:
        """Random address within the region, optionally forced urban/rural."""
        minx, miny, maxx, maxy = self.envelope
        for _ in range(MAX_SAMPLING_ATTEMPTS):
            p = Point(rng.uniform(minx, maxx), rng.uniform(miny, maxy))
            if not self.contains_point(p):
                continue
            if urban is None:
                return p
            if urban == self.in_urban_zone(p):
                return p
        raise GeometryError(
            f"sampling budget exhausted for region {self.region_id!r} (urban={urban})"
        )


def _geojson_polygons(geometry: dict) -> list:
    gtype = geometry.get("type")
    coords = geometry.get("coordinates")
    if gtype == "Polygon":
        return [coords]
    if gtype == "MultiPolygon":
        return list(coords)
    raise GeometryError(f"unsupported geometry type {gtype!r}")


def load_boundaries(path, urban_path=None) -> list[RegionBoundary]:
    """Read a GeoJSON FeatureCollection of region boundaries.

    Features carry properties `region_id`, `name`, `hdi2000`, optional
    `acp_id` and `urban_prop`. A second FeatureCollection keyed by
    `region_id` may supply urban-zone polygons.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    urban_by_region: dict[str, list] = {}
    if urban_path is not None:
        with open(urban_path, encoding="utf-8") as fh:
            urban_doc = json.load(fh)
        for feature in urban_doc.get("features", []):
            rid = str(feature["properties"]["region_id"])
            urban_by_region.setdefault(rid, []).extend(
                _geojson_polygons(feature["geometry"])
            )

    boundaries = []
    for feature in doc.get("features", []):
        props = feature.get("properties", {})
        rid = str(props["region_id"])
        hdi = props.get("hdi2000")
        boundaries.append(
            RegionBoundary(
                region_id=rid,
                name=str(props.get("name", rid)),
                outer=_geojson_polygons(feature["geometry"]),
                urban_zones=urban_by_region.get(rid, []),
                hdi=float(hdi) if hdi is not None else None,
                acp_id=str(props["acp_id"]) if props.get("acp_id") is not None else None,
                urban_share=float(props["urban_prop"]) if props.get("urban_prop") is not None else None,
            )
        )
    return boundaries
