"""Voronoi tessellation of antenna sites and stop-antenna compatibility maps.

A transportation stop and an antenna are spatially compatible at radius d
when the circle of radius d around the stop overlaps the antenna's Voronoi
cell, i.e. when the distance from the stop to the cell polygon is <= d
(zero if the stop lies inside). Compatibility is precomputed once per
radius and then used as a dictionary during matching.

Cells are clipped to the bounding rectangle of all study locations expanded
by a margin larger than any search radius, so clipping never removes an
overlap that matters. Clipping is done with the reflection trick: every
site is mirrored across the four rectangle sides and the tessellation of
the augmented point set is computed; cells of the original sites are then
bounded and equal to the true cells intersected with the rectangle.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import Voronoi, cKDTree

from .records import LocationTable


@dataclass(frozen=True)
class ClipRect:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def contains(self, p) -> bool:
        return (self.x_min <= p[0] <= self.x_max
                and self.y_min <= p[1] <= self.y_max)


@dataclass
class VoronoiCell:
    """Convex cell of one antenna, vertices counterclockwise."""

    antenna_id: str
    site: np.ndarray        # (2,)
    polygon: np.ndarray     # (k, 2), CCW


def polygon_area(polygon: np.ndarray) -> float:
    """Signed shoelace area (positive for CCW rings)."""
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def point_in_convex_polygon(point, polygon: np.ndarray) -> bool:
    """Inside-or-on test for a CCW convex ring via cross-product signs."""
    px, py = point[0], point[1]
    a = polygon
    b = np.roll(polygon, -1, axis=0)
    cross = (b[:, 0] - a[:, 0]) * (py - a[:, 1]) - (b[:, 1] - a[:, 1]) * (px - a[:, 0])
    return bool((cross >= 0.0).all())


def point_polygon_distance(point, polygon: np.ndarray) -> float:
    """Euclidean distance from a point to a convex ring, 0 if inside."""
    if point_in_convex_polygon(point, polygon):
        return 0.0
    p = np.asarray(point, dtype=np.float64)
    a = polygon
    b = np.roll(polygon, -1, axis=0)
    ab = b - a
    ap = p - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.divide(np.einsum("ij,ij->i", ap, ab), denom,
                          out=np.zeros_like(denom), where=denom > 0), 0.0, 1.0)
    closest = a + t[:, None] * ab
    d = p - closest
    return float(np.sqrt(np.einsum("ij,ij->i", d, d).min()))


def circle_polygon_overlap(center, d: float, polygon: np.ndarray) -> bool:
    """True iff the circle of radius d around `center` overlaps the polygon."""
    if d <= 0:
        raise ValueError("radius must be positive")
    return point_polygon_distance(center, polygon) <= d


def clip_rect_for(points: np.ndarray, margin: float) -> ClipRect:
    return ClipRect(float(points[:, 0].min() - margin),
                    float(points[:, 1].min() - margin),
                    float(points[:, 0].max() + margin),
                    float(points[:, 1].max() + margin))


def build_voronoi(sites: np.ndarray, antenna_ids: Sequence[str] | None = None,
                  clip_margin: float = 5000.0,
                  extra_points: np.ndarray | None = None) -> list[VoronoiCell]:
    """Clipped Voronoi cells of the unique antenna sites.

    `extra_points` (typically the stops) widen the clipping rectangle so it
    covers all study locations. Antennas at exactly duplicate coordinates
    share one cell. The margin must exceed the largest search radius.
    """
    sites = np.asarray(sites, dtype=np.float64)
    if sites.ndim != 2 or sites.shape[1] != 2 or len(sites) == 0:
        raise ValueError("need at least one 2-D site")
    if clip_margin <= 0:
        raise ValueError("clip_margin must be positive")
    if antenna_ids is None:
        antenna_ids = [str(i) for i in range(len(sites))]

    # collapse exact coordinate duplicates; duplicates share the cell
    unique_index: dict[tuple[float, float], int] = {}
    site_of_id: list[int] = []
    unique_sites: list[tuple[float, float]] = []
    for x, y in sites:
        key = (float(x), float(y))
        if key not in unique_index:
            unique_index[key] = len(unique_sites)
            unique_sites.append(key)
        site_of_id.append(unique_index[key])
    usites = np.asarray(unique_sites, dtype=np.float64)

    all_points = usites if extra_points is None else np.vstack([usites, extra_points])
    rect = clip_rect_for(all_points, clip_margin)

    polygons = _clipped_cells(usites, rect)
    return [VoronoiCell(aid, usites[site_of_id[i]].copy(), polygons[site_of_id[i]])
            for i, aid in enumerate(antenna_ids)]


def _clipped_cells(usites: np.ndarray, rect: ClipRect) -> list[np.ndarray]:
    n = len(usites)
    if n == 1:
        ring = np.array([[rect.x_min, rect.y_min], [rect.x_max, rect.y_min],
                         [rect.x_max, rect.y_max], [rect.x_min, rect.y_max]])
        return [ring]
    mirrors = []
    for axis, value in ((0, rect.x_min), (0, rect.x_max),
                        (1, rect.y_min), (1, rect.y_max)):
        m = usites.copy()
        m[:, axis] = 2.0 * value - m[:, axis]
        mirrors.append(m)
    vor = Voronoi(np.vstack([usites] + mirrors))
    polygons: list[np.ndarray] = []
    for i in range(n):
        region = vor.regions[vor.point_region[i]]
        if -1 in region or not region:     # cannot happen with mirrored sites
            raise RuntimeError("unbounded Voronoi cell despite clipping mirrors")
        poly = vor.vertices[region]
        if polygon_area(poly) < 0:
            poly = poly[::-1]
        polygons.append(np.ascontiguousarray(poly))
    return polygons


class CompatibilityMap:
    """Set of spatially compatible (stop_id, antenna_id) pairs at radius d."""

    def __init__(self, d: float, stop_ids: Sequence[str],
                 antenna_ids: Sequence[str],
                 pairs_idx: dict[int, frozenset[int]]):
        self.d = d
        self.stop_ids = list(stop_ids)
        self.antenna_ids = list(antenna_ids)
        self._stop_index = {s: i for i, s in enumerate(self.stop_ids)}
        self._antenna_index = {a: i for i, a in enumerate(self.antenna_ids)}
        # stop index -> frozenset of compatible antenna indices
        self.pairs_idx = {s: frozenset(v) for s, v in pairs_idx.items() if v}

    def antennas_for_idx(self, stop_idx: int) -> frozenset[int]:
        return self.pairs_idx.get(stop_idx, frozenset())

    def contains_idx(self, stop_idx: int, antenna_idx: int) -> bool:
        return antenna_idx in self.pairs_idx.get(stop_idx, ())

    def contains(self, stop_id: str, antenna_id: str) -> bool:
        return self.contains_idx(self._stop_index[stop_id],
                                 self._antenna_index[antenna_id])

    @property
    def pairs(self) -> frozenset[tuple[str, str]]:
        return frozenset((self.stop_ids[s], self.antenna_ids[a])
                         for s, ants in self.pairs_idx.items() for a in ants)

    def n_pairs(self) -> int:
        return sum(len(v) for v in self.pairs_idx.values())

    def is_subset_of(self, other: "CompatibilityMap") -> bool:
        return all(v <= other.pairs_idx.get(s, frozenset())
                   for s, v in self.pairs_idx.items())


def build_compatibility(stops: LocationTable, cells: list[VoronoiCell],
                        d: float) -> CompatibilityMap:
    """All (stop, antenna) pairs whose d-circle and Voronoi cell overlap.

    Candidate cells are pre-filtered with a KD-tree on the sites using the
    cells' circumradii, then checked exactly; the result is identical to the
    exhaustive point-to-polygon scan.
    """
    # one exact check per unique polygon; duplicate antennas share results
    poly_ids: dict[int, int] = {}
    unique_polys: list[np.ndarray] = []
    unique_sites: list[np.ndarray] = []
    members: list[list[int]] = []     # unique poly -> antenna ordinals
    antenna_ids = [c.antenna_id for c in cells]
    for ordinal, cell in enumerate(cells):
        key = id(cell.polygon)
        if key not in poly_ids:
            poly_ids[key] = len(unique_polys)
            unique_polys.append(cell.polygon)
            unique_sites.append(cell.site)
            members.append([])
        members[poly_ids[key]].append(ordinal)

    sites = np.asarray(unique_sites)
    radii = np.array([np.hypot(*(p - s).T).max()
                      for p, s in zip(unique_polys, sites)])
    tree = cKDTree(sites)
    reach = d + float(radii.max())

    pairs_idx: dict[int, frozenset[int]] = {}
    for s_idx in range(len(stops)):
        stop = stops.coords[s_idx]
        hits: set[int] = set()
        for u in tree.query_ball_point(stop, reach):
            if np.hypot(*(stop - sites[u])) > d + radii[u]:
                continue
            if point_polygon_distance(stop, unique_polys[u]) <= d:
                hits.update(members[u])
        if hits:
            pairs_idx[s_idx] = frozenset(hits)
    return CompatibilityMap(d, stops.ids, antenna_ids, pairs_idx)


def compatibility_content_hash(stops: LocationTable, antennas: LocationTable,
                               d: float, clip_margin: float) -> str:
    """Hash of everything the compatibility map depends on (cache key)."""
    h = hashlib.sha256()
    h.update(f"d={d:.6f};margin={clip_margin:.6f};".encode())
    for table in (stops, antennas):
        for loc_id, (x, y) in zip(table.ids, table.coords):
            h.update(f"{loc_id}:{x:.6f}:{y:.6f};".encode())
    return h.hexdigest()[:16]


def write_compatibility_csv(cmap: CompatibilityMap, path: str | Path,
                            content_hash: str) -> None:
    lines = [f"# d={cmap.d:.6f} hash={content_hash}", "stop_id,antenna_id"]
    for s in sorted(cmap.pairs_idx):
        for a in sorted(cmap.pairs_idx[s]):
            lines.append(f"{cmap.stop_ids[s]},{cmap.antenna_ids[a]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_compatibility_csv(path: str | Path, stops: LocationTable,
                           antennas: LocationTable) -> tuple["CompatibilityMap", str]:
    """Load a cached map; returns (map, stored content hash)."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("# d="):
        raise ValueError(f"{path}: missing compatibility header comment")
    head = text[0][2:].split()
    d = float(head[0].split("=", 1)[1])
    stored_hash = head[1].split("=", 1)[1]
    if text[1] != "stop_id,antenna_id":
        raise ValueError(f"{path}: bad column header")
    pairs: dict[int, set[int]] = {}
    for line in text[2:]:
        if not line:
            continue
        stop_id, antenna_id = line.split(",", 1)
        pairs.setdefault(stops.index_of[stop_id], set()).add(
            antennas.index_of[antenna_id])
    return CompatibilityMap(d, stops.ids, antennas.ids,
                            {k: frozenset(v) for k, v in pairs.items()}), stored_hash
