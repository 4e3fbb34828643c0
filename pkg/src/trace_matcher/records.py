"""Core data model: event records, location tables, trajectories, activity bins.

All geometry downstream works on planar coordinates in meters; longitude and
latitude are converted once at ingestion with a local equirectangular
projection. Timestamps are integer seconds. Trajectories are stored as
column arrays (timestamp / location index / flag) for the whole dataset,
with per-user slices exposed as `Trajectory` views.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Iterator, Sequence

import numpy as np

EARTH_RADIUS_M = 6_371_000.0

#: Default activity bin edges (records per study window).
DEFAULT_EDGES_T = tuple(range(0, 131, 10))
DEFAULT_EDGES_C = (0, 20, 30, 50, 70, 100, 125, 150, 200, 250,
                   300, 400, 500, 700, 1000, 2000)


class TripFlag(IntEnum):
    """Marker on a transportation record: start or end of a journey.

    Communication records carry NONE. The integer order (START < END < NONE)
    is also the tie-break order used when sorting records.
    """

    START = 0
    END = 1
    NONE = 2


FLAG_TO_SYMBOL = {TripFlag.START: "S", TripFlag.END: "E", TripFlag.NONE: "-"}
SYMBOL_TO_FLAG = {s: f for f, s in FLAG_TO_SYMBOL.items()}


def project(lon: float, lat: float, origin: tuple[float, float]) -> tuple[float, float]:
    """Project (lon, lat) degrees to local planar meters around `origin`.

    Equirectangular: x = R*(lon-lon0)*cos(lat0)*pi/180, y = R*(lat-lat0)*pi/180.
    Adequate at city scale (sub-centimeter inverse error over tens of km).
    """
    lon0, lat0 = origin
    if not (-180.0 <= lon <= 180.0 and -90.0 <= lat <= 90.0):
        raise ValueError(f"coordinates out of range: ({lon}, {lat})")
    k = math.pi / 180.0 * EARTH_RADIUS_M
    x = (lon - lon0) * k * math.cos(math.radians(lat0))
    y = (lat - lat0) * k
    return x, y


def unproject(x: float, y: float, origin: tuple[float, float]) -> tuple[float, float]:
    """Inverse of `project` for the same origin."""
    lon0, lat0 = origin
    k = math.pi / 180.0 * EARTH_RADIUS_M
    lat = y / k + lat0
    lon = x / (k * math.cos(math.radians(lat0))) + lon0
    return lon, lat


@dataclass(frozen=True)
class EventRecord:
    """One timestamped, located observation of one user in one dataset."""

    user_id: str
    timestamp: int
    location_id: str
    trip_flag: TripFlag = TripFlag.NONE

    def sort_key(self) -> tuple:
        return (self.timestamp, self.location_id, int(self.trip_flag))


class LocationTable:
    """Maps opaque location ids to planar coordinates (meters).

    `dataset_tag` is "T" (transportation stops) or "C" (antennas). The
    projection origin should be shared between the two tables of a study
    (joint centroid) so distances across datasets are consistent.
    """

    def __init__(self, dataset_tag: str, ids: Sequence[str],
                 coords: np.ndarray, origin: tuple[float, float]):
        if dataset_tag not in ("T", "C"):
            raise ValueError(f"dataset_tag must be 'T' or 'C', got {dataset_tag!r}")
        coords = np.asarray(coords, dtype=np.float64)
        if coords.shape != (len(ids), 2):
            raise ValueError("coords must be (n, 2) and aligned with ids")
        if not np.isfinite(coords).all():
            raise ValueError("non-finite coordinates in location table")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate location ids")
        self.dataset_tag = dataset_tag
        self.ids = list(ids)
        self.coords = coords
        self.origin = origin
        self.index_of = {loc: i for i, loc in enumerate(self.ids)}

    @classmethod
    def from_lonlat(cls, dataset_tag: str, ids: Sequence[str],
                    lonlat: np.ndarray, origin: tuple[float, float]) -> "LocationTable":
        lonlat = np.asarray(lonlat, dtype=np.float64)
        coords = np.empty_like(lonlat)
        for i, (lon, lat) in enumerate(lonlat):
            coords[i] = project(lon, lat, origin)
        return cls(dataset_tag, ids, coords, origin)

    def __len__(self) -> int:
        return len(self.ids)

    def coord_of(self, location_id: str) -> np.ndarray:
        return self.coords[self.index_of[location_id]]


@dataclass
class Trajectory:
    """Time-ordered records of one user (arrays are views into the collection).

    `ts` is int64 seconds, `loc` indexes into the dataset's LocationTable,
    `flag` holds TripFlag values as int8.
    """

    user_id: str
    ts: np.ndarray
    loc: np.ndarray
    flag: np.ndarray
    table: LocationTable

    @property
    def r(self) -> int:
        """Activity: number of records."""
        return len(self.ts)

    @property
    def records(self) -> tuple[EventRecord, ...]:
        ids = self.table.ids
        return tuple(
            EventRecord(self.user_id, int(t), ids[l], TripFlag(int(f)))
            for t, l, f in zip(self.ts, self.loc, self.flag)
        )


class TrajectoryCollection:
    """All trajectories of one dataset, stored as contiguous column arrays."""

    def __init__(self, dataset_tag: str, user_ids: Sequence[str],
                 starts: np.ndarray, ts: np.ndarray, loc: np.ndarray,
                 flag: np.ndarray, table: LocationTable):
        self.dataset_tag = dataset_tag
        self.user_ids = list(user_ids)
        self.starts = starts          # (n_users + 1,) offsets into the columns
        self.ts = ts
        self.loc = loc
        self.flag = flag
        self.table = table
        self.ordinal_of = {u: i for i, u in enumerate(self.user_ids)}

    @classmethod
    def from_records(cls, dataset_tag: str, records: Iterable[EventRecord],
                     table: LocationTable) -> "TrajectoryCollection":
        """Build a collection from records (sorted canonically here)."""
        recs = sorted(records, key=lambda r: (r.user_id,) + r.sort_key())
        n = len(recs)
        user_ids: list[str] = []
        starts: list[int] = []
        ts = np.empty(n, dtype=np.int64)
        loc = np.empty(n, dtype=np.int32)
        flag = np.empty(n, dtype=np.int8)
        for i, r in enumerate(recs):
            if not user_ids or r.user_id != user_ids[-1]:
                user_ids.append(r.user_id)
                starts.append(i)
            ts[i] = r.timestamp
            loc[i] = table.index_of[r.location_id]
            flag[i] = int(r.trip_flag)
        starts.append(n)
        return cls(dataset_tag, user_ids, np.asarray(starts, dtype=np.int64),
                   ts, loc, flag, table)

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_records(self) -> int:
        return len(self.ts)

    def r(self, ordinal: int) -> int:
        return int(self.starts[ordinal + 1] - self.starts[ordinal])

    def activity(self) -> np.ndarray:
        """Record count per user, aligned with user ordinals."""
        return np.diff(self.starts)

    def trajectory(self, ordinal: int) -> Trajectory:
        a, b = int(self.starts[ordinal]), int(self.starts[ordinal + 1])
        return Trajectory(self.user_ids[ordinal], self.ts[a:b],
                          self.loc[a:b], self.flag[a:b], self.table)

    def __iter__(self) -> Iterator[Trajectory]:
        for i in range(self.n_users):
            yield self.trajectory(i)

    def filter_window(self, t_lo: int, t_hi: int) -> "TrajectoryCollection":
        """Collection restricted to records with t_lo <= ts < t_hi.

        Users left with zero records are dropped (prefix runs re-derive
        activity from what is actually observed).
        """
        keep = (self.ts >= t_lo) & (self.ts < t_hi)
        user_ids = []
        starts = [0]
        for i in range(self.n_users):
            a, b = int(self.starts[i]), int(self.starts[i + 1])
            k = int(keep[a:b].sum())
            if k:
                user_ids.append(self.user_ids[i])
                starts.append(starts[-1] + k)
        return TrajectoryCollection(
            self.dataset_tag, user_ids, np.asarray(starts, dtype=np.int64),
            self.ts[keep], self.loc[keep], self.flag[keep], self.table)


@dataclass(frozen=True)
class ActivityBins:
    """Half-open activity bins [edge_k, edge_{k+1}) with an open-ended last bin.

    Edges must start at 0 and be strictly ascending, so every non-negative
    activity falls in exactly one bin.
    """

    edges_t: tuple[int, ...] = DEFAULT_EDGES_T
    edges_c: tuple[int, ...] = DEFAULT_EDGES_C

    def __post_init__(self):
        for edges in (self.edges_t, self.edges_c):
            if not edges or edges[0] != 0:
                raise ValueError("bin edges must start at 0")
            if any(b <= a for a, b in zip(edges, edges[1:])):
                raise ValueError("bin edges must be strictly ascending")

    def edges(self, dataset_tag: str) -> tuple[int, ...]:
        return self.edges_t if dataset_tag == "T" else self.edges_c

    def n_bins(self, dataset_tag: str) -> int:
        return len(self.edges(dataset_tag))

    def bin_range(self, index: int, dataset_tag: str) -> tuple[int, float]:
        """Inclusive lower edge and exclusive upper edge (inf for the last bin)."""
        edges = self.edges(dataset_tag)
        hi = edges[index + 1] if index + 1 < len(edges) else math.inf
        return edges[index], hi

    def label(self, index: int, dataset_tag: str) -> str:
        lo, hi = self.bin_range(index, dataset_tag)
        return f"{lo}+" if math.isinf(hi) else f"{lo}-{int(hi) - 1}"

    def bin_of_array(self, r: np.ndarray, dataset_tag: str) -> np.ndarray:
        edges = np.asarray(self.edges(dataset_tag))
        return np.clip(np.searchsorted(edges, r, side="right") - 1,
                       0, len(edges) - 1)


def bin_activity(r: int, bins: ActivityBins, dataset_tag: str) -> int:
    """Index of the unique bin whose [edge_k, edge_{k+1}) range contains r."""
    if r < 0:
        raise ValueError("activity must be non-negative")
    edges = bins.edges(dataset_tag)
    return bisect.bisect_right(edges, r) - 1
