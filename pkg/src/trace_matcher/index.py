"""Time-range + location-dictionary index over the communication dataset.

Replaces spatial search during matching: candidate records are found by
looking up the compatible antennas of a stop (dictionary) and slicing each
antenna's time-sorted record list (range search). Query cost is a binary
search per antenna plus the output size.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np

from .records import TrajectoryCollection


class RecordRef(NamedTuple):
    user: int        # user ordinal in the indexed collection
    record: int      # record ordinal within that user's trajectory
    timestamp: int


class SpatioTemporalIndex:
    """Per-antenna time-sorted record references over one collection."""

    def __init__(self, collection: TrajectoryCollection):
        self.collection = collection
        n = collection.n_records
        users = np.repeat(np.arange(collection.n_users, dtype=np.int32),
                          collection.activity())
        recs = (np.arange(n, dtype=np.int32)
                - np.repeat(collection.starts[:-1], collection.activity()).astype(np.int32))
        self._ts: dict[int, np.ndarray] = {}
        self._users: dict[int, np.ndarray] = {}
        self._recs: dict[int, np.ndarray] = {}
        order = np.lexsort((collection.ts, collection.loc))
        loc_sorted = collection.loc[order]
        bounds = np.flatnonzero(np.diff(loc_sorted)) + 1
        for chunk in np.split(order, bounds):
            if len(chunk) == 0:
                continue
            ant = int(collection.loc[chunk[0]])
            self._ts[ant] = np.ascontiguousarray(collection.ts[chunk])
            self._users[ant] = np.ascontiguousarray(users[chunk])
            self._recs[ant] = np.ascontiguousarray(recs[chunk])

    @property
    def size(self) -> int:
        return sum(len(v) for v in self._ts.values())

    @property
    def antennas(self) -> set[int]:
        return set(self._ts)

    def slice_arrays(self, antenna_idx: int, t_lo: int, t_hi: int):
        """(users, records, timestamps) at one antenna with t in [t_lo, t_hi]."""
        ts = self._ts.get(antenna_idx)
        if ts is None:
            return None
        a = int(np.searchsorted(ts, t_lo, side="left"))
        b = int(np.searchsorted(ts, t_hi, side="right"))
        if a == b:
            return None
        return self._users[antenna_idx][a:b], self._recs[antenna_idx][a:b], ts[a:b]

    def query(self, antenna_ids: Iterable[int], t_lo: int, t_hi: int) -> list[RecordRef]:
        """All records at the given antennas with timestamp in [t_lo, t_hi].

        Closed window; the matcher applies its own strict |dt| < tau filter
        on top. Results are sorted for determinism.
        """
        if t_lo > t_hi:
            raise ValueError("t_lo must be <= t_hi")
        out: list[RecordRef] = []
        for ant in set(antenna_ids):
            got = self.slice_arrays(int(ant), t_lo, t_hi)
            if got is None:
                continue
            users, recs, ts = got
            out.extend(RecordRef(int(u), int(r), int(t))
                       for u, r, t in zip(users, recs, ts))
        out.sort()
        return out


def build_index(collection: TrajectoryCollection) -> SpatioTemporalIndex:
    """Index every record of the collection by antenna and time."""
    return SpatioTemporalIndex(collection)
