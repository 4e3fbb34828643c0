"""Matching users between the transportation and communication datasets.

A transport/communication record pair within the branch time window is a
temporal match; it is a spatial match when the stop and the antenna are
compatible at the branch radius, and an alibi otherwise. The branch
(walking vs transit) is picked from the trip flag and the time order:
before boarding and after alighting people walk (tight radius, wide
window); right after boarding and right before alighting they ride
(wide radius, tight window). A communication record exactly simultaneous
with a tap is treated as the walking case (the user is at the stop).

Per user pair, matches are counted greedily in time order with each record
used at most once; any alibi voids the pair (m = 0). The full search runs
one index query per transport record using the union time window and the
wider compatibility map, then applies the exact branch test, so no
candidate can be lost.
"""

from __future__ import annotations

import multiprocessing as mp
import os
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple

import numpy as np

from .geometry import CompatibilityMap
from .index import SpatioTemporalIndex
from .records import EventRecord, Trajectory, TrajectoryCollection, TripFlag


class Classification(Enum):
    SPATIAL_MATCH = "spatial_match"
    ALIBI = "alibi"
    NO_TEMPORAL_MATCH = "no_temporal_match"


@dataclass
class MatchParams:
    """Search parameters plus the per-radius compatibility maps."""

    compat_w: CompatibilityMap
    compat_t: CompatibilityMap
    d_w: float = 500.0
    tau_w: int = 600
    d_t: float = 2000.0
    tau_t: int = 300
    validate: bool = True

    def __post_init__(self):
        if self.d_w > self.d_t:
            raise ValueError("d_w must not exceed d_t")
        if self.tau_w <= 0 or self.tau_t <= 0:
            raise ValueError("time windows must be positive")
        if self.validate and not self.compat_w.is_subset_of(self.compat_t):
            raise ValueError("walking compatibility map is not a subset of transit map")

    @property
    def tau_union(self) -> int:
        return max(self.tau_w, self.tau_t)


class MatchOutcome(NamedTuple):
    t_user: str
    c_user: str
    kind: str          # "alibi" or "counted"
    m: int             # 0 for alibi pairs

    @property
    def is_alibi(self) -> bool:
        return self.kind == "alibi"


@dataclass
class Pairing:
    """Best-match summary for one transport user."""

    best_m: int
    best_users: tuple[str, ...]
    tie: bool
    retained: tuple[tuple[str, int], ...]    # top-k (c_user, m), ties kept


@dataclass
class MatchResult:
    outcomes: list[MatchOutcome]
    pairings: dict[str, Pairing]
    candidates_examined: int     # temporal-match candidate records scanned


def _is_walking(flag: int, dt: int) -> bool:
    # dt = t_C - t_T; equality goes to the walking side (user is at the stop)
    return dt <= 0 if flag == TripFlag.START else dt >= 0


def classify_pair(rec_T: EventRecord, rec_C: EventRecord,
                  params: MatchParams) -> Classification:
    """Classify one transport/communication record pair."""
    if rec_T.trip_flag is TripFlag.NONE:
        raise ValueError("transport record must carry a start or end flag")
    dt = rec_C.timestamp - rec_T.timestamp
    if _is_walking(int(rec_T.trip_flag), dt):
        tau, compat = params.tau_w, params.compat_w
    else:
        tau, compat = params.tau_t, params.compat_t
    if abs(dt) >= tau:
        return Classification.NO_TEMPORAL_MATCH
    if compat.contains(rec_T.location_id, rec_C.location_id):
        return Classification.SPATIAL_MATCH
    return Classification.ALIBI


def _scan_pair(tsT, locT, flagT, tsC, locC, params: MatchParams,
               spatial: bool) -> tuple[bool, int]:
    """Greedy one-use scan of a user pair; returns (alibi, count).

    With spatial=True this is the full comparison (any alibi aborts);
    with spatial=False it counts temporal matches regardless of space.
    """
    if len(tsT) == 0 or len(tsC) == 0:
        return False, 0
    tau_u = params.tau_union
    lo = np.searchsorted(tsC, tsT - tau_u, side="right")
    hi = np.searchsorted(tsC, tsT + tau_u, side="left")
    hot = np.flatnonzero(hi > lo)
    if len(hot) == 0:
        return False, 0
    w_map = params.compat_w.pairs_idx
    t_map = params.compat_t.pairs_idx
    tau_w, tau_t = params.tau_w, params.tau_t
    start = int(TripFlag.START)
    used: set[int] = set()
    m = 0
    empty: frozenset[int] = frozenset()
    for k in hot.tolist():
        t = int(tsT[k])
        stop = int(locT[k])
        fl = int(flagT[k])
        matched_k = False
        for l in range(int(lo[k]), int(hi[k])):
            dt = int(tsC[l]) - t
            if (dt <= 0 if fl == start else dt >= 0):
                if not -tau_w < dt < tau_w:
                    continue
                if spatial and int(locC[l]) not in w_map.get(stop, empty):
                    return True, 0
            else:
                if not -tau_t < dt < tau_t:
                    continue
                if spatial and int(locC[l]) not in t_map.get(stop, empty):
                    return True, 0
            if not matched_k and l not in used:
                m += 1
                matched_k = True
                used.add(l)
    return False, m


def compare_users(traj_T: Trajectory, traj_C: Trajectory,
                  params: MatchParams) -> MatchOutcome:
    """Full pair evaluation: alibi check plus one-use spatial match count."""
    alibi, m = _scan_pair(traj_T.ts, traj_T.loc, traj_T.flag,
                          traj_C.ts, traj_C.loc, params, spatial=True)
    if alibi:
        return MatchOutcome(traj_T.user_id, traj_C.user_id, "alibi", 0)
    return MatchOutcome(traj_T.user_id, traj_C.user_id, "counted", m)


def count_temporal_matches(traj_T: Trajectory, traj_C: Trajectory,
                           params: MatchParams) -> int:
    """One-use count of temporal matches, spatial consistency ignored."""
    _, m = _scan_pair(traj_T.ts, traj_T.loc, traj_T.flag,
                      traj_C.ts, traj_C.loc, params, spatial=False)
    return m


def _match_one(i: int, T: TrajectoryCollection, idx: SpatioTemporalIndex,
               params: MatchParams) -> tuple[list[int], list[tuple[int, int]], int]:
    """Evaluate one transport user against the indexed communication data.

    Returns (alibied C ordinals, counted (C ordinal, m) list, candidate
    records examined). Every pair is evaluated at most once; users with an
    alibi are dropped from further consideration for this transport user.
    """
    trajT = T.trajectory(i)
    tsT, locT, flagT = trajT.ts, trajT.loc, trajT.flag
    C = idx.collection
    w_map = params.compat_w.pairs_idx
    t_map = params.compat_t.pairs_idx
    tau_w, tau_t, tau_u = params.tau_w, params.tau_t, params.tau_union
    start = int(TripFlag.START)
    empty: frozenset[int] = frozenset()

    evaluated: set[int] = set()
    alibied: list[int] = []
    counted: list[tuple[int, int]] = []
    candidates = 0
    for k in range(len(tsT)):
        t = int(tsT[k])
        stop = int(locT[k])
        fl = int(flagT[k])
        ants = t_map.get(stop)
        if not ants:
            continue
        wset = w_map.get(stop, empty)
        for ant in ants:
            got = idx.slice_arrays(ant, t - tau_u + 1, t + tau_u - 1)
            if got is None:
                continue
            users, _, ts = got
            candidates += len(users)
            for u, tc in zip(users.tolist(), ts.tolist()):
                if u in evaluated:
                    continue
                dt = tc - t
                if (dt <= 0 if fl == start else dt >= 0):
                    if not (-tau_w < dt < tau_w) or ant not in wset:
                        continue
                elif not (-tau_t < dt < tau_t):
                    continue
                # spatial match found: evaluate the pair once
                evaluated.add(u)
                trajC = C.trajectory(u)
                alibi, m = _scan_pair(tsT, locT, flagT, trajC.ts, trajC.loc,
                                      params, spatial=True)
                if alibi:
                    alibied.append(u)
                else:
                    counted.append((u, m))
    return alibied, counted, candidates


def _prune_top_k(counted: list[tuple[int, int]],
                 top_k: int | None) -> list[tuple[int, int]]:
    """Keep the top_k highest counts; ties at the cutoff are all retained."""
    if top_k is None or len(counted) <= top_k:
        return counted
    ms = sorted((m for _, m in counted), reverse=True)
    cutoff = ms[top_k - 1]
    return [(u, m) for u, m in counted if m >= cutoff]


# shared state for forked workers (set by match_all before the pool starts)
_SHARED: dict = {}


def _match_chunk(ordinals: list[int]):
    T, idx, params = _SHARED["T"], _SHARED["idx"], _SHARED["params"]
    return [(i, *_match_one(i, T, idx, params)) for i in ordinals]


def match_all(T: TrajectoryCollection, idx: SpatioTemporalIndex,
              params: MatchParams, top_k: int | None = None,
              threads: int = 1) -> MatchResult:
    """Run the full candidate search for every transport user.

    The outcome stream holds, per transport user, all alibied pairs plus the
    retained counted pairs (all of them when top_k is None - the estimation
    mode). Results are independent of the number of worker processes.
    """
    ordinals = list(range(T.n_users))
    if threads > 1 and len(ordinals) > 1 and "fork" in mp.get_all_start_methods():
        _SHARED.update(T=T, idx=idx, params=params)
        try:
            chunks = [ordinals[i::threads * 4] for i in range(threads * 4)]
            chunks = [c for c in chunks if c]
            with mp.get_context("fork").Pool(threads) as pool:
                per_user: list = []
                for part in pool.map(_match_chunk, chunks):
                    per_user.extend(part)
            per_user.sort(key=lambda row: row[0])
        finally:
            _SHARED.clear()
    else:
        per_user = [(i, *_match_one(i, T, idx, params)) for i in ordinals]

    C = idx.collection
    outcomes: list[MatchOutcome] = []
    pairings: dict[str, Pairing] = {}
    candidates_total = 0
    for i, alibied, counted, candidates in per_user:
        candidates_total += candidates
        t_user = T.user_ids[i]
        for u in sorted(alibied, key=lambda j: C.user_ids[j]):
            outcomes.append(MatchOutcome(t_user, C.user_ids[u], "alibi", 0))
        if counted:
            best_m = max(m for _, m in counted)
            best_users = tuple(sorted(C.user_ids[u] for u, m in counted
                                      if m == best_m))
            retained = _prune_top_k(counted, top_k)
            retained_named = tuple(sorted(((C.user_ids[u], m) for u, m in retained),
                                          key=lambda um: (-um[1], um[0])))
            pairings[t_user] = Pairing(best_m, best_users,
                                       len(best_users) > 1, retained_named)
            for c_user, m in retained_named:
                outcomes.append(MatchOutcome(t_user, c_user, "counted", m))
    return MatchResult(outcomes, pairings, candidates_total)


def resolve_threads(requested: int | None) -> int:
    """--threads value, TRACE_MATCHER_THREADS fallback, else CPU count."""
    if requested is not None and requested > 0:
        return requested
    env = os.environ.get("TRACE_MATCHER_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)
