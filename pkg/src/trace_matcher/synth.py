"""Seeded synthetic city: ground-truth-paired trajectories for verification.

Paired people alternate between a home and a work anchor. Each trip emits a
start tap at the stop nearest the (jittered) origin anchor and an end tap at
the stop nearest the destination anchor; between the taps the person rides
the straight segment between the two stops at a bounded speed, waits at the
departure stop before boarding, and lingers at the arrival stop after
alighting. Communication records are emitted at uniform times; each one is
placed at the antenna nearest the person's current position (plus a small
clipped jitter) with probability `colocate_prob`, or at a uniformly random
antenna otherwise.

Because the riding speed, the waiting intervals around taps and the jitter
clipping are chosen inside the default search radii, a fully colocated pair
can never produce an alibi against its own taps; noise records can.

Everything is derived from (seed, user ordinal) substreams, so output is
byte-stable and independent of scheduling.
"""

from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .config import Config
from .ingest import write_locations_csv, write_records_csv
from .matcher import MatchOutcome, MatchParams, compare_users
from .records import (EventRecord, LocationTable, TrajectoryCollection,
                      TripFlag, unproject)

#: lon/lat anchor used when exporting planar synthetic coordinates to CSV.
EXPORT_ORIGIN = (103.8, 1.35)

# timeline constants; see the module docstring for why they are what they are
WAIT_BEFORE_S = 600       # at the departure stop before the start tap window
LINGER_AFTER_S = 600      # at the arrival stop after the end tap
MIN_TRIP_GAP_S = 1300     # keeps consecutive tap windows from overlapping
MIN_TRIP_DURATION_S = 60
JITTER_CLIP_M = 300.0     # keeps colocated records inside the search radii


@dataclass(frozen=True)
class SynthConfig:
    n_stops: int = 120
    n_antennas: int = 60
    area: float = 8000.0                      # square side, meters
    n_paired: int = 200
    n_unpaired_t: int = 100
    n_unpaired_c: int = 100
    trips_per_day: tuple[float, float] = (2.0, 2.0)
    records_per_day_c: tuple[float, float] = (6.0, 6.0)
    colocate_prob: float = 0.9
    days: int = 7
    seed: int = 1
    anchor_jitter: float = 300.0
    cdr_jitter: float = 100.0
    transit_speed_kmh: float = 20.0

    def __post_init__(self):
        if self.n_stops < 1 or self.n_antennas < 1:
            raise ValueError("need at least one stop and one antenna")
        if not (0.0 <= self.colocate_prob <= 1.0):
            raise ValueError("colocate_prob must be a probability")
        for lo, hi in (self.trips_per_day, self.records_per_day_c):
            if lo < 0 or hi < lo:
                raise ValueError("rates must be non-negative, lo <= hi")

    @classmethod
    def from_config(cls, cfg: Config) -> "SynthConfig":
        return cls(
            n_stops=cfg.get_int("synth_n_stops"),
            n_antennas=cfg.get_int("synth_n_antennas"),
            area=cfg.get_float("synth_area"),
            n_paired=cfg.get_int("synth_n_paired"),
            n_unpaired_t=cfg.get_int("synth_n_unpaired_t"),
            n_unpaired_c=cfg.get_int("synth_n_unpaired_c"),
            trips_per_day=cfg.get_range("synth_trips_per_day"),
            records_per_day_c=cfg.get_range("synth_records_per_day_c"),
            colocate_prob=cfg.get_float("synth_colocate_prob"),
            days=cfg.get_int("synth_days"),
            seed=cfg.get_int("seed"),
            anchor_jitter=cfg.get_float("synth_anchor_jitter"),
            cdr_jitter=cfg.get_float("synth_cdr_jitter"),
            transit_speed_kmh=cfg.get_float("synth_transit_speed_kmh"),
        )


@dataclass
class SynthResult:
    transport: TrajectoryCollection
    communication: TrajectoryCollection
    stops: LocationTable
    antennas: LocationTable
    ground_truth: dict[str, str]              # t_user -> c_user
    stops_lonlat: np.ndarray
    antennas_lonlat: np.ndarray


def _rate(rng: np.random.Generator, lohi: tuple[float, float]) -> float:
    lo, hi = lohi
    if hi <= lo:
        return lo
    return float(np.exp(rng.uniform(np.log(max(lo, 1e-9)), np.log(hi))))


def _clipped_jitter(rng: np.random.Generator, sigma: float) -> np.ndarray:
    v = rng.normal(0.0, sigma, size=2) if sigma > 0 else np.zeros(2)
    norm = float(np.hypot(*v))
    clip = min(2.0 * sigma, JITTER_CLIP_M) if sigma > 0 else 0.0
    if norm > clip > 0:
        v *= clip / norm
    return v


def _dedupe_times(times: list[int]) -> list[int]:
    times.sort()
    for i in range(1, len(times)):
        if times[i] <= times[i - 1]:
            times[i] = times[i - 1] + 1
    return times


class _MobilityPlan:
    """Trips and resting positions of one person."""

    def __init__(self, rng: np.random.Generator, cfg: SynthConfig,
                 stops_xy: np.ndarray, stop_tree: cKDTree, trips_rate: float):
        self.home = rng.uniform(0.0, cfg.area, size=2)
        self.work = rng.uniform(0.0, cfg.area, size=2)
        speed = cfg.transit_speed_kmh / 3.6
        starts: list[int] = []
        ends: list[int] = []
        s1: list[int] = []
        s2: list[int] = []
        rest_pts = [self.home.copy()]
        at_home = True
        raw: list[int] = []
        for day in range(cfg.days):
            n = rng.poisson(trips_rate)
            raw.extend(day * 86400 + t for t in
                       sorted(rng.integers(WAIT_BEFORE_S,
                                           86400 - 4000, size=n).tolist()))
        for t0 in raw:
            if starts and t0 < ends[-1] + MIN_TRIP_GAP_S:
                continue
            origin_anchor = self.home if at_home else self.work
            dest_anchor = self.work if at_home else self.home
            o = origin_anchor + _clipped_jitter(rng, cfg.anchor_jitter)
            w = dest_anchor + _clipped_jitter(rng, cfg.anchor_jitter)
            a = int(stop_tree.query(o)[1])
            b = int(stop_tree.query(w)[1])
            dist = float(np.hypot(*(stops_xy[a] - stops_xy[b])))
            duration = max(MIN_TRIP_DURATION_S, int(round(dist / speed)))
            starts.append(t0)
            ends.append(t0 + duration)
            s1.append(a)
            s2.append(b)
            rest_pts.append(w)
            at_home = not at_home
        self.starts = starts
        self.ends = ends
        self.stop1 = s1
        self.stop2 = s2
        self.rest_pts = rest_pts
        self.stops_xy = stops_xy

    def position(self, t: int) -> np.ndarray:
        i = bisect_right(self.starts, t) - 1
        if i >= 0:
            if t <= self.ends[i]:
                f = (t - self.starts[i]) / max(self.ends[i] - self.starts[i], 1)
                p1 = self.stops_xy[self.stop1[i]]
                p2 = self.stops_xy[self.stop2[i]]
                return p1 + f * (p2 - p1)
            if t <= self.ends[i] + LINGER_AFTER_S:
                return self.stops_xy[self.stop2[i]]
        if i + 1 < len(self.starts) and t >= self.starts[i + 1] - WAIT_BEFORE_S:
            return self.stops_xy[self.stop1[i + 1]]
        return self.rest_pts[i + 1]

    def tap_records(self, user_id: str, stop_ids: list[str]) -> list[EventRecord]:
        out = []
        for t0, t1, a, b in zip(self.starts, self.ends, self.stop1, self.stop2):
            out.append(EventRecord(user_id, t0, stop_ids[a], TripFlag.START))
            out.append(EventRecord(user_id, t1, stop_ids[b], TripFlag.END))
        return out


def _cdr_records(rng: np.random.Generator, cfg: SynthConfig, user_id: str,
                 plan: _MobilityPlan | None, home: np.ndarray,
                 antennas_xy: np.ndarray, antenna_tree: cKDTree,
                 antenna_ids: list[str], rate: float) -> list[EventRecord]:
    times: list[int] = []
    for day in range(cfg.days):
        n = rng.poisson(rate)
        times.extend(day * 86400 + t for t in rng.integers(0, 86400, size=n).tolist())
    times = _dedupe_times(times)
    out = []
    for t in times:
        if rng.random() < cfg.colocate_prob:
            pos = plan.position(t) if plan is not None else home
            point = pos + _clipped_jitter(rng, cfg.cdr_jitter)
            ant = int(antenna_tree.query(point)[1])
        else:
            ant = int(rng.integers(0, len(antennas_xy)))
        out.append(EventRecord(user_id, t, antenna_ids[ant], TripFlag.NONE))
    return out


def generate(cfg: SynthConfig) -> SynthResult:
    """Build the synthetic city (deterministic in cfg.seed)."""
    rng0 = np.random.default_rng([cfg.seed, 0])
    stops_xy = rng0.uniform(0.0, cfg.area, size=(cfg.n_stops, 2))
    antennas_xy = rng0.uniform(0.0, cfg.area, size=(cfg.n_antennas, 2))
    stop_ids = [f"s{i:04d}" for i in range(cfg.n_stops)]
    antenna_ids = [f"a{i:04d}" for i in range(cfg.n_antennas)]
    stop_tree = cKDTree(stops_xy)
    antenna_tree = cKDTree(antennas_xy)

    records_t: list[EventRecord] = []
    records_c: list[EventRecord] = []
    ground_truth: dict[str, str] = {}

    for u in range(cfg.n_paired):
        rng = np.random.default_rng([cfg.seed, 1, u])
        t_user, c_user = f"t{u:05d}", f"c{u:05d}"
        plan = _MobilityPlan(rng, cfg, stops_xy, stop_tree,
                             _rate(rng, cfg.trips_per_day))
        records_t.extend(plan.tap_records(t_user, stop_ids))
        records_c.extend(_cdr_records(rng, cfg, c_user, plan, plan.home,
                                      antennas_xy, antenna_tree, antenna_ids,
                                      _rate(rng, cfg.records_per_day_c)))
        ground_truth[t_user] = c_user

    for u in range(cfg.n_unpaired_t):
        rng = np.random.default_rng([cfg.seed, 2, u])
        t_user = f"t{cfg.n_paired + u:05d}"
        plan = _MobilityPlan(rng, cfg, stops_xy, stop_tree,
                             _rate(rng, cfg.trips_per_day))
        records_t.extend(plan.tap_records(t_user, stop_ids))

    for u in range(cfg.n_unpaired_c):
        rng = np.random.default_rng([cfg.seed, 3, u])
        c_user = f"c{cfg.n_paired + u:05d}"
        home = rng.uniform(0.0, cfg.area, size=2)
        records_c.extend(_cdr_records(rng, cfg, c_user, None, home,
                                      antennas_xy, antenna_tree, antenna_ids,
                                      _rate(rng, cfg.records_per_day_c)))

    stops_lonlat = np.array([unproject(x, y, EXPORT_ORIGIN) for x, y in stops_xy])
    antennas_lonlat = np.array([unproject(x, y, EXPORT_ORIGIN)
                                for x, y in antennas_xy])
    stops = LocationTable("T", stop_ids, stops_xy, EXPORT_ORIGIN)
    antennas = LocationTable("C", antenna_ids, antennas_xy, EXPORT_ORIGIN)
    transport = TrajectoryCollection.from_records("T", records_t, stops)
    communication = TrajectoryCollection.from_records("C", records_c, antennas)
    return SynthResult(transport, communication, stops, antennas,
                       ground_truth, stops_lonlat, antennas_lonlat)


def write_city(result: SynthResult, out_dir: str | Path) -> dict[str, Path]:
    """Write the CSV files the ingestion stage consumes, plus ground truth."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "transport_records": out / "transport_records.csv",
        "comm_records": out / "comm_records.csv",
        "stops": out / "stops.csv",
        "antennas": out / "antennas.csv",
        "ground_truth": out / "ground_truth.csv",
    }
    write_records_csv(result.transport, paths["transport_records"])
    write_records_csv(result.communication, paths["comm_records"])
    write_locations_csv(result.stops.ids, result.stops_lonlat, paths["stops"])
    write_locations_csv(result.antennas.ids, result.antennas_lonlat,
                        paths["antennas"])
    with open(paths["ground_truth"], "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["t_user", "c_user"])
        for t_user in sorted(result.ground_truth):
            w.writerow([t_user, result.ground_truth[t_user]])
    return paths


def oracle_match_all(T: TrajectoryCollection, C: TrajectoryCollection,
                     params: MatchParams) -> list[MatchOutcome]:
    """Exhaustive reference: compare_users on every cross-dataset pair."""
    if T.n_users * C.n_users > 5_000_000:
        raise ValueError("oracle is meant for small instances")
    out = []
    for i in range(T.n_users):
        trajT = T.trajectory(i)
        for j in range(C.n_users):
            out.append(compare_users(trajT, C.trajectory(j), params))
    return out
