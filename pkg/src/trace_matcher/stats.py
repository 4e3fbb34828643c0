"""Empirical match-count distributions, unicity evaluation, dataset profiles.

P_t(m | group) is the distribution of one-use temporal match counts between
random cross-dataset user pairs of an activity group pair; it is estimated
by seeded pair sampling (exact enumeration for small groups). P_s(m | group)
is the distribution of alibi-free spatial match counts, built from the full
match run; alibied pairs and pairs without co-occurrences are folded into
m = 0, so the histogram always covers the whole group product.

Histograms keep raw integer counts and normalize only at output, so
probabilities sum to one exactly up to a final float division.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .geometry import build_compatibility, build_voronoi
from .index import SpatioTemporalIndex, build_index
from .matcher import MatchOutcome, MatchParams, _scan_pair
from .records import ActivityBins, LocationTable, TrajectoryCollection, TripFlag


@dataclass
class MatchCountHistogram:
    """Empirical distribution of match counts for one activity group pair.

    `group` is (T bin, C bin); a C bin of None means "aggregated over all
    communication users" (the distribution used by the matchability
    parameter). `total` is the number of pairs behind the histogram (or
    users, for per-user best-match histograms).
    """

    group: tuple[int, int | None]
    counts: dict[int, int]
    total: int

    def __post_init__(self):
        if self.total <= 0:
            raise ValueError("histogram must cover at least one pair")
        if sum(self.counts.values()) != self.total:
            raise ValueError("histogram counts do not sum to the total")

    def probability(self, m: int) -> float:
        return self.counts.get(m, 0) / self.total

    def probabilities(self) -> dict[int, float]:
        return {m: c / self.total for m, c in sorted(self.counts.items())}

    def mean(self) -> float:
        return sum(m * c for m, c in self.counts.items()) / self.total

    def tail_probability(self, m_star: int) -> float:
        """P(m >= m_star)."""
        tail = sum(c for m, c in self.counts.items() if m >= m_star)
        return tail / self.total

    def support_max(self) -> int:
        return max(self.counts) if self.counts else 0

    @classmethod
    def from_samples(cls, group: tuple[int, int | None],
                     samples: Iterable[int]) -> "MatchCountHistogram":
        counts: dict[int, int] = {}
        total = 0
        for m in samples:
            counts[m] = counts.get(m, 0) + 1
            total += 1
        return cls(group, counts, total)

    def merged_with(self, other: "MatchCountHistogram") -> "MatchCountHistogram":
        counts = dict(self.counts)
        for m, c in other.counts.items():
            counts[m] = counts.get(m, 0) + c
        return MatchCountHistogram(self.group, counts, self.total + other.total)


def merge_histograms(hists: Iterable[MatchCountHistogram],
                     group: tuple[int, int | None] = (-1, None)) -> MatchCountHistogram:
    """Pool several histograms into one (counts and totals add)."""
    counts: dict[int, int] = {}
    total = 0
    for h in hists:
        for m, c in h.counts.items():
            counts[m] = counts.get(m, 0) + c
        total += h.total
    return MatchCountHistogram(group, counts, total)


@dataclass
class PerUserBestHistogram:
    """Per T-bin distribution of each user's best spatial match count."""

    per_bin: dict[int, MatchCountHistogram]


def group_ordinals(collection: TrajectoryCollection,
                   bins: ActivityBins) -> dict[int, np.ndarray]:
    """Bin index -> array of user ordinals in that activity bin."""
    b = bins.bin_of_array(collection.activity(), collection.dataset_tag)
    return {int(k): np.flatnonzero(b == k) for k in np.unique(b)}


def _temporal_count(T: TrajectoryCollection, i: int,
                    C: TrajectoryCollection, j: int,
                    params: MatchParams) -> int:
    a, b = int(T.starts[i]), int(T.starts[i + 1])
    c, d = int(C.starts[j]), int(C.starts[j + 1])
    return _scan_pair(T.ts[a:b], T.loc[a:b], T.flag[a:b],
                      C.ts[c:d], C.loc[c:d], params, spatial=False)[1]


def estimate_pt(T: TrajectoryCollection, C: TrajectoryCollection,
                bins: ActivityBins, params: MatchParams,
                sample_pairs_per_group: int = 100_000, seed: int = 1,
                mode: str = "auto") -> dict[tuple[int, int], MatchCountHistogram]:
    """Estimate P_t(m | T bin, C bin) for every populated group pair.

    mode: "auto" enumerates groups whose pair product fits the sample
    budget and samples the rest; "exact" / "sample" force one behavior.
    Sampling draws pairs uniformly with replacement from a seeded stream
    derived from (seed, T bin, C bin), so results are scheduling-independent.
    """
    if sample_pairs_per_group < 1:
        raise ValueError("sample_pairs_per_group must be >= 1")
    if mode not in ("auto", "exact", "sample"):
        raise ValueError(f"unknown mode {mode!r}")
    groups_t = group_ordinals(T, bins)
    groups_c = group_ordinals(C, bins)
    out: dict[tuple[int, int], MatchCountHistogram] = {}
    for bt, users_t in sorted(groups_t.items()):
        for bc, users_c in sorted(groups_c.items()):
            n_pairs = len(users_t) * len(users_c)
            exact = mode == "exact" or (mode == "auto"
                                        and n_pairs <= sample_pairs_per_group)
            counts: dict[int, int] = {}
            if exact:
                total = n_pairs
                for i in users_t.tolist():
                    for j in users_c.tolist():
                        m = _temporal_count(T, i, C, j, params)
                        counts[m] = counts.get(m, 0) + 1
            else:
                total = sample_pairs_per_group
                rng = np.random.default_rng([seed, bt, bc])
                ii = rng.integers(0, len(users_t), size=total)
                jj = rng.integers(0, len(users_c), size=total)
                for i, j in zip(users_t[ii].tolist(), users_c[jj].tolist()):
                    m = _temporal_count(T, i, C, j, params)
                    counts[m] = counts.get(m, 0) + 1
            out[(bt, bc)] = MatchCountHistogram((bt, bc), counts, total)
    return out


def estimate_ps(outcomes: Iterable[MatchOutcome],
                T: TrajectoryCollection, C: TrajectoryCollection,
                bins: ActivityBins) -> tuple[dict[tuple[int, int], MatchCountHistogram],
                                             dict[int, MatchCountHistogram],
                                             PerUserBestHistogram]:
    """P_s histograms from a full match run (estimation mode, nothing pruned).

    Returns (per group pair, per T bin aggregated over all C users, per-user
    best-match histograms per T bin). Alibied pairs and pairs that never
    co-occur contribute to m = 0 implicitly: the m = 0 count is the group
    pair product minus the observed m >= 1 pairs.
    """
    act_t = bins.bin_of_array(T.activity(), "T")
    act_c = bins.bin_of_array(C.activity(), "C")
    pop_t = {int(k): int((act_t == k).sum()) for k in np.unique(act_t)}
    pop_c = {int(k): int((act_c == k).sum()) for k in np.unique(act_c)}

    by_group: dict[tuple[int, int], dict[int, int]] = {}
    best_of: dict[str, int] = {}
    for o in outcomes:
        if o.kind != "counted":
            continue
        if o.m > 0:
            bt = int(act_t[T.ordinal_of[o.t_user]])
            bc = int(act_c[C.ordinal_of[o.c_user]])
            by_group.setdefault((bt, bc), {})
            by_group[(bt, bc)][o.m] = by_group[(bt, bc)].get(o.m, 0) + 1
        if o.m > best_of.get(o.t_user, -1):
            best_of[o.t_user] = o.m

    n_c_total = C.n_users
    per_group: dict[tuple[int, int], MatchCountHistogram] = {}
    per_tbin_counts: dict[int, dict[int, int]] = {bt: {} for bt in pop_t}
    for bt in sorted(pop_t):
        for bc in sorted(pop_c):
            product = pop_t[bt] * pop_c[bc]
            counts = dict(by_group.get((bt, bc), {}))
            observed = sum(counts.values())
            if observed > product:
                raise ValueError(
                    f"group ({bt},{bc}): {observed} counted pairs exceed the "
                    f"group product {product}")
            counts[0] = counts.get(0, 0) + (product - observed)
            per_group[(bt, bc)] = MatchCountHistogram((bt, bc), counts, product)
            agg = per_tbin_counts[bt]
            for m, c in counts.items():
                agg[m] = agg.get(m, 0) + c
    per_tbin = {bt: MatchCountHistogram((bt, None), counts, pop_t[bt] * n_c_total)
                for bt, counts in per_tbin_counts.items()}

    best_counts: dict[int, dict[int, int]] = {bt: {} for bt in pop_t}
    for i, uid in enumerate(T.user_ids):
        bt = int(act_t[i])
        best = best_of.get(uid, 0)
        best_counts[bt][best] = best_counts[bt].get(best, 0) + 1
    best = PerUserBestHistogram(
        {bt: MatchCountHistogram((bt, None), counts, pop_t[bt])
         for bt, counts in best_counts.items()})
    return per_group, per_tbin, best


@dataclass
class UnicityResult:
    p: int
    d: float
    tau: int
    unicity: float
    stderr: float
    n_trials: int


def _location_neighbors(table: LocationTable, d: float,
                        dataset_tag: str) -> dict[int, np.ndarray]:
    """Locations considered 'within d' of each location.

    Transportation: plain distance between stops. Communication: overlap of
    the d-circle around the queried antenna's site with the other antenna's
    Voronoi cell (matching how cross-dataset proximity is evaluated).
    """
    if dataset_tag == "T":
        tree = cKDTree(table.coords)
        return {i: np.asarray(sorted(tree.query_ball_point(table.coords[i], d)),
                              dtype=np.int64)
                for i in range(len(table))}
    cells = build_voronoi(table.coords, table.ids, clip_margin=d + 1000.0)
    cmap = build_compatibility(table, cells, d)
    return {i: np.asarray(sorted(cmap.antennas_for_idx(i)), dtype=np.int64)
            for i in range(len(table))}


def unicity(dataset: TrajectoryCollection, p: int, d: float, tau: int,
            n_trials: int, seed: int = 1,
            eligible_users: Sequence[int] | None = None,
            neighbors: dict[int, np.ndarray] | None = None,
            index: SpatioTemporalIndex | None = None) -> UnicityResult:
    """Fraction of sampled users uniquely identified by p of their records.

    A trial draws an eligible user and p distinct records; the user is
    unique iff no other user has, for every sampled record, a record within
    tau (strictly) and within d (per-dataset spatial proximity rule). Trials
    are derived from (seed, trial), so sweeps over p/d/tau with one seed
    reuse the same users and record permutations.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    activity = dataset.activity()
    if eligible_users is None:
        eligible = np.flatnonzero(activity >= p)
    else:
        eligible = np.asarray([u for u in eligible_users if activity[u] >= p],
                              dtype=np.int64)
    if len(eligible) == 0:
        raise ValueError(f"no users with at least {p} records")
    if neighbors is None:
        neighbors = _location_neighbors(dataset.table, d, dataset.dataset_tag)
    if index is None:
        index = build_index(dataset)

    unique_trials = 0
    for trial in range(n_trials):
        rng = np.random.default_rng([seed, trial])
        user = int(eligible[rng.integers(0, len(eligible))])
        a = int(dataset.starts[user])
        perm = rng.permutation(int(activity[user]))[:p]
        survivors: set[int] | None = None
        for rec in perm.tolist():
            t = int(dataset.ts[a + rec])
            loc = int(dataset.loc[a + rec])
            here: set[int] = set()
            for nb in neighbors.get(loc, ()):
                got = index.slice_arrays(int(nb), t - tau + 1, t + tau - 1)
                if got is not None:
                    here.update(got[0].tolist())
            survivors = here if survivors is None else survivors & here
            if not survivors - {user}:
                break
        if not (survivors or set()) - {user}:
            unique_trials += 1
    frac = unique_trials / n_trials
    stderr = math.sqrt(frac * (1.0 - frac) / n_trials)
    return UnicityResult(p, d, tau, frac, stderr, n_trials)


@dataclass
class ProfileReport:
    """Descriptive statistics of one dataset."""

    dataset_tag: str
    records_per_user_bin_width: int
    records_per_user: dict[int, int]             # bin lower edge -> users
    time_of_week: dict[int, np.ndarray]           # activity bin -> 672 counts
    trip_speeds_kmh: dict[float, int] = field(default_factory=dict)
    speed_bin_kmh: float = 1.0
    diagnostics: dict[str, int] = field(default_factory=dict)


WEEK_SECONDS = 7 * 24 * 3600
SLOT_SECONDS = 15 * 60                     # 15-minute aggregation
N_SLOTS = WEEK_SECONDS // SLOT_SECONDS


def profile(dataset: TrajectoryCollection, bins: ActivityBins,
            bin_width: int | None = None,
            speed_bin_kmh: float = 1.0) -> ProfileReport:
    """Records-per-user histogram, weekly activity curves, trip speeds (T)."""
    tag = dataset.dataset_tag
    if bin_width is None:
        bin_width = 10 if tag == "T" else 100
    activity = dataset.activity()
    rec_hist: dict[int, int] = {}
    for r in activity.tolist():
        lo = (r // bin_width) * bin_width
        rec_hist[lo] = rec_hist.get(lo, 0) + 1

    act_bins = bins.bin_of_array(activity, tag)
    slots = (dataset.ts % WEEK_SECONDS) // SLOT_SECONDS
    tow: dict[int, np.ndarray] = {}
    for b in np.unique(act_bins):
        users = np.flatnonzero(act_bins == b)
        mask = np.zeros(dataset.n_records, dtype=bool)
        for u in users.tolist():
            mask[dataset.starts[u]:dataset.starts[u + 1]] = True
        tow[int(b)] = np.bincount(slots[mask], minlength=N_SLOTS)

    report = ProfileReport(tag, bin_width, rec_hist, tow,
                           speed_bin_kmh=speed_bin_kmh)
    if tag == "T":
        _profile_trips(dataset, report)
    return report


def _profile_trips(dataset: TrajectoryCollection, report: ProfileReport) -> None:
    """Trips are maximal (start, end) record pairs with no start in between."""
    coords = dataset.table.coords
    diag = {"trips": 0, "end_without_start": 0, "unclosed_start": 0,
            "nonpositive_duration": 0}
    speeds = report.trip_speeds_kmh
    width = report.speed_bin_kmh
    start_flag = int(TripFlag.START)
    for u in range(dataset.n_users):
        a, b = int(dataset.starts[u]), int(dataset.starts[u + 1])
        pending: int | None = None
        for i in range(a, b):
            if int(dataset.flag[i]) == start_flag:
                if pending is not None:
                    diag["unclosed_start"] += 1
                pending = i
            else:
                if pending is None:
                    diag["end_without_start"] += 1
                    continue
                dur = int(dataset.ts[i]) - int(dataset.ts[pending])
                if dur <= 0:
                    diag["nonpositive_duration"] += 1
                else:
                    dist = float(np.hypot(*(coords[int(dataset.loc[i])]
                                            - coords[int(dataset.loc[pending])])))
                    kmh = 3.6 * dist / dur
                    lo = math.floor(kmh / width) * width
                    speeds[lo] = speeds.get(lo, 0) + 1
                    diag["trips"] += 1
                pending = None
        if pending is not None:
            diag["unclosed_start"] += 1
    report.diagnostics.update(diag)
