import math

import numpy as np
import pytest

from conftest import params_for
from trace_matcher.index import build_index
from trace_matcher.matcher import match_all
from trace_matcher.records import (ActivityBins, EventRecord, LocationTable,
                                   TrajectoryCollection, TripFlag)
from trace_matcher.stats import (MatchCountHistogram, estimate_ps, estimate_pt,
                                 group_ordinals, merge_histograms, profile,
                                 unicity)
from trace_matcher.synth import oracle_match_all

from test_matcher import ANTS, STOPS, c_coll, c_rec, t_coll, t_rec, tiny_params

BINS = ActivityBins()


# --- MatchCountHistogram -----------------------------------------------------

def test_histogram_normalizes_exactly():
    h = MatchCountHistogram((0, 0), {0: 7, 1: 2, 3: 1}, 10)
    assert abs(sum(h.probabilities().values()) - 1.0) < 1e-12
    assert h.mean() == (2 + 3) / 10
    assert h.tail_probability(1) == 0.3
    assert h.tail_probability(4) == 0.0


def test_histogram_rejects_inconsistent_counts():
    with pytest.raises(ValueError):
        MatchCountHistogram((0, 0), {0: 1}, 2)


def test_merge_histograms_adds_counts():
    a = MatchCountHistogram((0, 0), {0: 2, 1: 1}, 3)
    b = MatchCountHistogram((0, 1), {1: 2}, 2)
    m = merge_histograms([a, b])
    assert m.counts == {0: 2, 1: 3} and m.total == 5


# --- P_t estimation -----------------------------------------------------------

def test_pt_group_with_no_shared_time_is_point_mass_at_zero():
    p = tiny_params()
    T = t_coll([t_rec(1000, TripFlag.START), t_rec(2000, TripFlag.END)])
    C = c_coll([c_rec(500_000), c_rec(600_000)])
    hists = estimate_pt(T, C, BINS, p, sample_pairs_per_group=100, seed=0)
    (hist,) = hists.values()
    assert hist.probabilities() == {0: 1.0}


def test_pt_single_pair_group_hand_built():
    p = tiny_params()
    # three one-use temporal matches: two walking-side, one alibi-side record
    T = t_coll([t_rec(1000, TripFlag.START), t_rec(3000, TripFlag.START),
                t_rec(9000, TripFlag.END)])
    C = c_coll([c_rec(900), c_rec(2900, "A1"), c_rec(9100)])
    hists = estimate_pt(T, C, BINS, p, sample_pairs_per_group=100, seed=0)
    (hist,) = hists.values()
    assert hist.probabilities() == {3: 1.0}


def test_pt_sampled_close_to_exact(small_city, small_city_params):
    T, C = small_city.transport, small_city.communication
    # restrict to one populated group pair via the users' actual bins
    exact = estimate_pt(T, C, BINS, small_city_params, mode="exact",
                        sample_pairs_per_group=1)
    sampled = estimate_pt(T, C, BINS, small_city_params, mode="sample",
                          sample_pairs_per_group=10_000, seed=3)
    group = max(exact, key=lambda g: exact[g].total)
    pe, ps = exact[group].probabilities(), sampled[group].probabilities()
    tv = 0.5 * sum(abs(pe.get(m, 0.0) - ps.get(m, 0.0))
                   for m in set(pe) | set(ps))
    assert tv < 0.05


def test_pt_sampling_error_halves_with_4x_samples(small_city, small_city_params):
    """Standard error of the sampled histogram scales like 1/sqrt(n)."""
    T, C = small_city.transport, small_city.communication
    exact = estimate_pt(T, C, BINS, small_city_params, mode="exact",
                        sample_pairs_per_group=1)
    group = max(exact, key=lambda g: exact[g].total)
    truth = exact[group].probabilities().get(0, 0.0)

    def spread(n, seeds):
        vals = []
        for s in seeds:
            h = estimate_pt(T, C, BINS, small_city_params, mode="sample",
                            sample_pairs_per_group=n, seed=s)[group]
            vals.append(h.probabilities().get(0, 0.0))
        return np.std([v - truth for v in vals])

    small = spread(500, range(20, 35))
    big = spread(8000, range(40, 55))
    assert big < small        # 16x samples must visibly shrink the spread
    assert big < 0.6 * small  # expected factor is 4; allow wide slack


def test_pt_requires_positive_budget(small_city, small_city_params):
    with pytest.raises(ValueError):
        estimate_pt(small_city.transport, small_city.communication, BINS,
                    small_city_params, sample_pairs_per_group=0)


# --- P_s estimation -----------------------------------------------------------

def _ps_setup(n_t=10, n_c=10):
    """n_t x n_c users with one pair having m = 2 and everyone else nothing."""
    t_recs, c_recs = [], []
    for u in range(n_t):
        t_recs += [EventRecord(f"t{u:02d}", 1000 + 50_000 * u, "S0", TripFlag.START),
                   EventRecord(f"t{u:02d}", 2000 + 50_000 * u, "S0", TripFlag.END)]
    for u in range(n_c):
        base = 1_000_000 + 50_000 * u
        c_recs += [EventRecord(f"c{u:02d}", base, "A0"),
                   EventRecord(f"c{u:02d}", base + 100, "A0")]
    # plant: c00 co-occurs with t00 twice
    c_recs[0] = EventRecord("c00", 900, "A0")
    c_recs[1] = EventRecord("c00", 2100, "A0")
    T = TrajectoryCollection.from_records("T", t_recs, STOPS)
    C = TrajectoryCollection.from_records("C", c_recs, ANTS)
    return T, C


def test_ps_no_counted_outcomes_gives_point_mass_zero():
    p = tiny_params()
    T = t_coll([t_rec(1000, TripFlag.START)])
    C = c_coll([c_rec(500_000)])
    per_group, per_tbin, best = estimate_ps([], T, C, BINS)
    (hist,) = per_group.values()
    assert hist.probabilities() == {0: 1.0}
    (bhist,) = best.per_bin.values()
    assert bhist.probabilities() == {0: 1.0}


def test_ps_single_pair_arithmetic():
    p = tiny_params()
    T, C = _ps_setup()
    idx = build_index(C)
    res = match_all(T, idx, p, top_k=None)
    per_group, per_tbin, best = estimate_ps(res.outcomes, T, C, BINS)
    (hist,) = per_group.values()
    assert hist.total == 100
    assert hist.probability(2) == 0.01
    assert hist.probability(0) == 0.99
    # aggregated per-T-bin histogram spans all C users
    (agg,) = per_tbin.values()
    assert agg.total == 10 * C.n_users
    # best-match distribution: one user at 2, nine at 0
    (bhist,) = best.per_bin.values()
    assert bhist.counts == {0: 9, 2: 1}


def test_ps_matches_bruteforce_oracle(small_city, small_city_params):
    T, C = small_city.transport, small_city.communication
    idx = build_index(C)
    res = match_all(T, idx, small_city_params, top_k=None)
    per_group, _, _ = estimate_ps(res.outcomes, T, C, BINS)

    oracle = oracle_match_all(T, C, small_city_params)
    bt = BINS.bin_of_array(T.activity(), "T")
    bc = BINS.bin_of_array(C.activity(), "C")
    want: dict = {}
    for o in oracle:
        if o.kind == "counted" and o.m > 0:
            g = (int(bt[T.ordinal_of[o.t_user]]), int(bc[C.ordinal_of[o.c_user]]))
            want.setdefault(g, {})[o.m] = want.setdefault(g, {}).get(o.m, 0) + 1
    for g, hist in per_group.items():
        observed = {m: c for m, c in hist.counts.items() if m > 0}
        assert observed == want.get(g, {})
        assert abs(sum(hist.probabilities().values()) - 1.0) < 1e-12


def test_ps_mass_above_zero_bounded_by_pt(small_city, small_city_params):
    """sum_{m>=1} P_s <= sum_{m>=1} P_t per group, with exact-mode P_t."""
    T, C = small_city.transport, small_city.communication
    idx = build_index(C)
    res = match_all(T, idx, small_city_params, top_k=None)
    per_group, _, _ = estimate_ps(res.outcomes, T, C, BINS)
    pt = estimate_pt(T, C, BINS, small_city_params, mode="exact",
                     sample_pairs_per_group=1)
    for g, ps_hist in per_group.items():
        assert ps_hist.tail_probability(1) <= pt[g].tail_probability(1) + 1e-12


def test_ps_rejects_outcomes_exceeding_population():
    p = tiny_params()
    T = t_coll([t_rec(1000, TripFlag.START)])
    C = c_coll([c_rec(900)])
    from trace_matcher.matcher import MatchOutcome
    fake = [MatchOutcome("ti", "cj", "counted", 1),
            MatchOutcome("ti", "cj", "counted", 2)]
    with pytest.raises(ValueError, match="exceed"):
        estimate_ps(fake, T, C, BINS)


# --- unicity ------------------------------------------------------------------

def _lattice_table(n, spacing, tag="T"):
    ids = [f"L{i}" for i in range(n)]
    coords = np.column_stack([np.arange(n) * spacing, np.zeros(n)])
    return LocationTable(tag, ids, coords, (0.0, 0.0))


def test_unicity_private_locations_fully_unique():
    table = _lattice_table(10, 10_000.0)
    recs = []
    for u in range(10):
        for k in range(5):
            recs.append(EventRecord(f"u{u}", 1000 * u + k, f"L{u}", TripFlag.START))
    coll = TrajectoryCollection.from_records("T", recs, table)
    for p in (1, 3, 5):
        res = unicity(coll, p=p, d=500.0, tau=300, n_trials=200, seed=1)
        assert res.unicity == 1.0


def test_unicity_identical_twins_never_unique():
    table = _lattice_table(3, 10_000.0)
    recs = []
    for name in ("a", "b"):
        for k in range(6):
            recs.append(EventRecord(name, 100 * k, "L1", TripFlag.START))
    coll = TrajectoryCollection.from_records("T", recs, table)
    res = unicity(coll, p=3, d=500.0, tau=300, n_trials=100, seed=2)
    assert res.unicity == 0.0


def test_unicity_planted_doppelgangers_fraction():
    """100 base users; exactly 30 have a covering doppelganger."""
    n = 100
    table = _lattice_table(n, 5_000.0)
    recs = []
    for u in range(n):
        for k in range(6):
            recs.append(EventRecord(f"u{u:03d}", 100_000 * u + 400 * k,
                                    f"L{u}", TripFlag.START))
    for u in range(30):     # doppelganger covers every point within tau
        for k in range(6):
            recs.append(EventRecord(f"dg{u:03d}", 100_000 * u + 400 * k + 100,
                                    f"L{u}", TripFlag.START))
    coll = TrajectoryCollection.from_records("T", recs, table)
    eligible = [i for i, uid in enumerate(coll.user_ids) if uid.startswith("u")]
    res = unicity(coll, p=4, d=500.0, tau=300, n_trials=1500, seed=5,
                  eligible_users=eligible)
    ci95 = 1.96 * math.sqrt(0.7 * 0.3 / res.n_trials)
    assert abs(res.unicity - 0.70) <= ci95 + 1e-9


def test_unicity_monotonicity(small_city):
    coll = small_city.communication
    eligible = np.flatnonzero(coll.activity() >= 5)
    base = dict(n_trials=300, seed=9, eligible_users=eligible)
    by_p = [unicity(coll, p=p, d=500.0, tau=300, **base).unicity
            for p in (1, 2, 3, 4, 5)]
    assert all(a <= b + 1e-12 for a, b in zip(by_p, by_p[1:]))
    by_d = [unicity(coll, p=3, d=d, tau=300, **base).unicity
            for d in (200.0, 500.0, 1000.0)]
    assert all(a >= b - 1e-12 for a, b in zip(by_d, by_d[1:]))
    by_tau = [unicity(coll, p=3, d=500.0, tau=tau, **base).unicity
              for tau in (60, 300, 600)]
    assert all(a >= b - 1e-12 for a, b in zip(by_tau, by_tau[1:]))


def test_unicity_requires_eligible_users():
    table = _lattice_table(2, 1000.0)
    coll = TrajectoryCollection.from_records(
        "T", [EventRecord("u", 0, "L0", TripFlag.START)], table)
    with pytest.raises(ValueError):
        unicity(coll, p=5, d=500.0, tau=300, n_trials=10)


# --- profiles -------------------------------------------------------------------

def test_profile_single_user_histogram():
    table = _lattice_table(2, 1000.0)
    recs = [EventRecord("u", t, "L0", TripFlag.START) for t in (0, 10, 20)]
    coll = TrajectoryCollection.from_records("T", recs, table)
    rep = profile(coll, BINS)
    assert rep.records_per_user == {0: 1}
    assert rep.records_per_user_bin_width == 10


def test_profile_trip_speed_anchor_value():
    # 4 km start-to-end in 600 s -> average speed 24 km/h
    table = LocationTable("T", ["A", "B"],
                          np.array([[0.0, 0.0], [4000.0, 0.0]]), (0.0, 0.0))
    recs = [EventRecord("u", 1000, "A", TripFlag.START),
            EventRecord("u", 1600, "B", TripFlag.END)]
    coll = TrajectoryCollection.from_records("T", recs, table)
    rep = profile(coll, BINS, speed_bin_kmh=1.0)
    assert rep.trip_speeds_kmh == {24.0: 1}
    assert rep.diagnostics["trips"] == 1


def test_profile_end_without_start_tallied():
    table = _lattice_table(2, 1000.0)
    recs = [EventRecord("u", 1000, "L0", TripFlag.END),
            EventRecord("u", 2000, "L0", TripFlag.START),
            EventRecord("u", 2500, "L1", TripFlag.END)]
    coll = TrajectoryCollection.from_records("T", recs, table)
    rep = profile(coll, BINS)
    assert rep.diagnostics["end_without_start"] == 1
    assert rep.diagnostics["trips"] == 1


def test_profile_time_of_week_slots(small_city):
    rep = profile(small_city.communication, BINS)
    total = sum(int(v.sum()) for v in rep.time_of_week.values())
    assert total == small_city.communication.n_records
