import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trace_matcher.ingest import IngestError, ingest, write_records_csv
from trace_matcher.records import (ActivityBins, EventRecord, LocationTable,
                                   TrajectoryCollection, TripFlag,
                                   bin_activity, project, unproject)

ORIGIN = (103.8, 1.35)


def test_project_origin_is_zero():
    assert project(*ORIGIN, ORIGIN) == (0.0, 0.0)


def test_project_latitude_step():
    x, y = project(ORIGIN[0], ORIGIN[1] + 0.001, ORIGIN)
    assert x == 0.0
    assert abs(y - 111.19) < 0.01


def test_project_longitude_step_at_low_latitude():
    x, y = project(ORIGIN[0] + 0.001, ORIGIN[1], ORIGIN)
    assert y == 0.0
    assert abs(x - 111.16) < 0.01


def test_project_rejects_out_of_range():
    with pytest.raises(ValueError):
        project(181.0, 0.0, ORIGIN)


@settings(max_examples=200)
@given(st.floats(-30000.0, 30000.0), st.floats(-30000.0, 30000.0))
def test_projection_inverse_within_1cm_over_60km(x, y):
    lon, lat = unproject(x, y, ORIGIN)
    x2, y2 = project(lon, lat, ORIGIN)
    assert math.hypot(x2 - x, y2 - y) < 0.01


def test_bin_activity_named_groups():
    bins = ActivityBins()
    b = bin_activity(45, bins, "T")
    assert bins.label(b, "T") == "40-49"
    assert bin_activity(0, bins, "T") == 0
    last = bin_activity(10_000, bins, "C")
    assert last == bins.n_bins("C") - 1
    assert bins.label(last, "C") == "2000+"


def test_bin_activity_paper_style_groups_exist():
    bins = ActivityBins()
    for r, tag, label in [(35, "T", "30-39"), (150, "C", "150-199"),
                          (100, "C", "100-124"), (300, "C", "300-399"),
                          (1500, "C", "1000-1999")]:
        assert bins.label(bin_activity(r, bins, tag), tag) == label


@settings(max_examples=50)
@given(st.lists(st.integers(0, 5000), min_size=1, max_size=200))
def test_bin_populations_sum_to_user_count(activities):
    bins = ActivityBins()
    arr = np.asarray(activities)
    b = bins.bin_of_array(arr, "C")
    assert (b >= 0).all() and (b < bins.n_bins("C")).all()
    assert sum((b == k).sum() for k in range(bins.n_bins("C"))) == len(activities)
    for r in activities:
        k = bin_activity(r, bins, "C")
        lo, hi = bins.bin_range(k, "C")
        assert lo <= r < hi


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


LOCATIONS = "location_id,lon,lat\nL1,103.8,1.35\nL2,103.81,1.36\n"


def test_ingest_identity_case(tmp_path):
    recs = _write(tmp_path / "r.csv",
                  "user_id,timestamp,location_id,trip_flag\n"
                  "A,100,L1,S\nA,200,L2,E\nA,300,L1,S\n")
    locs = _write(tmp_path / "l.csv", LOCATIONS)
    res = ingest(recs, locs, "T")
    assert res.trajectories.n_users == 1
    assert res.trajectories.r(0) == 3
    assert res.dropped_outside_window == 0


def test_ingest_unknown_location_names_row(tmp_path):
    recs = _write(tmp_path / "r.csv",
                  "user_id,timestamp,location_id,trip_flag\nA,100,NOPE,S\n")
    locs = _write(tmp_path / "l.csv", LOCATIONS)
    with pytest.raises(IngestError, match=r":2: unknown location_id 'NOPE'"):
        ingest(recs, locs, "T")


def test_ingest_window_filter(tmp_path):
    recs = _write(tmp_path / "r.csv",
                  "user_id,timestamp,location_id,trip_flag\n"
                  "A,100,L1,S\nA,99999,L2,E\nB,150,L1,S\n")
    locs = _write(tmp_path / "l.csv", LOCATIONS)
    res = ingest(recs, locs, "T", window=(0, 1000))
    by_user = {t.user_id: t.r for t in res.trajectories}
    assert by_user == {"A": 1, "B": 1}
    assert res.dropped_outside_window == 1


def test_ingest_transport_flag_required(tmp_path):
    recs = _write(tmp_path / "r.csv",
                  "user_id,timestamp,location_id,trip_flag\nA,100,L1,-\n")
    locs = _write(tmp_path / "l.csv", LOCATIONS)
    with pytest.raises(IngestError, match="missing trip_flag"):
        ingest(recs, locs, "T")


def test_ingest_communication_flags_coerced(tmp_path):
    recs = _write(tmp_path / "r.csv",
                  "user_id,timestamp,location_id,trip_flag\n"
                  "A,100,L1,S\nA,200,L2,-\n")
    locs = _write(tmp_path / "l.csv", LOCATIONS)
    res = ingest(recs, locs, "C")
    assert all(f == int(TripFlag.NONE) for f in res.trajectories.flag)


def test_ingest_drops_exact_duplicates(tmp_path):
    recs = _write(tmp_path / "r.csv",
                  "user_id,timestamp,location_id,trip_flag\n"
                  "A,100,L1,S\nA,100,L1,S\nA,100,L1,E\n")
    locs = _write(tmp_path / "l.csv", LOCATIONS)
    res = ingest(recs, locs, "T")
    assert res.dropped_duplicates == 1
    assert res.trajectories.r(0) == 2     # rapid tap-in/out at one second kept


def test_records_roundtrip_identity(tmp_path, small_city):
    path = tmp_path / "t.csv"
    write_records_csv(small_city.transport, path)
    locs = tmp_path / "stops.csv"
    from trace_matcher.ingest import write_locations_csv
    write_locations_csv(small_city.stops.ids, small_city.stops_lonlat, locs)
    res = ingest(path, locs, "T", origin=small_city.stops.origin)
    got, want = res.trajectories, small_city.transport
    assert got.user_ids == want.user_ids
    assert np.array_equal(got.ts, want.ts)
    assert np.array_equal(got.flag, want.flag)
    assert [got.table.ids[i] for i in got.loc] == \
           [want.table.ids[i] for i in want.loc]


def test_equal_timestamp_tiebreak_is_input_order_independent():
    table = LocationTable("T", ["L1", "L2"], np.array([[0.0, 0.0], [5.0, 5.0]]),
                          (0.0, 0.0))
    recs = [EventRecord("A", 100, "L2", TripFlag.END),
            EventRecord("A", 100, "L1", TripFlag.START),
            EventRecord("A", 100, "L1", TripFlag.END)]
    a = TrajectoryCollection.from_records("T", recs, table)
    b = TrajectoryCollection.from_records("T", recs[::-1], table)
    assert np.array_equal(a.loc, b.loc) and np.array_equal(a.flag, b.flag)
    # start sorts before end at the same stop and second
    assert list(a.flag) == [int(TripFlag.START), int(TripFlag.END),
                            int(TripFlag.END)]
