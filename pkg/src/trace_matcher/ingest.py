"""CSV ingestion and the canonical writers for records and locations.

Schemas:
    records:   user_id,timestamp,location_id,trip_flag   (trip_flag in {S,E,-})
    locations: location_id,lon,lat

Transportation records must carry S or E. Communication records are all
treated identically (flag stored as '-' regardless of input). Exact
full-row duplicates are dropped with a count; records outside the study
window are dropped with a count.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .records import (EventRecord, LocationTable, TrajectoryCollection,
                      TripFlag, SYMBOL_TO_FLAG, FLAG_TO_SYMBOL)

RECORDS_HEADER = ["user_id", "timestamp", "location_id", "trip_flag"]
LOCATIONS_HEADER = ["location_id", "lon", "lat"]


class IngestError(ValueError):
    """Malformed input data; message carries the offending file/line."""


@dataclass
class IngestResult:
    trajectories: TrajectoryCollection
    locations: LocationTable
    dropped_outside_window: int
    dropped_duplicates: int


def load_location_rows(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Raw (ids, lon/lat array) from a locations CSV, before projection."""
    ids: list[str] = []
    lonlat: list[tuple[float, float]] = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != LOCATIONS_HEADER:
            raise IngestError(f"{path}: expected header {','.join(LOCATIONS_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise IngestError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                ids.append(row[0])
                lonlat.append((float(row[1]), float(row[2])))
            except ValueError as e:
                raise IngestError(f"{path}:{lineno}: {e}") from e
    if len(set(ids)) != len(ids):
        raise IngestError(f"{path}: duplicate location ids")
    return ids, np.asarray(lonlat, dtype=np.float64)


def joint_origin(*lonlat_arrays: np.ndarray) -> tuple[float, float]:
    """Centroid over all provided lon/lat arrays (shared projection origin)."""
    stacked = np.vstack([a for a in lonlat_arrays if len(a)])
    return float(stacked[:, 0].mean()), float(stacked[:, 1].mean())


def load_location_table(path: str | Path, dataset_tag: str,
                        origin: tuple[float, float] | None = None) -> LocationTable:
    ids, lonlat = load_location_rows(path)
    if origin is None:
        origin = joint_origin(lonlat)
    return LocationTable.from_lonlat(dataset_tag, ids, lonlat, origin)


def _parse_record(row: Sequence[str], dataset_tag: str, path, lineno: int,
                  table: LocationTable) -> EventRecord:
    if len(row) != 4:
        raise IngestError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
    user_id, ts_text, location_id, flag_text = row
    try:
        timestamp = int(ts_text)
    except ValueError as e:
        raise IngestError(f"{path}:{lineno}: bad timestamp {ts_text!r}") from e
    if location_id not in table.index_of:
        raise IngestError(f"{path}:{lineno}: unknown location_id {location_id!r}")
    flag = SYMBOL_TO_FLAG.get(flag_text.strip())
    if flag is None:
        raise IngestError(f"{path}:{lineno}: bad trip_flag {flag_text!r}")
    if dataset_tag == "T":
        if flag is TripFlag.NONE:
            raise IngestError(
                f"{path}:{lineno}: transportation record missing trip_flag (S or E)")
    else:
        flag = TripFlag.NONE   # communication records are all treated identically
    return EventRecord(user_id, timestamp, location_id, flag)


def ingest(records_file: str | Path, locations_file: str | Path,
           dataset_tag: str, window: tuple[int, int] | None = None,
           origin: tuple[float, float] | None = None) -> IngestResult:
    """Load one dataset: records + locations -> trajectory collection.

    `window` is half-open [start, end); records outside it are dropped and
    counted. `origin` should be the joint centroid of both datasets'
    locations when two datasets are matched together.
    """
    table = load_location_table(locations_file, dataset_tag, origin)
    records: list[EventRecord] = []
    seen: set[tuple] = set()
    dropped_window = 0
    dropped_dup = 0
    with open(records_file, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != RECORDS_HEADER:
            raise IngestError(
                f"{records_file}: expected header {','.join(RECORDS_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            rec = _parse_record(row, dataset_tag, records_file, lineno, table)
            if window is not None and not (window[0] <= rec.timestamp < window[1]):
                dropped_window += 1
                continue
            key = (rec.user_id, rec.timestamp, rec.location_id, rec.trip_flag)
            if key in seen:
                dropped_dup += 1
                continue
            seen.add(key)
            records.append(rec)
    collection = TrajectoryCollection.from_records(dataset_tag, records, table)
    return IngestResult(collection, table, dropped_window, dropped_dup)


def write_records_csv(collection: TrajectoryCollection, path: str | Path) -> None:
    """Canonical writer: users sorted by id, records in canonical order.

    Re-ingesting the output reproduces the identical collection.
    """
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(RECORDS_HEADER)
        ids = collection.table.ids
        for traj in collection:
            for t, l, fl in zip(traj.ts, traj.loc, traj.flag):
                w.writerow([traj.user_id, int(t), ids[int(l)],
                            FLAG_TO_SYMBOL[TripFlag(int(fl))]])


def write_locations_csv(ids: Sequence[str], lonlat: np.ndarray,
                        path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(LOCATIONS_HEADER)
        for loc_id, (lon, lat) in zip(ids, lonlat):
            w.writerow([loc_id, f"{lon:.12g}", f"{lat:.12g}"])
