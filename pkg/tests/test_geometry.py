import numpy as np
import pytest
from shapely.geometry import Point, Polygon

from conftest import random_tables
from trace_matcher.geometry import (build_compatibility, build_voronoi,
                                    circle_polygon_overlap, clip_rect_for,
                                    compatibility_content_hash,
                                    point_polygon_distance, polygon_area,
                                    read_compatibility_csv,
                                    write_compatibility_csv)
from trace_matcher.records import LocationTable


def shapely_distance(point, polygon):
    return Polygon(polygon.tolist()).distance(Point(point))


def test_single_site_cell_is_clip_rectangle():
    sites = np.array([[100.0, 200.0]])
    cells = build_voronoi(sites, ["a"], clip_margin=1000.0)
    rect = clip_rect_for(sites, 1000.0)
    assert len(cells) == 1
    assert abs(polygon_area(cells[0].polygon) - rect.area) < 1e-6
    xs, ys = cells[0].polygon[:, 0], cells[0].polygon[:, 1]
    assert {round(v, 6) for v in xs} == {rect.x_min, rect.x_max}
    assert {round(v, 6) for v in ys} == {rect.y_min, rect.y_max}


def test_two_sites_split_by_perpendicular_bisector():
    sites = np.array([[0.0, 0.0], [1000.0, 0.0]])
    cells = build_voronoi(sites, ["a", "b"], clip_margin=2000.0)
    # every vertex of each cell is weakly on its own site's side of x = 500
    assert cells[0].polygon[:, 0].max() <= 500.0 + 1e-9
    assert cells[1].polygon[:, 0].min() >= 500.0 - 1e-9
    rect = clip_rect_for(sites, 2000.0)
    total = sum(polygon_area(c.polygon) for c in cells)
    assert abs(total - rect.area) / rect.area < 1e-9


def test_voronoi_cells_match_nearest_site_oracle():
    rng = np.random.default_rng(42)
    sites = rng.uniform(0, 10_000, size=(50, 2))
    cells = build_voronoi(sites, clip_margin=5000.0)
    rect = clip_rect_for(sites, 5000.0)
    pts = np.column_stack([rng.uniform(rect.x_min, rect.x_max, 10_000),
                           rng.uniform(rect.y_min, rect.y_max, 10_000)])
    nearest = np.argmin(((pts[:, None, :] - sites[None, :, :]) ** 2).sum(-1), axis=1)
    for p, owner in zip(pts, nearest):
        d_owner = point_polygon_distance(p, cells[owner].polygon)
        assert d_owner < 1e-6


def test_voronoi_areas_tile_clip_rectangle():
    rng = np.random.default_rng(3)
    for trial in range(5):
        sites = rng.uniform(0, 8000, size=(rng.integers(2, 60), 2))
        cells = build_voronoi(sites, clip_margin=5000.0)
        rect = clip_rect_for(sites, 5000.0)
        total = sum(polygon_area(c.polygon) for c in cells)
        assert abs(total - rect.area) / rect.area < 1e-6


def test_duplicate_sites_share_one_cell():
    sites = np.array([[0.0, 0.0], [0.0, 0.0], [1000.0, 0.0]])
    cells = build_voronoi(sites, ["a", "b", "c"], clip_margin=1000.0)
    assert cells[0].polygon is cells[1].polygon
    total = polygon_area(cells[0].polygon) + polygon_area(cells[2].polygon)
    rect = clip_rect_for(sites, 1000.0)
    assert abs(total - rect.area) / rect.area < 1e-9


def test_build_voronoi_rejects_empty_and_bad_margin():
    with pytest.raises(ValueError):
        build_voronoi(np.empty((0, 2)))
    with pytest.raises(ValueError):
        build_voronoi(np.array([[0.0, 0.0]]), clip_margin=0.0)


def test_circle_overlap_center_inside():
    square = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]])
    assert circle_polygon_overlap((5.0, 5.0), 0.001, square)


def test_circle_overlap_far_polygon():
    square = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]])
    assert not circle_polygon_overlap((1000.0, 1000.0), 50.0, square)


def test_circle_overlap_edge_within_d_all_vertices_outside():
    # long thin rectangle passing near the center: vertices > d away,
    # nearest edge within d
    poly = np.array([[-1000.0, 30.0], [1000.0, 30.0],
                     [1000.0, 60.0], [-1000.0, 60.0]])
    center, d = (0.0, 0.0), 50.0
    assert all(np.hypot(x, y) > d for x, y in poly)
    assert circle_polygon_overlap(center, d, poly)
    # Monte-Carlo oracle: some sampled polygon point falls inside the circle
    rng = np.random.default_rng(0)
    xs = rng.uniform(-1000, 1000, 200_000)
    ys = rng.uniform(30, 60, 200_000)
    assert (np.hypot(xs, ys) <= d).any()


def test_point_polygon_distance_matches_shapely():
    rng = np.random.default_rng(11)
    for _ in range(200):
        sites = rng.uniform(0, 5000, size=(8, 2))
        cells = build_voronoi(sites, clip_margin=2000.0)
        p = rng.uniform(-2000, 7000, size=2)
        cell = cells[rng.integers(len(cells))]
        ours = point_polygon_distance(p, cell.polygon)
        theirs = shapely_distance(p, cell.polygon)
        assert abs(ours - theirs) < 1e-6


def test_compatibility_colocated_pair_present():
    stops = LocationTable("T", ["s"], np.array([[500.0, 500.0]]), (0.0, 0.0))
    ants = LocationTable("C", ["a"], np.array([[500.0, 500.0]]), (0.0, 0.0))
    cells = build_voronoi(ants.coords, ants.ids, clip_margin=1000.0,
                          extra_points=stops.coords)
    for d in (1.0, 500.0, 2000.0):
        cmap = build_compatibility(stops, cells, d)
        assert cmap.contains("s", "a")


def test_compatibility_remote_stop_has_no_antennas():
    rng = np.random.default_rng(5)
    ants = LocationTable("C", [f"a{i}" for i in range(20)],
                         rng.uniform(0, 1000, size=(20, 2)), (0.0, 0.0))
    stops = LocationTable("T", ["far"], np.array([[11_000.0, 11_000.0]]),
                          (0.0, 0.0))
    # margin below the stop distance so cells stay compact around the antennas
    cells = build_voronoi(ants.coords, ants.ids, clip_margin=3000.0)
    cmap = build_compatibility(stops, cells, 500.0)
    assert cmap.n_pairs() == 0


def test_compatibility_matches_exhaustive_shapely_oracle():
    rng = np.random.default_rng(21)
    stops, ants = random_tables(rng, 20, 30)
    cells = build_voronoi(ants.coords, ants.ids, clip_margin=5000.0,
                          extra_points=stops.coords)
    for d in (500.0, 2000.0):
        cmap = build_compatibility(stops, cells, d)
        expected = set()
        for s_id, s_xy in zip(stops.ids, stops.coords):
            for cell in cells:
                if shapely_distance(s_xy, cell.polygon) <= d:
                    expected.add((s_id, cell.antenna_id))
        assert cmap.pairs == expected


def test_compatibility_monotone_in_radius():
    rng = np.random.default_rng(9)
    stops, ants = random_tables(rng, 25, 25)
    cells = build_voronoi(ants.coords, ants.ids, clip_margin=5000.0,
                          extra_points=stops.coords)
    small = build_compatibility(stops, cells, 500.0)
    big = build_compatibility(stops, cells, 2000.0)
    assert small.is_subset_of(big)
    assert small.pairs <= big.pairs


def test_antenna_within_d_of_stop_is_compatible():
    rng = np.random.default_rng(17)
    stops, ants = random_tables(rng, 30, 40)
    cells = build_voronoi(ants.coords, ants.ids, clip_margin=5000.0,
                          extra_points=stops.coords)
    d = 800.0
    cmap = build_compatibility(stops, cells, d)
    for si, s_xy in enumerate(stops.coords):
        for ai, a_xy in enumerate(ants.coords):
            if np.hypot(*(s_xy - a_xy)) <= d:
                assert cmap.contains_idx(si, ai)


def test_compatibility_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    stops, ants = random_tables(rng, 10, 12)
    cells = build_voronoi(ants.coords, ants.ids, clip_margin=5000.0,
                          extra_points=stops.coords)
    cmap = build_compatibility(stops, cells, 500.0)
    h = compatibility_content_hash(stops, ants, 500.0, 5000.0)
    path = tmp_path / "compat.csv"
    write_compatibility_csv(cmap, path, h)
    loaded, stored = read_compatibility_csv(path, stops, ants)
    assert stored == h
    assert loaded.d == cmap.d
    assert loaded.pairs == cmap.pairs


def test_compatibility_deterministic():
    rng = np.random.default_rng(33)
    stops, ants = random_tables(rng, 15, 15)
    cells = build_voronoi(ants.coords, ants.ids, clip_margin=5000.0,
                          extra_points=stops.coords)
    a = build_compatibility(stops, cells, 700.0)
    b = build_compatibility(stops, cells, 700.0)
    assert a.pairs == b.pairs
