import numpy as np
import pytest

from trace_matcher.geometry import build_compatibility, build_voronoi
from trace_matcher.matcher import MatchParams
from trace_matcher.synth import SynthConfig, generate


@pytest.fixture(scope="session")
def small_city():
    """Compact seeded city used across matcher/stats tests."""
    cfg = SynthConfig(n_stops=40, n_antennas=25, area=5000.0, n_paired=30,
                      n_unpaired_t=10, n_unpaired_c=10, days=7, seed=7,
                      trips_per_day=(2.0, 2.0), records_per_day_c=(6.0, 6.0),
                      colocate_prob=0.9)
    return generate(cfg)


def params_for(city, d_w=500.0, tau_w=600, d_t=2000.0, tau_t=300,
               clip_margin=5000.0):
    cells = build_voronoi(city.antennas.coords, city.antennas.ids,
                          clip_margin=clip_margin,
                          extra_points=city.stops.coords)
    compat_w = build_compatibility(city.stops, cells, d_w)
    compat_t = build_compatibility(city.stops, cells, d_t)
    return MatchParams(compat_w=compat_w, compat_t=compat_t,
                       d_w=d_w, tau_w=tau_w, d_t=d_t, tau_t=tau_t)


@pytest.fixture(scope="session")
def small_city_params(small_city):
    return params_for(small_city)


def random_tables(rng, n_stops, n_antennas, area=6000.0):
    """Random planar stop/antenna tables for geometry tests."""
    from trace_matcher.records import LocationTable
    stops = LocationTable("T", [f"s{i}" for i in range(n_stops)],
                          rng.uniform(0, area, size=(n_stops, 2)), (0.0, 0.0))
    ants = LocationTable("C", [f"a{i}" for i in range(n_antennas)],
                         rng.uniform(0, area, size=(n_antennas, 2)), (0.0, 0.0))
    return stops, ants
