"""Trajectory matching across event-record datasets and matchability estimation."""

__version__ = "0.1.0"

from .records import (ActivityBins, EventRecord, LocationTable, Trajectory,
                      TrajectoryCollection, TripFlag, bin_activity, project,
                      unproject)
from .geometry import (CompatibilityMap, VoronoiCell, build_compatibility,
                       build_voronoi, circle_polygon_overlap)
from .index import SpatioTemporalIndex, build_index
from .matcher import (Classification, MatchOutcome, MatchParams, Pairing,
                      classify_pair, compare_users, count_temporal_matches,
                      match_all)
from .stats import (MatchCountHistogram, PerUserBestHistogram, estimate_ps,
                    estimate_pt, profile, unicity)
from .matchability import (CurveFit, GammaTable, MatchabilityReport,
                           extrapolate, fit_px_curve, gamma, p_x,
                           ps_pt_ratio, weighted_average)
from .synth import SynthConfig, generate, oracle_match_all

__all__ = [
    "ActivityBins", "EventRecord", "LocationTable", "Trajectory",
    "TrajectoryCollection", "TripFlag", "bin_activity", "project", "unproject",
    "CompatibilityMap", "VoronoiCell", "build_compatibility", "build_voronoi",
    "circle_polygon_overlap", "SpatioTemporalIndex", "build_index",
    "Classification", "MatchOutcome", "MatchParams", "Pairing", "classify_pair",
    "compare_users", "count_temporal_matches", "match_all",
    "MatchCountHistogram", "PerUserBestHistogram", "estimate_ps", "estimate_pt",
    "profile", "unicity", "CurveFit", "GammaTable", "MatchabilityReport",
    "extrapolate", "fit_px_curve", "gamma", "p_x", "ps_pt_ratio",
    "weighted_average", "SynthConfig", "generate", "oracle_match_all",
]
