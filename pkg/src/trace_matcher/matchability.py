"""Expected matching success: matchability parameter, p_x, fit, extrapolation.

For a transport user with activity bin r1 and true match count m*, the
matchability parameter gamma(m* | r1) is the probability that none of the
n_C competing communication users randomly achieves m* or more spatial
matches: (1 - sum_{m' >= m*} P_s(m' | r1)) ** n_C. Ties count as failure.
The expected success probability p_x(r1, r2) is the expectation of gamma
under the temporal match distribution P_t(. | r1, r2).

Across group pairs, p_x collapses onto a single curve in the expected
number of temporal matches m_bar; the curve is fitted as a logit-linear
model in log(m_bar) (equivalently p = 1 / (1 + A * m_bar**-b)) with a more
conservative linear branch above a crossover. Since m_bar scales linearly
with the observation window, evaluating the fitted curve at k * m_bar
extrapolates the success rate to k observation weeks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .stats import MatchCountHistogram, merge_histograms

BinPredicate = Callable[[float, float], bool]     # (bin_lo, bin_hi) -> keep?

#: Curve constants for a one-week observation baseline (validation default).
REFERENCE_FIT_PARAMS = dict(a=434.69, b=2.993,
                            linear_slope=4.66e-4, linear_intercept=0.946,
                            crossover=21.09)


def gamma(ps: MatchCountHistogram, n_c: int, m_star: int) -> float:
    """Probability that no competing user reaches m_star spatial matches."""
    if n_c < 1:
        raise ValueError("n_c must be >= 1")
    if m_star < 0:
        raise ValueError("m_star must be >= 0")
    tail = ps.tail_probability(m_star)
    if tail > 1.0 + 1e-12:
        raise ValueError(f"corrupt histogram: tail sum {tail} exceeds 1")
    tail = min(tail, 1.0)
    if tail >= 1.0:
        return 0.0
    if tail == 0.0:
        return 1.0
    if n_c <= 1000:
        return (1.0 - tail) ** n_c
    return math.exp(n_c * math.log1p(-tail))     # avoids pow at huge exponents


@dataclass
class GammaTable:
    """gamma(m* | r1) for m* = 0..m_max at a fixed competing population."""

    bin_t: int
    n_c: int
    gammas: tuple[float, ...]

    @classmethod
    def from_histogram(cls, ps: MatchCountHistogram, n_c: int,
                       m_max: int | None = None) -> "GammaTable":
        if m_max is None:
            m_max = ps.support_max()
        values = tuple(gamma(ps, n_c, m) for m in range(m_max + 1))
        return cls(ps.group[0], n_c, values)

    def value(self, m_star: int) -> float:
        # beyond the histogram support the tail is empty, so gamma is exactly 1
        if m_star >= len(self.gammas):
            return 1.0
        return self.gammas[m_star]


def p_x(pt: MatchCountHistogram, ps: MatchCountHistogram, n_c: int) -> float:
    """Expected success probability: sum_m P_t(m) * gamma(m)."""
    numerator = 0.0
    for m, count in sorted(pt.counts.items()):
        numerator += count * gamma(ps, n_c, m)
    return numerator / pt.total


def exclusion_filter(min_activity: float = 0.0,
                     max_activity: float = math.inf) -> BinPredicate:
    """Keep bins except those entirely below min or starting at/above max."""
    def keep(lo: float, hi: float) -> bool:
        return not (hi <= min_activity or lo >= max_activity)
    return keep


def range_filter(lo_min: float, hi_max: float) -> BinPredicate:
    """Keep only bins fully inside [lo_min, hi_max)."""
    def keep(lo: float, hi: float) -> bool:
        return lo >= lo_min and hi <= hi_max
    return keep


def weighted_average(px_table: Mapping[tuple[int, int], float],
                     marginal_t: Mapping[int, float],
                     marginal_c: Mapping[int, float],
                     bins, keep_t: BinPredicate | None = None,
                     keep_c: BinPredicate | None = None) -> float:
    """Average p_x with activities drawn independently from the marginals.

    Marginals may be fractions or raw user counts; they are renormalized
    over the bins that survive the predicates.
    """
    def surviving(marginal: Mapping[int, float], tag: str,
                  keep: BinPredicate | None) -> dict[int, float]:
        out = {}
        for b, w in marginal.items():
            lo, hi = bins.bin_range(b, tag)
            if w > 0 and (keep is None or keep(lo, hi)):
                out[b] = w
        return out

    wt = surviving(marginal_t, "T", keep_t)
    wc = surviving(marginal_c, "C", keep_c)
    zt, zc = sum(wt.values()), sum(wc.values())
    if zt <= 0 or zc <= 0:
        raise ValueError("all bins excluded")
    total = 0.0
    for bt, w1 in wt.items():
        for bc, w2 in wc.items():
            if (bt, bc) in px_table:
                total += (w1 / zt) * (w2 / zc) * px_table[(bt, bc)]
    return total


@dataclass
class CurveFit:
    """Two-branch success curve: power-law body with a linear tail.

    Below the crossover: p = 1 / (1 + a * m_bar**-b). At or above it:
    p = linear_slope * m_bar + linear_intercept, capped at 1. With no
    linear branch the crossover is infinite.
    """

    a: float
    b: float
    linear_slope: float = 0.0
    linear_intercept: float = 0.0
    crossover: float = math.inf

    def power_branch(self, m_bar: float) -> float:
        if m_bar <= 0:
            return 0.0
        return 1.0 / (1.0 + self.a * m_bar ** (-self.b))

    def linear_branch(self, m_bar: float) -> float:
        return self.linear_slope * m_bar + self.linear_intercept

    def evaluate(self, m_bar: float) -> float:
        if m_bar <= 0:
            return 0.0
        if m_bar < self.crossover:
            p = self.power_branch(m_bar)
        else:
            p = self.linear_branch(m_bar)
        return min(max(p, 0.0), 1.0)

    def branch_gap(self) -> float:
        if math.isinf(self.crossover):
            return 0.0
        return abs(self.power_branch(self.crossover)
                   - self.linear_branch(self.crossover))


def reference_fit() -> CurveFit:
    return CurveFit(**REFERENCE_FIT_PARAMS)


def fit_px_curve(points: Sequence[tuple[float, float]],
                 linear_tail_min: float = 21.09,
                 crossover: float | None = None,
                 eps: float = 1e-6) -> CurveFit:
    """Fit the success curve to (m_bar, p_x) points.

    The power-law body is exactly linear in logit(p) vs log(m_bar), so it is
    fitted by least squares in transformed coordinates (p clipped away from
    0 and 1). The linear tail is fitted over points with m_bar above
    `linear_tail_min` when there are at least two; the crossover is then the
    intersection of the two branches (or the given fixed value).
    """
    usable = [(m, p) for m, p in points if m > 0 and math.isfinite(m)]
    if len({m for m, _ in usable}) < 2:
        raise ValueError("need at least two distinct m_bar values")
    if len(usable) < 3:
        raise ValueError("need at least three points")
    x = np.log([m for m, _ in usable])
    p = np.clip([q for _, q in usable], eps, 1.0 - eps)
    y = np.log(p / (1.0 - p))
    b, neg_log_a = np.polyfit(x, y, 1)
    fit = CurveFit(a=float(np.exp(-neg_log_a)), b=float(b))

    tail_pts = [(m, q) for m, q in usable if m > linear_tail_min]
    if len(tail_pts) >= 2 and len({m for m, _ in tail_pts}) >= 2:
        slope, intercept = np.polyfit([m for m, _ in tail_pts],
                                      [q for _, q in tail_pts], 1)
        fit.linear_slope = float(slope)
        fit.linear_intercept = float(intercept)
        fit.crossover = (crossover if crossover is not None
                         else _branch_intersection(fit, linear_tail_min))
    elif crossover is not None:
        fit.crossover = crossover
    return fit


def _branch_intersection(fit: CurveFit, tail_min: float) -> float:
    """m_bar where the power and linear branches meet (fallback: tail_min)."""
    def diff(m: float) -> float:
        return fit.power_branch(m) - fit.linear_branch(m)

    lo, hi = tail_min / 8.0, tail_min * 8.0
    grid = np.geomspace(max(lo, 1e-9), hi, 64)
    vals = [diff(float(m)) for m in grid]
    for (m1, v1), (m2, v2) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
        if v1 == 0.0:
            return float(m1)
        if v1 * v2 < 0:
            return float(brentq(diff, float(m1), float(m2)))
    return tail_min


def extrapolate(fit: CurveFit, m_bar_one_week: Mapping[tuple[int, int], float],
                weeks: int) -> dict[tuple[int, int], tuple[float, float]]:
    """Per-group (m_bar, p_x) after `weeks` observation weeks.

    The expected number of temporal matches scales linearly with the data
    collection window, so week k evaluates the fitted curve at k * m_bar.
    """
    if weeks < 1:
        raise ValueError("weeks must be >= 1")
    out = {}
    for group, m_bar in m_bar_one_week.items():
        mk = weeks * m_bar
        out[group] = (mk, fit.evaluate(mk))
    return out


@dataclass
class RatioSeries:
    """Per-m ratio P_s(m) / P_t(m) with a power-law fit over a range."""

    ms: tuple[int, ...]
    ratios: tuple[float, ...]
    exponent: float = math.nan
    prefactor: float = math.nan
    fit_range: tuple[float, float] | None = None


def ps_pt_ratio(pt_hists: Iterable[MatchCountHistogram] | MatchCountHistogram,
                ps_hists: Iterable[MatchCountHistogram] | MatchCountHistogram,
                fit_range: tuple[float, float] | None = None) -> RatioSeries:
    """Diagnostic ratio series; collections are pooled before dividing.

    The series covers m values where P_t(m) > 0; the log-log fit uses the
    sub-range (all positive-ratio points when no range is given).
    """
    pt = (pt_hists if isinstance(pt_hists, MatchCountHistogram)
          else merge_histograms(pt_hists))
    ps = (ps_hists if isinstance(ps_hists, MatchCountHistogram)
          else merge_histograms(ps_hists))
    ms = sorted(m for m, c in pt.counts.items() if c > 0 and m > 0)
    if not ms:
        raise ValueError("P_t support is empty")
    ratios = [ps.probability(m) / pt.probability(m) for m in ms]
    series = RatioSeries(tuple(ms), tuple(ratios), fit_range=fit_range)
    fit_pts = [(m, r) for m, r in zip(ms, ratios)
               if r > 0 and (fit_range is None or fit_range[0] <= m <= fit_range[1])]
    if len(fit_pts) >= 2:
        lx = np.log([m for m, _ in fit_pts])
        ly = np.log([r for _, r in fit_pts])
        slope, intercept = np.polyfit(lx, ly, 1)
        series.exponent = float(slope)
        series.prefactor = float(np.exp(intercept))
    return series


@dataclass
class GroupMatchability:
    bin_t: int
    bin_c: int
    m_bar: float
    p_x: float


@dataclass
class WeekRow:
    weeks: int
    avg_all: float
    avg_active: float
    avg_t30_49: float
    avg_t30_49_active: float


@dataclass
class MatchabilityReport:
    """Everything the estimate stage produces."""

    n_c: int
    groups: list[GroupMatchability]
    gamma_tables: dict[int, GammaTable]
    fit: CurveFit
    week_rows: list[WeekRow]
    weighted: dict[str, float] = field(default_factory=dict)


def build_report(pt_hists: Mapping[tuple[int, int], MatchCountHistogram],
                 ps_tbin_hists: Mapping[int, MatchCountHistogram],
                 pop_t: Mapping[int, int], pop_c: Mapping[int, int],
                 bins, n_c: int, weeks: int = 4,
                 exclude_t: BinPredicate | None = None,
                 exclude_c: BinPredicate | None = None,
                 linear_tail_min: float = 21.09,
                 crossover: float | None = None) -> MatchabilityReport:
    """Assemble the matchability report from estimated distributions.

    `ps_tbin_hists` are the per-T-bin histograms aggregated over all
    communication users (the distribution behind gamma); `pop_*` are user
    counts per bin, used both as weights and to define the marginals.
    """
    groups: list[GroupMatchability] = []
    px_table: dict[tuple[int, int], float] = {}
    m_bars: dict[tuple[int, int], float] = {}
    for (bt, bc), pt in sorted(pt_hists.items()):
        ps = ps_tbin_hists.get(bt)
        if ps is None:
            continue
        value = p_x(pt, ps, n_c)
        m_bar = pt.mean()
        px_table[(bt, bc)] = value
        m_bars[(bt, bc)] = m_bar
        groups.append(GroupMatchability(bt, bc, m_bar, value))

    gamma_tables = {bt: GammaTable.from_histogram(ps, n_c)
                    for bt, ps in sorted(ps_tbin_hists.items())}

    points = [(g.m_bar, g.p_x) for g in groups if g.m_bar > 0]
    fit = fit_px_curve(points, linear_tail_min=linear_tail_min,
                       crossover=crossover)

    if exclude_t is None:
        exclude_t = exclusion_filter(10, 125)
    if exclude_c is None:
        exclude_c = exclusion_filter(20, 2000)
    t30_49 = range_filter(30, 50)

    week_rows: list[WeekRow] = []
    for k in range(1, weeks + 1):
        per_group = extrapolate(fit, m_bars, k)
        px_k = {g: p for g, (_, p) in per_group.items()}
        week_rows.append(WeekRow(
            weeks=k,
            avg_all=weighted_average(px_k, pop_t, pop_c, bins),
            avg_active=weighted_average(px_k, pop_t, pop_c, bins,
                                        exclude_t, exclude_c),
            avg_t30_49=weighted_average(px_k, pop_t, pop_c, bins, t30_49, None),
            avg_t30_49_active=weighted_average(px_k, pop_t, pop_c, bins,
                                               t30_49, exclude_c),
        ))

    weighted = {
        "avg_all": weighted_average(px_table, pop_t, pop_c, bins),
        "avg_active": weighted_average(px_table, pop_t, pop_c, bins,
                                       exclude_t, exclude_c),
    }
    return MatchabilityReport(n_c, groups, gamma_tables, fit, week_rows, weighted)
