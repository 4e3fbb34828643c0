"""Command-line front end: synth, ingest, precompute, match, stats, unicity,
estimate, report.

Every subcommand reads a flat key=value config (--config, overridable with
repeated --set key=value), writes flat CSV/JSON outputs into --out and
records a stage entry in the directory's manifest.json. Exit codes: 0 ok,
1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import matchability as mt
from . import stats as stats_mod
from .config import Config, ConfigError
from .geometry import (build_compatibility, build_voronoi,
                       compatibility_content_hash, read_compatibility_csv,
                       write_compatibility_csv)
from .index import build_index
from .ingest import (IngestError, ingest, joint_origin, load_location_rows,
                     load_location_table, write_records_csv)
from .manifest import RunManifest
from .matcher import MatchParams, match_all, resolve_threads
from .records import ActivityBins, LocationTable
from .stats import MatchCountHistogram, profile, unicity
from .synth import SynthConfig, generate, write_city


def _fmt(x: float) -> str:
    return f"{x:.12g}"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):          # usage errors exit 1, not 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_set(pairs: list[str]) -> dict[str, str]:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _cfg_from_args(args) -> Config:
    return config_mod.load_config(getattr(args, "config", None),
                                  _parse_set(getattr(args, "set", None)))


def _bins(cfg: Config) -> ActivityBins:
    return ActivityBins(cfg.get_int_list("bins_t"), cfg.get_int_list("bins_c"))


class _Stage:
    """Times a stage and records it in the output directory's manifest."""

    def __init__(self, name: str, out_dir: Path, cfg: Config,
                 inputs: dict[str, Path]):
        self.name = name
        self.out_dir = out_dir
        self.cfg = cfg
        self.inputs = inputs
        self.outputs: list[str] = []
        self.t0 = 0.0

    def __enter__(self):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.t0 = time.perf_counter()
        return self

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out_dir / name

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            RunManifest(self.out_dir).record_stage(
                self.name, self.cfg.snapshot(), self.inputs, self.outputs,
                time.perf_counter() - self.t0)
        return False


# --------------------------------------------------------------------------
# shared pipeline loading

def _load_tables(stops_path: Path, antennas_path: Path) -> tuple[LocationTable, LocationTable]:
    stop_ids, stop_ll = load_location_rows(stops_path)
    ant_ids, ant_ll = load_location_rows(antennas_path)
    origin = joint_origin(stop_ll, ant_ll)
    return (LocationTable.from_lonlat("T", stop_ids, stop_ll, origin),
            LocationTable.from_lonlat("C", ant_ids, ant_ll, origin))


def _compat_maps(stops: LocationTable, antennas: LocationTable, cfg: Config,
                 cache_dir: Path | None):
    """Build (or load from a valid cache) the two compatibility maps."""
    d_w, d_t = cfg.get_float("d_w"), cfg.get_float("d_t")
    margin = cfg.get_float("clip_margin")
    content = compatibility_content_hash(stops, antennas, 0.0, margin)
    maps = {}
    cells = None
    for key, d in (("compat_w", d_w), ("compat_t", d_t)):
        cached = None
        path = cache_dir / f"{key}.csv" if cache_dir else None
        want_hash = compatibility_content_hash(stops, antennas, d, margin)
        if path and path.exists():
            cmap, stored = read_compatibility_csv(path, stops, antennas)
            if stored == want_hash and cmap.d == d:
                cached = cmap
            else:
                print(f"note: stale compatibility cache {path}; regenerating",
                      file=sys.stderr)
        if cached is None:
            if cells is None:
                cells = build_voronoi(antennas.coords, antennas.ids,
                                      clip_margin=margin,
                                      extra_points=stops.coords)
            cached = build_compatibility(stops, cells, d)
            if path:
                write_compatibility_csv(cached, path, want_hash)
        maps[key] = cached
    del content
    return maps["compat_w"], maps["compat_t"]


def _match_params(stops, antennas, cfg: Config, cache_dir: Path | None) -> MatchParams:
    compat_w, compat_t = _compat_maps(stops, antennas, cfg, cache_dir)
    return MatchParams(compat_w=compat_w, compat_t=compat_t,
                       d_w=cfg.get_float("d_w"), tau_w=cfg.get_int("tau_w"),
                       d_t=cfg.get_float("d_t"), tau_t=cfg.get_int("tau_t"))


def _load_study(args, cfg: Config):
    stops, antennas = _load_tables(Path(args.stops), Path(args.antennas))
    window = cfg.window()
    res_t = ingest(args.transport, args.stops, "T", window, stops.origin)
    res_c = ingest(args.comm, args.antennas, "C", window, antennas.origin)
    cache_dir = Path(args.compat_dir) if getattr(args, "compat_dir", None) else None
    params = _match_params(stops, antennas, cfg, cache_dir)
    return stops, antennas, res_t.trajectories, res_c.trajectories, params


# --------------------------------------------------------------------------
# histogram CSV I/O (format: group_t,group_c,m,probability,pair_count)

def write_hist_csv(path: Path, hists: dict) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["group_t", "group_c", "m", "probability", "pair_count"])
        for group in sorted(hists, key=lambda g: (g if isinstance(g, tuple)
                                                  else (g, -1))):
            h = hists[group]
            bt, bc = h.group
            for m in sorted(h.counts):
                w.writerow([bt, "" if bc is None else bc, m,
                            _fmt(h.counts[m] / h.total), h.counts[m]])


def read_hist_csv(path: Path) -> dict:
    table: dict = {}
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            bt = int(row["group_t"])
            bc = int(row["group_c"]) if row["group_c"] != "" else None
            table.setdefault((bt, bc), {})[int(row["m"])] = int(row["pair_count"])
    out = {}
    for (bt, bc), counts in table.items():
        key = bt if bc is None else (bt, bc)
        out[key] = MatchCountHistogram((bt, bc), counts, sum(counts.values()))
    return out


def write_groups_csv(path: Path, pops: dict[str, dict[int, int]],
                     bins: ActivityBins) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["dataset", "bin_index", "bin_lo", "bin_hi", "label",
                    "user_count"])
        for tag in ("T", "C"):
            for b, n in sorted(pops[tag].items()):
                lo, hi = bins.bin_range(b, tag)
                w.writerow([tag, b, lo, "" if math.isinf(hi) else int(hi),
                            bins.label(b, tag), n])


def read_groups_csv(path: Path) -> dict[str, dict[int, int]]:
    pops: dict[str, dict[int, int]] = {"T": {}, "C": {}}
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            pops[row["dataset"]][int(row["bin_index"])] = int(row["user_count"])
    return pops


# --------------------------------------------------------------------------
# subcommands

def cmd_synth(args) -> int:
    cfg = _cfg_from_args(args)
    out = Path(args.out)
    with _Stage("synth", out, cfg, {}) as stage:
        result = generate(SynthConfig.from_config(cfg))
        paths = write_city(result, out)
        stage.outputs.extend(p.name for p in paths.values())
    return 0


def cmd_ingest(args) -> int:
    cfg = _cfg_from_args(args)
    out = Path(args.out)
    inputs = {"records": Path(args.records), "locations": Path(args.locations)}
    with _Stage(f"ingest_{args.tag}", out, cfg, inputs) as stage:
        res = ingest(args.records, args.locations, args.tag, cfg.window())
        write_records_csv(res.trajectories, stage.path(f"{args.tag}_records_clean.csv"))
        summary = {
            "dataset": args.tag,
            "users": res.trajectories.n_users,
            "records": res.trajectories.n_records,
            "dropped_outside_window": res.dropped_outside_window,
            "dropped_duplicates": res.dropped_duplicates,
        }
        stage.path(f"{args.tag}_ingest_summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"ingested {summary['records']} records of {summary['users']} users "
              f"(dropped {res.dropped_outside_window} outside window, "
              f"{res.dropped_duplicates} duplicates)")
    return 0


def cmd_precompute(args) -> int:
    cfg = _cfg_from_args(args)
    out = Path(args.out)
    inputs = {"stops": Path(args.stops), "antennas": Path(args.antennas)}
    with _Stage("precompute", out, cfg, inputs) as stage:
        out.mkdir(parents=True, exist_ok=True)
        stops, antennas = _load_tables(Path(args.stops), Path(args.antennas))
        compat_w, compat_t = _compat_maps(stops, antennas, cfg, out)
        stage.outputs.extend(["compat_w.csv", "compat_t.csv"])
        print(f"compat_w: {compat_w.n_pairs()} pairs at d={compat_w.d}; "
              f"compat_t: {compat_t.n_pairs()} pairs at d={compat_t.d}")
    return 0


def cmd_match(args) -> int:
    cfg = _cfg_from_args(args)
    out = Path(args.out)
    inputs = {k: Path(getattr(args, k)) for k in
              ("transport", "comm", "stops", "antennas")}
    with _Stage("match", out, cfg, inputs) as stage:
        _, _, T, C, params = _load_study(args, cfg)
        idx = build_index(C)
        top_k = args.top_k if args.top_k is not None else cfg.get_int("top_k")
        result = match_all(T, idx, params, top_k=top_k,
                           threads=resolve_threads(args.threads))
        with open(stage.path("matches.csv"), "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["t_user", "c_user", "m", "alibi_flag", "tie_flag"])
            for o in result.outcomes:
                pairing = result.pairings.get(o.t_user)
                tie = int(bool(pairing and pairing.tie and not o.is_alibi
                               and o.m == pairing.best_m))
                w.writerow([o.t_user, o.c_user, o.m, int(o.is_alibi), tie])
        with open(stage.path("pairings.csv"), "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["t_user", "best_m", "tie_flag", "best_c_users"])
            for t_user in sorted(result.pairings):
                p = result.pairings[t_user]
                w.writerow([t_user, p.best_m, int(p.tie), ";".join(p.best_users)])
        print(f"matched {T.n_users} transport users: "
              f"{len(result.pairings)} with candidates, "
              f"{result.candidates_examined} candidate records examined")
    return 0


def cmd_stats(args) -> int:
    cfg = _cfg_from_args(args)
    out = Path(args.out)
    inputs = {k: Path(getattr(args, k)) for k in
              ("transport", "comm", "stops", "antennas")}
    with _Stage("stats", out, cfg, inputs) as stage:
        _, _, T, C, params = _load_study(args, cfg)
        bins = _bins(cfg)
        threads = resolve_threads(args.threads)
        idx = build_index(C)

        pt = stats_mod.estimate_pt(T, C, bins, params,
                                   sample_pairs_per_group=cfg.get_int("pt_samples"),
                                   seed=cfg.get_int("seed"))
        full = match_all(T, idx, params, top_k=None, threads=threads)
        ps_group, ps_tbin, best = stats_mod.estimate_ps(full.outcomes, T, C, bins)

        write_hist_csv(stage.path("pt.csv"), pt)
        write_hist_csv(stage.path("ps.csv"), ps_group)
        write_hist_csv(stage.path("ps_tbin.csv"),
                       {(b, None): h for b, h in ps_tbin.items()})
        write_hist_csv(stage.path("best_match.csv"),
                       {(b, None): h for b, h in best.per_bin.items()})

        act_t = bins.bin_of_array(T.activity(), "T")
        act_c = bins.bin_of_array(C.activity(), "C")
        pops = {"T": {int(b): int((act_t == b).sum()) for b in np.unique(act_t)},
                "C": {int(b): int((act_c == b).sum()) for b in np.unique(act_c)}}
        write_groups_csv(stage.path("groups.csv"), pops, bins)

        for coll, tag in ((T, "t"), (C, "c")):
            rep = profile(coll, bins,
                          bin_width=cfg.get_int(f"profile_bin_{tag}"),
                          speed_bin_kmh=cfg.get_float("speed_bin_kmh"))
            with open(stage.path(f"records_per_user_{tag}.csv"), "w",
                      newline="", encoding="utf-8") as f:
                w = csv.writer(f)
                w.writerow(["bin_lo", "bin_width", "users"])
                for lo in sorted(rep.records_per_user):
                    w.writerow([lo, rep.records_per_user_bin_width,
                                rep.records_per_user[lo]])
            with open(stage.path(f"time_of_week_{tag}.csv"), "w",
                      newline="", encoding="utf-8") as f:
                w = csv.writer(f)
                w.writerow(["activity_bin", "slot", "count"])
                for b in sorted(rep.time_of_week):
                    for slot, count in enumerate(rep.time_of_week[b]):
                        if count:
                            w.writerow([b, slot, int(count)])
            if tag == "t":
                with open(stage.path("trip_speeds.csv"), "w", newline="",
                          encoding="utf-8") as f:
                    w = csv.writer(f)
                    w.writerow(["speed_kmh_lo", "bin_width", "trips"])
                    for lo in sorted(rep.trip_speeds_kmh):
                        w.writerow([_fmt(lo), _fmt(rep.speed_bin_kmh),
                                    rep.trip_speeds_kmh[lo]])
                stage.path("trip_diagnostics.json").write_text(
                    json.dumps(rep.diagnostics, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
        print(f"stats over {len(pt)} group pairs written to {out}")
    return 0


def cmd_unicity(args) -> int:
    cfg = _cfg_from_args(args)
    out = Path(args.out)
    inputs = {"records": Path(args.records), "locations": Path(args.locations)}
    with _Stage("unicity", out, cfg, inputs) as stage:
        res = ingest(args.records, args.locations, args.tag, cfg.window())
        dataset = res.trajectories
        idx = build_index(dataset)
        rows = []
        for d in cfg.get_float_list("unicity_d"):
            neighbors = stats_mod._location_neighbors(dataset.table, d,
                                                      dataset.dataset_tag)
            for tau in cfg.get_int_list("unicity_tau"):
                for p in cfg.get_int_list("unicity_p"):
                    r = unicity(dataset, p, d, int(tau),
                                n_trials=cfg.get_int("unicity_trials"),
                                seed=cfg.get_int("seed"),
                                neighbors=neighbors, index=idx)
                    rows.append(r)
        with open(stage.path("unicity.csv"), "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["p", "d", "tau", "unicity", "stderr", "n_trials"])
            for r in rows:
                w.writerow([r.p, _fmt(r.d), r.tau, _fmt(r.unicity),
                            _fmt(r.stderr), r.n_trials])
        print(f"unicity: {len(rows)} rows written")
    return 0


def cmd_estimate(args) -> int:
    cfg = _cfg_from_args(args)
    out = Path(args.out)
    stats_dir = Path(args.stats_dir) if args.stats_dir else out
    inputs = {"pt": stats_dir / "pt.csv", "ps_tbin": stats_dir / "ps_tbin.csv",
              "groups": stats_dir / "groups.csv"}
    with _Stage("estimate", out, cfg, inputs) as stage:
        pt = read_hist_csv(inputs["pt"])
        ps_tbin = read_hist_csv(inputs["ps_tbin"])
        pops = read_groups_csv(inputs["groups"])
        n_c = cfg.get_opt_int("n_c") or sum(pops["C"].values())
        bins = _bins(cfg)
        report = mt.build_report(
            pt, ps_tbin, pops["T"], pops["C"], bins, n_c,
            weeks=cfg.get_int("weeks"),
            exclude_t=mt.exclusion_filter(cfg.get_float("exclude_t_low"),
                                          cfg.get_float("exclude_t_high")),
            exclude_c=mt.exclusion_filter(cfg.get_float("exclude_c_low"),
                                          cfg.get_float("exclude_c_high")),
            linear_tail_min=cfg.get_float("linear_tail_min"),
            crossover=cfg.get_opt_float("crossover"))
        payload = {
            "n_c": report.n_c,
            "fit": {"a": report.fit.a, "b": report.fit.b,
                    "linear_slope": report.fit.linear_slope,
                    "linear_intercept": report.fit.linear_intercept,
                    "crossover": (None if math.isinf(report.fit.crossover)
                                  else report.fit.crossover)},
            "weighted": report.weighted,
            "groups": [{"bin_t": g.bin_t, "bin_c": g.bin_c,
                        "m_bar": g.m_bar, "p_x": g.p_x}
                       for g in report.groups],
            "gamma": {str(bt): list(t.gammas)
                      for bt, t in report.gamma_tables.items()},
        }
        stage.path("matchability.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        with open(stage.path("success_by_weeks.csv"), "w", newline="",
                  encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["weeks", "avg_all", "avg_active", "avg_t30_49",
                        "avg_t30_49_active"])
            for row in report.week_rows:
                w.writerow([row.weeks, _fmt(row.avg_all), _fmt(row.avg_active),
                            _fmt(row.avg_t30_49), _fmt(row.avg_t30_49_active)])
        print(f"estimate: {len(report.groups)} group pairs, n_c={report.n_c}, "
              f"fit a={report.fit.a:.4g} b={report.fit.b:.4g}")
    return 0


def cmd_report(args) -> int:
    cfg = _cfg_from_args(args)
    run_dir = Path(args.out)
    inputs = {"pt": run_dir / "pt.csv", "ps": run_dir / "ps.csv",
              "matchability": run_dir / "matchability.json"}
    with _Stage("report", run_dir, cfg, inputs) as stage:
        figdir = run_dir / "figures"
        figdir.mkdir(parents=True, exist_ok=True)

        def figpath(name: str) -> Path:
            stage.outputs.append(f"figures/{name}")
            return figdir / name

        # records-per-user, weekly activity, trip speeds: copied analogues
        for name in ("records_per_user_t.csv", "records_per_user_c.csv",
                     "time_of_week_t.csv", "time_of_week_c.csv",
                     "trip_speeds.csv"):
            src = run_dir / name
            if src.exists():
                figpath(f"fig_{name}").write_text(src.read_text(encoding="utf-8"),
                                                  encoding="utf-8")

        pt = read_hist_csv(run_dir / "pt.csv")
        ps = read_hist_csv(run_dir / "ps.csv")
        pooled_ps = stats_mod.merge_histograms(ps.values())
        with open(figpath("fig_match_hist.csv"), "w", newline="",
                  encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["m", "probability", "pair_count"])
            for m in sorted(pooled_ps.counts):
                w.writerow([m, _fmt(pooled_ps.probability(m)), pooled_ps.counts[m]])

        best_path = run_dir / "best_match.csv"
        if best_path.exists():
            figpath("fig_best_match.csv").write_text(
                best_path.read_text(encoding="utf-8"), encoding="utf-8")

        series = mt.ps_pt_ratio(pt.values(), ps.values())
        with open(figpath("fig_ps_pt_ratio.csv"), "w", newline="",
                  encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["m", "ratio"])
            for m, r in zip(series.ms, series.ratios):
                w.writerow([m, _fmt(r)])

        payload = json.loads((run_dir / "matchability.json").read_text(encoding="utf-8"))
        fit = mt.CurveFit(a=payload["fit"]["a"], b=payload["fit"]["b"],
                          linear_slope=payload["fit"]["linear_slope"],
                          linear_intercept=payload["fit"]["linear_intercept"],
                          crossover=(math.inf if payload["fit"]["crossover"] is None
                                     else payload["fit"]["crossover"]))
        with open(figpath("fig_px_vs_m.csv"), "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["bin_t", "bin_c", "m_bar", "p_x", "fitted_p_x"])
            for g in payload["groups"]:
                w.writerow([g["bin_t"], g["bin_c"], _fmt(g["m_bar"]),
                            _fmt(g["p_x"]), _fmt(fit.evaluate(g["m_bar"]))])

        weeks_path = run_dir / "success_by_weeks.csv"
        if weeks_path.exists():
            figpath("table_success_ratios.csv").write_text(
                weeks_path.read_text(encoding="utf-8"), encoding="utf-8")
        print(f"report: figure CSVs written to {figdir}")
    return 0


# --------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trace-matcher",
                     description="Trajectory matching across event-record "
                                 "datasets and matchability estimation")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("synth", parents=[], help="generate a synthetic city")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate and normalize a records CSV")
    _add_common(p)
    p.add_argument("--records", required=True)
    p.add_argument("--locations", required=True)
    p.add_argument("--tag", required=True, choices=["T", "C"])
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("precompute", help="build and cache compatibility maps")
    _add_common(p)
    p.add_argument("--stops", required=True)
    p.add_argument("--antennas", required=True)
    p.set_defaults(func=cmd_precompute)

    p = sub.add_parser("match", help="run the matching search")
    _add_common(p)
    p.add_argument("--transport", required=True)
    p.add_argument("--comm", required=True)
    p.add_argument("--stops", required=True)
    p.add_argument("--antennas", required=True)
    p.add_argument("--params", dest="config",
                   help="alias for --config (matching parameters)")
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--compat-dir", help="reuse cached compatibility maps")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("stats", help="estimate P_t / P_s and dataset profiles")
    _add_common(p)
    p.add_argument("--transport", required=True)
    p.add_argument("--comm", required=True)
    p.add_argument("--stops", required=True)
    p.add_argument("--antennas", required=True)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--compat-dir", help="reuse cached compatibility maps")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("unicity", help="unicity of one dataset")
    _add_common(p)
    p.add_argument("--records", required=True)
    p.add_argument("--locations", required=True)
    p.add_argument("--tag", required=True, choices=["T", "C"])
    p.set_defaults(func=cmd_unicity)

    p = sub.add_parser("estimate", help="matchability report from stats outputs")
    _add_common(p)
    p.add_argument("--stats-dir", help="directory with pt.csv/ps_tbin.csv/groups.csv "
                                       "(default: --out)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("report", help="collate stage outputs into figure CSVs")
    _add_common(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (IngestError, ConfigError, FileNotFoundError, ValueError) as e:
        print(f"trace-matcher: data error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
