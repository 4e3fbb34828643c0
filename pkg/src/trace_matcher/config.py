"""Flat key = value run configuration shared by all CLI subcommands."""

from __future__ import annotations

import os
from pathlib import Path

# One namespace for the whole pipeline; subcommands read the keys they need.
DEFAULTS: dict[str, str] = {
    # matching parameters (meters / seconds)
    "d_w": "500",
    "tau_w": "600",
    "d_t": "2000",
    "tau_t": "300",
    # study window, epoch seconds; empty means "no filtering"
    "window_start": "",
    "window_end": "",
    # activity bin edges
    "bins_t": "0,10,20,30,40,50,60,70,80,90,100,110,120,130",
    "bins_c": "0,20,30,50,70,100,125,150,200,250,300,400,500,700,1000,2000",
    # competing population size for the matchability estimate;
    # empty means "use the communication dataset's user count"
    "n_c": "",
    # geometry
    "clip_margin": "5000",
    # matcher
    "top_k": "5",
    # stats estimation
    "pt_samples": "100000",
    "seed": "1",
    # profiling histogram widths
    "profile_bin_t": "10",
    "profile_bin_c": "100",
    "speed_bin_kmh": "1",
    # unicity sweep defaults
    "unicity_p": "1,2,3,4,5",
    "unicity_d": "500",
    "unicity_tau": "300",
    "unicity_trials": "1000",
    # matchability / extrapolation
    "weeks": "4",
    "crossover": "",           # empty: recompute from the fitted branches
    "linear_tail_min": "21.09",
    "exclude_t_low": "10",
    "exclude_t_high": "125",
    "exclude_c_low": "20",
    "exclude_c_high": "2000",
    # synthetic city
    "synth_n_stops": "120",
    "synth_n_antennas": "60",
    "synth_area": "8000",
    "synth_n_paired": "200",
    "synth_n_unpaired_t": "100",
    "synth_n_unpaired_c": "100",
    "synth_trips_per_day": "2.0",
    "synth_records_per_day_c": "6.0",
    "synth_colocate_prob": "0.9",
    "synth_days": "7",
    "synth_anchor_jitter": "300",
    "synth_cdr_jitter": "100",
    "synth_transit_speed_kmh": "20",
}


class ConfigError(ValueError):
    pass


class Config:
    """Typed access over the flat key/value table, with defaults."""

    def __init__(self, values: dict[str, str] | None = None):
        self.values = dict(DEFAULTS)
        if values:
            self.update(values)

    def update(self, values: dict[str, str]) -> None:
        for k, v in values.items():
            if k not in DEFAULTS:
                raise ConfigError(f"unknown config key: {k}")
            self.values[k] = v

    def get(self, key: str) -> str:
        return self.values[key]

    def get_int(self, key: str) -> int:
        try:
            return int(self.values[key])
        except ValueError as e:
            raise ConfigError(f"{key}: expected integer, got {self.values[key]!r}") from e

    def get_float(self, key: str) -> float:
        try:
            return float(self.values[key])
        except ValueError as e:
            raise ConfigError(f"{key}: expected number, got {self.values[key]!r}") from e

    def get_opt_int(self, key: str) -> int | None:
        v = self.values[key].strip()
        return int(v) if v else None

    def get_opt_float(self, key: str) -> float | None:
        v = self.values[key].strip()
        return float(v) if v else None

    def get_int_list(self, key: str) -> tuple[int, ...]:
        v = self.values[key].strip()
        if not v:
            return ()
        return tuple(int(x) for x in v.split(","))

    def get_float_list(self, key: str) -> tuple[float, ...]:
        v = self.values[key].strip()
        if not v:
            return ()
        return tuple(float(x) for x in v.split(","))

    def get_range(self, key: str) -> tuple[float, float]:
        """Scalar value or 'lo:hi' range (used for synthetic per-user rates)."""
        v = self.values[key]
        if ":" in v:
            lo, hi = v.split(":", 1)
            return float(lo), float(hi)
        x = float(v)
        return x, x

    def window(self) -> tuple[int, int] | None:
        lo, hi = self.get_opt_int("window_start"), self.get_opt_int("window_end")
        if lo is None or hi is None:
            return None
        return lo, hi

    def snapshot(self) -> dict[str, str]:
        return dict(self.values)


def parse_config_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def load_config(path: str | os.PathLike | None = None,
                overrides: dict[str, str] | None = None) -> Config:
    cfg = Config()
    if path is not None:
        cfg.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
    if overrides:
        cfg.update(overrides)
    return cfg


def write_config(cfg: Config, path: str | os.PathLike) -> None:
    lines = [f"{k} = {v}" for k, v in sorted(cfg.values.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
