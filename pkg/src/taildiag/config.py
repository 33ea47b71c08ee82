"""Declarative campaign configuration, one JSON file per campaign.

Layout:

    {
      "output_dir": "out",
      "window":  {"width_s": 10.0, "stride_s": 5.0},
      "policy":  {"lat_p95_threshold_ms": 100.0, "bler_mean_threshold": 0.10},
      "thresholds": {"exceed_ms": [100, 1000], "outlier_ms": 1000},
      "column_map": {"rnti": "rnti", "dl_bler": "dl_bler"},
      "runs": [
        {"run_id": "baseline", "ue_type": "smartphone", ...,
         "latency_file": "baseline_latency.csv",
         "scheduler_file": "baseline_sched.csv"}
      ]
    }

Every section is optional except runs (and even that may be an empty
list). Relative paths are resolved against the directory containing
the config file, so a generated campaign directory is self-contained.
Unknown keys are rejected rather than ignored; a typo in a threshold
name must not silently fall back to a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import InvalidSpecError
from .flags import FlagPolicy
from .windows import WindowSpec

DEFAULT_COLUMN_MAP = {"rnti": "rnti", "dl_bler": "dl_bler"}
DEFAULT_EXCEED_MS = (100.0, 1000.0)
DEFAULT_OUTLIER_MS = 1000.0

_PATH_KEYS = ("latency_file", "scheduler_file", "truth_file", "ping_log", "fullstats")


@dataclass(frozen=True)
class RunConfig:
    """One run: its metadata plus where its data lives. Canonical files
    take precedence over raw logs when both are given."""

    run_id: str
    ue_type: str = "other"
    distance_m: float = 0.0
    packet_size_b: int = 30
    scenario: str = "other"
    nominal_duration_s: float | None = None
    ping_interval_s: float = 0.2
    stats_period_s: float = 1.0
    sched_offset_s: float = 0.0
    latency_file: str | None = None
    scheduler_file: str | None = None
    truth_file: str | None = None
    ping_log: str | None = None
    fullstats: str | None = None
    column_map: dict | None = None


@dataclass(frozen=True)
class CampaignConfig:
    runs: tuple[RunConfig, ...] = ()
    window: WindowSpec = WindowSpec()
    policy: FlagPolicy = FlagPolicy()
    exceed_thresholds_ms: tuple[float, ...] = DEFAULT_EXCEED_MS
    outlier_ms: float = DEFAULT_OUTLIER_MS
    column_map: dict | None = None
    output_dir: str = "."

    def __post_init__(self):
        ids = [r.run_id for r in self.runs]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise InvalidSpecError(f"duplicate run_ids in config: {dupes}")
        if any(t <= 0 for t in self.exceed_thresholds_ms) or self.outlier_ms <= 0:
            raise InvalidSpecError("thresholds must be positive")

    def run(self, run_id: str) -> RunConfig:
        for r in self.runs:
            if r.run_id == run_id:
                return r
        known = [r.run_id for r in self.runs]
        raise InvalidSpecError(f"unknown run_id {run_id!r}; config has {known}")


def _build(cls, raw: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise InvalidSpecError(f"unknown keys in {where}: {sorted(unknown)}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise InvalidSpecError(f"bad {where}: {exc}") from None


def load_config(path: str | Path) -> CampaignConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidSpecError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise InvalidSpecError(f"{path}: top level must be an object")
    known_top = {"runs", "window", "policy", "thresholds", "column_map", "output_dir"}
    unknown = set(raw) - known_top
    if unknown:
        raise InvalidSpecError(f"{path}: unknown top-level keys {sorted(unknown)}")

    base = path.parent
    runs = []
    for entry in raw.get("runs", []):
        entry = dict(entry)
        for key in _PATH_KEYS:
            if entry.get(key) and not Path(entry[key]).is_absolute():
                entry[key] = str(base / entry[key])
        runs.append(_build(RunConfig, entry, f"run entry {entry.get('run_id')!r}"))

    thresholds = dict(raw.get("thresholds", {}))
    unknown = set(thresholds) - {"exceed_ms", "outlier_ms"}
    if unknown:
        raise InvalidSpecError(f"{path}: unknown threshold keys {sorted(unknown)}")
    exceed = tuple(float(x) for x in thresholds.get("exceed_ms", DEFAULT_EXCEED_MS))
    outlier = float(thresholds.get("outlier_ms", DEFAULT_OUTLIER_MS))

    out_dir = raw.get("output_dir", ".")
    if not Path(out_dir).is_absolute():
        out_dir = str(base / out_dir)

    return CampaignConfig(
        runs=tuple(runs),
        window=_build(WindowSpec, raw.get("window", {}), "window section"),
        policy=_build(FlagPolicy, raw.get("policy", {}), "policy section"),
        exceed_thresholds_ms=exceed,
        outlier_ms=outlier,
        column_map=raw.get("column_map"),
        output_dir=out_dir,
    )
