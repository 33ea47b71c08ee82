"""Overlapping fixed-width windows over a run and per-window aggregates.

Window membership is half-open [start, end) so boundary samples are
never double counted across tiled windows. Windows with too few member
samples aggregate to None (insufficient data is a value, not an error).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import stats
from .errors import InvalidSpecError, RunTooShortError, SplitOutOfRangeError
from .ingest import LatencySample, Run, SchedulerSnapshot

log = logging.getLogger(__name__)

# Tolerance used when a duration is an exact multiple of the stride, so
# float dust cannot drop the last window.
_GRID_EPS = 1e-9


@dataclass(frozen=True)
class WindowSpec:
    width_s: float = 10.0
    stride_s: float = 5.0
    min_latency_samples: int = 5
    min_sched_samples: int = 1

    def __post_init__(self):
        if self.width_s <= 0 or self.stride_s <= 0:
            raise InvalidSpecError("window width and stride must be positive")
        if self.stride_s > self.width_s:
            raise InvalidSpecError(
                f"stride {self.stride_s} exceeds width {self.width_s}")
        if self.min_latency_samples < 1 or self.min_sched_samples < 1:
            raise InvalidSpecError("minimum sample counts must be >= 1")


@dataclass(frozen=True)
class LatencyWindow:
    start_s: float
    end_s: float
    n: int
    p95_ms: float
    median_ms: float
    exceed_100ms: float


@dataclass(frozen=True)
class SchedWindow:
    start_s: float
    end_s: float
    n: int
    bler_mean: float
    bler_p95: float
    mcs_median: float | None
    snr_median_db: float | None


@dataclass(frozen=True)
class JoinedWindow:
    start_s: float
    latency: LatencyWindow
    sched: SchedWindow


def make_windows(run_duration_s: float, spec: WindowSpec) -> list[tuple[float, float]]:
    """Window grid over [0, run_duration_s]: starts at multiples of the
    stride, only fully contained windows, count floor((T-w)/s)+1."""
    if run_duration_s < spec.width_s:
        raise RunTooShortError(
            f"run of {run_duration_s}s shorter than window width {spec.width_s}s")
    count = math.floor((run_duration_s - spec.width_s) / spec.stride_s + _GRID_EPS) + 1
    return [(k * spec.stride_s, k * spec.stride_s + spec.width_s)
            for k in range(count)]


def _member_slice(times: np.ndarray, start: float, end: float) -> slice:
    lo = int(np.searchsorted(times, start, side="left"))
    hi = int(np.searchsorted(times, end, side="left"))
    return slice(lo, hi)


def _lat_aggregate(members: Sequence[LatencySample], start: float, end: float,
                   spec: WindowSpec) -> LatencyWindow | None:
    if len(members) < spec.min_latency_samples:
        return None
    rtts = [s.rtt_ms for s in members]
    return LatencyWindow(
        start_s=start, end_s=end, n=len(members),
        p95_ms=stats.percentile(rtts, 0.95),
        median_ms=stats.percentile(rtts, 0.5),
        exceed_100ms=stats.exceedance_prob(rtts, stats.EXCEED_FAST_MS))


def _sched_aggregate(members: Sequence[SchedulerSnapshot], start: float, end: float,
                     spec: WindowSpec) -> SchedWindow | None:
    if len(members) < spec.min_sched_samples:
        return None
    blers = [s.dl_bler for s in members]
    mcs = [s.dl_mcs for s in members if s.dl_mcs is not None]
    snr = [s.snr_db for s in members if s.snr_db is not None]
    return SchedWindow(
        start_s=start, end_s=end, n=len(members),
        bler_mean=float(np.mean(blers)),
        bler_p95=stats.percentile(blers, 0.95),
        mcs_median=stats.percentile(mcs, 0.5) if mcs else None,
        snr_median_db=stats.percentile(snr, 0.5) if snr else None)


def aggregate_latency_window(samples: Sequence[LatencySample],
                             window: tuple[float, float],
                             spec: WindowSpec) -> LatencyWindow | None:
    """Aggregate of samples with t_s in [start, end); None if fewer than
    spec.min_latency_samples fall inside. `samples` must be time-sorted."""
    start, end = window
    times = np.array([s.t_s for s in samples], dtype=float)
    return _lat_aggregate(samples[_member_slice(times, start, end)],
                          start, end, spec)


def aggregate_sched_window(snapshots: Sequence[SchedulerSnapshot],
                           window: tuple[float, float],
                           spec: WindowSpec) -> SchedWindow | None:
    """Scheduler-side aggregate over [start, end); mcs/snr medians are
    taken over the snapshots where the field is present, None if it is
    absent everywhere in the window."""
    start, end = window
    times = np.array([s.t_s for s in snapshots], dtype=float)
    return _sched_aggregate(snapshots[_member_slice(times, start, end)],
                            start, end, spec)


def build_latency_windows(samples: Sequence[LatencySample],
                          run_duration_s: float,
                          spec: WindowSpec) -> list[LatencyWindow]:
    grid = make_windows(run_duration_s, spec)
    ordered = sorted(samples, key=lambda s: s.t_s)
    times = np.array([s.t_s for s in ordered], dtype=float)
    out = [_lat_aggregate(ordered[_member_slice(times, start, end)],
                          start, end, spec) for start, end in grid]
    return [w for w in out if w is not None]


def build_sched_windows(snapshots: Sequence[SchedulerSnapshot],
                        run_duration_s: float,
                        spec: WindowSpec) -> list[SchedWindow]:
    grid = make_windows(run_duration_s, spec)
    ordered = sorted(snapshots, key=lambda s: s.t_s)
    times = np.array([s.t_s for s in ordered], dtype=float)
    out = [_sched_aggregate(ordered[_member_slice(times, start, end)],
                            start, end, spec) for start, end in grid]
    return [w for w in out if w is not None]


def join_windows(latency_windows: Sequence[LatencyWindow],
                 sched_windows: Sequence[SchedWindow]) -> list[JoinedWindow]:
    """Inner join on start_s; both sides come from the same grid, so
    equality is exact. Windows missing on either side are dropped."""
    by_start = {w.start_s: w for w in sched_windows}
    joined = [JoinedWindow(start_s=lw.start_s, latency=lw, sched=by_start[lw.start_s])
              for lw in latency_windows if lw.start_s in by_start]
    return sorted(joined, key=lambda j: j.start_s)


def build_joined_windows(run: Run, spec: WindowSpec) -> list[JoinedWindow]:
    duration = run_duration(run)
    lat = build_latency_windows(run.latency, duration, spec)
    sched = build_sched_windows(run.scheduler, duration, spec)
    return join_windows(lat, sched)


def run_duration(run: Run) -> float:
    """Effective duration: the nominal duration or the last observed
    sample time, whichever is later."""
    last = run.meta.nominal_duration_s
    if run.latency:
        last = max(last, run.latency[-1].t_s)
    if run.scheduler:
        last = max(last, run.scheduler[-1].t_s)
    return last


def split_phases(run: Run, split_s: float | None = None,
                 labels: tuple[str, str] = ("LOS", "People")) -> tuple[Run, Run]:
    """Partition a run at split_s (default: half the nominal duration)
    into two phase-labeled subruns: t_s < split vs t_s >= split."""
    if split_s is None:
        split_s = run.meta.nominal_duration_s / 2.0
    if not 0.0 < split_s < run_duration(run):
        raise SplitOutOfRangeError(
            f"split at {split_s}s outside (0, {run_duration(run)}s)")
    lat_a = tuple(s for s in run.latency if s.t_s < split_s)
    lat_b = tuple(s for s in run.latency if s.t_s >= split_s)
    sched_a = tuple(s for s in run.scheduler if s.t_s < split_s)
    sched_b = tuple(s for s in run.scheduler if s.t_s >= split_s)
    for label, lat in ((labels[0], lat_a), (labels[1], lat_b)):
        if not lat:
            log.warning("phase %r of run %s has no latency samples",
                        label, run.meta.run_id)
    meta_a = replace(run.meta, phase=labels[0])
    meta_b = replace(run.meta, phase=labels[1])
    return (Run(meta=meta_a, latency=lat_a, scheduler=sched_a),
            Run(meta=meta_b, latency=lat_b, scheduler=sched_b))
