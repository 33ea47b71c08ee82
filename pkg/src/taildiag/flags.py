"""Per-window degradation flags and cross-layer coupling summaries.

A window is flagged when latency-tail evidence (window p95 above a
threshold) and scheduler evidence (window BLER mean above a threshold)
co-occur; the AND rule is the default, OR exists for exploration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import stats
from .errors import EmptyPhaseError, EmptySequenceError, InvalidSpecError
from .ingest import Run
from .windows import JoinedWindow, split_phases

COMBINE_AND = "AND"
COMBINE_OR = "OR"


@dataclass(frozen=True)
class FlagPolicy:
    lat_p95_threshold_ms: float = 100.0
    bler_mean_threshold: float = 0.10
    combine: str = COMBINE_AND

    def __post_init__(self):
        if self.lat_p95_threshold_ms <= 0:
            raise InvalidSpecError("latency threshold must be positive")
        if not 0.0 < self.bler_mean_threshold < 1.0:
            raise InvalidSpecError("BLER threshold must lie in (0, 1)")
        if self.combine not in (COMBINE_AND, COMBINE_OR):
            raise InvalidSpecError(f"combine must be AND or OR, got {self.combine!r}")


@dataclass(frozen=True)
class DegradationFlag:
    start_s: float
    raised: bool
    lat_evidence: bool
    sched_evidence: bool
    lat_p95_ms: float
    bler_mean: float


@dataclass(frozen=True)
class PhaseComparison:
    phase_label: str
    lat_p95_ms: float
    exceed_100ms: float
    bler_p95: float | None


@dataclass(frozen=True)
class CouplingReport:
    rho_bler: float | None
    rho_mcs: float | None
    n_windows: int


def evaluate_flag(w: JoinedWindow, policy: FlagPolicy) -> DegradationFlag:
    """Evidence uses strict > on window p95 latency and mean BLER."""
    lat_evidence = w.latency.p95_ms > policy.lat_p95_threshold_ms
    sched_evidence = w.sched.bler_mean > policy.bler_mean_threshold
    if policy.combine == COMBINE_AND:
        raised = lat_evidence and sched_evidence
    else:
        raised = lat_evidence or sched_evidence
    return DegradationFlag(
        start_s=w.start_s, raised=raised,
        lat_evidence=lat_evidence, sched_evidence=sched_evidence,
        lat_p95_ms=w.latency.p95_ms, bler_mean=w.sched.bler_mean)


def evaluate_flags(joined: Sequence[JoinedWindow],
                   policy: FlagPolicy) -> list[DegradationFlag]:
    return [evaluate_flag(w, policy) for w in joined]


def flag_rate(flags: Sequence[DegradationFlag]) -> float:
    if not flags:
        raise EmptySequenceError("flag rate of an empty timeline")
    return sum(1 for f in flags if f.raised) / len(flags)


def compare_phases(run: Run, split_s: float | None = None,
                   labels: tuple[str, str] = ("LOS", "People"),
                   exceed_threshold_ms: float = 100.0,
                   ) -> tuple[PhaseComparison, PhaseComparison]:
    """Latency tail and raw-snapshot BLER p95 for the two phases of a
    run split at split_s (default: half the nominal duration)."""
    first, second = split_phases(run, split_s, labels=labels)
    rows = []
    for phase in (first, second):
        if not phase.latency:
            raise EmptyPhaseError(
                f"phase {phase.meta.phase!r} has no latency samples")
        rtts = [s.rtt_ms for s in phase.latency]
        blers = [s.dl_bler for s in phase.scheduler]
        rows.append(PhaseComparison(
            phase_label=phase.meta.phase,
            lat_p95_ms=stats.percentile(rtts, 0.95),
            exceed_100ms=stats.exceedance_prob(rtts, exceed_threshold_ms),
            bler_p95=stats.percentile(blers, 0.95) if blers else None))
    return rows[0], rows[1]


def coupling_report(joined: Sequence[JoinedWindow]) -> CouplingReport:
    """Spearman rho of window latency p95 against window BLER mean and
    against window MCS median. A rho is None (reported "N/A") when the
    indicator is constant, absent in some window, or there are fewer
    than two windows to rank."""
    if not joined:
        raise EmptySequenceError("coupling report over zero windows")
    n = len(joined)
    if n < 2:
        return CouplingReport(rho_bler=None, rho_mcs=None, n_windows=n)
    p95 = [w.latency.p95_ms for w in joined]
    bler = [w.sched.bler_mean for w in joined]
    mcs = [w.sched.mcs_median for w in joined]
    rho_bler = stats.spearman_rho(p95, bler)
    rho_mcs = (stats.spearman_rho(p95, mcs)
               if all(m is not None for m in mcs) else None)
    return CouplingReport(rho_bler=rho_bler, rho_mcs=rho_mcs, n_windows=n)
