"""Canonical on-disk formats: latency/scheduler CSVs, run manifests,
ground-truth sidecars.

Floats are written with repr (shortest round-trip form) so that
write -> read -> write is byte-identical and no precision is lost.
All files are UTF-8 with LF line endings and are written atomically
(temp file in the target directory, then rename).
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyTraceError, MissingColumnError
from .ingest import LatencySample, RunMetadata, SchedulerSnapshot

LATENCY_HEADER = "t_s,seq,rtt_ms"
SCHED_HEADER = "t_s,rnti,dl_bler,ul_bler,dl_mcs,ul_mcs,snr_db,rsrp_dbm,dl_retx,dl_total"
TRUTH_HEADER = "kind,t_s"

# Manifest keys serialized for every run, in emission order.
_MANIFEST_META_KEYS = ("run_id", "ue_type", "distance_m", "packet_size_b",
                       "scenario", "ping_interval_s", "nominal_duration_s")


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write text to path via a temp file and rename, so readers never
    observe a partially written file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _num(x: float | int | None) -> str:
    return "" if x is None else repr(x) if isinstance(x, float) else str(x)


def write_latency_csv(path: str | Path, samples: Iterable[LatencySample]) -> None:
    lines = [LATENCY_HEADER]
    lines.extend(f"{s.t_s!r},{s.seq},{s.rtt_ms!r}" for s in samples)
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_latency_csv(path: str | Path) -> list[LatencySample]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != LATENCY_HEADER:
            raise MissingColumnError(
                f"{path}: expected header {LATENCY_HEADER!r}, got {header!r}")
        samples = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            t_s, seq, rtt = line.split(",")
            samples.append(LatencySample(t_s=float(t_s), seq=int(seq), rtt_ms=float(rtt)))
    if not samples:
        raise EmptyTraceError(f"{path}: no latency rows")
    return samples


def write_scheduler_csv(path: str | Path, snapshots: Iterable[SchedulerSnapshot]) -> None:
    lines = [SCHED_HEADER]
    for s in snapshots:
        lines.append(",".join([
            repr(s.t_s), str(s.rnti), repr(s.dl_bler), _num(s.ul_bler),
            _num(s.dl_mcs), _num(s.ul_mcs), _num(s.snr_db), _num(s.rsrp_dbm),
            _num(s.dl_retx), _num(s.dl_total),
        ]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_scheduler_csv(path: str | Path) -> list[SchedulerSnapshot]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != SCHED_HEADER:
            raise MissingColumnError(
                f"{path}: expected header {SCHED_HEADER!r}, got {header!r}")
        snapshots = []
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            c = line.split(",")
            snapshots.append(SchedulerSnapshot(
                t_s=float(c[0]), rnti=int(c[1]), dl_bler=float(c[2]),
                ul_bler=float(c[3]) if c[3] else None,
                dl_mcs=int(c[4]) if c[4] else None,
                ul_mcs=int(c[5]) if c[5] else None,
                snr_db=float(c[6]) if c[6] else None,
                rsrp_dbm=float(c[7]) if c[7] else None,
                dl_retx=int(c[8]) if c[8] else None,
                dl_total=int(c[9]) if c[9] else None,
            ))
    if not snapshots:
        raise EmptyTraceError(f"{path}: no scheduler rows")
    return snapshots


def write_truth_csv(path: str | Path, stall_times_s: Iterable[float],
                    excursion_times_s: Iterable[float]) -> None:
    lines = [TRUTH_HEADER]
    lines.extend(f"stall,{t!r}" for t in sorted(stall_times_s))
    lines.extend(f"excursion,{t!r}" for t in sorted(excursion_times_s))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_truth_csv(path: str | Path) -> tuple[list[float], list[float]]:
    """Returns (stall times, excursion times), each sorted ascending."""
    stalls: list[float] = []
    excursions: list[float] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TRUTH_HEADER:
            raise MissingColumnError(
                f"{path}: expected header {TRUTH_HEADER!r}, got {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            kind, t = line.split(",")
            if kind == "stall":
                stalls.append(float(t))
            elif kind == "excursion":
                excursions.append(float(t))
            else:
                raise ValueError(f"{path}: unknown truth kind {kind!r}")
    return sorted(stalls), sorted(excursions)


def write_manifest(path: str | Path, meta: RunMetadata,
                   files: dict[str, str]) -> None:
    """One key=value line per field; file paths are stored as given
    (pass paths relative to the manifest's directory for portability)."""
    lines = []
    for key in _MANIFEST_META_KEYS:
        value = getattr(meta, key)
        lines.append(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}")
    for key in sorted(files):
        lines.append(f"{key}={files[key]}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_manifest(path: str | Path) -> tuple[RunMetadata, dict[str, str]]:
    """Returns the run metadata and a dict of the remaining entries
    (file paths, resolved against the manifest's directory)."""
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
    missing = [k for k in _MANIFEST_META_KEYS if k not in entries]
    if missing:
        raise MissingColumnError(f"{path}: manifest missing keys {missing}")
    meta = RunMetadata(
        run_id=entries.pop("run_id"),
        ue_type=entries.pop("ue_type"),
        distance_m=float(entries.pop("distance_m")),
        packet_size_b=int(entries.pop("packet_size_b")),
        scenario=entries.pop("scenario"),
        nominal_duration_s=float(entries.pop("nominal_duration_s")),
        ping_interval_s=float(entries.pop("ping_interval_s")),
    )
    base = Path(path).parent
    for key, value in entries.items():
        if key.endswith("_file"):
            entries[key] = str(base / value) if not os.path.isabs(value) else value
    return meta, entries
