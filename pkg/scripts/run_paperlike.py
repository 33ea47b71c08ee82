#!/usr/bin/env python3
"""Generate the paperlike demo campaign and run every analysis over it.

Produces, under the chosen output directory: canonical traces plus
ground truth for four runs, then per-run summary, windows, flags and
phase tables, and the smartphone-vs-modem comparison. Rerunning is
byte-identical by construction.
"""

import argparse
import json
import sys
from pathlib import Path

from taildiag.cli import main as cli


def step(argv: list[str]) -> None:
    print(f"$ taildiag {' '.join(argv)}")
    rc = cli(argv)
    if rc != 0:
        sys.exit(rc)
    print()


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output-dir", default="paperlike_out",
                    help="campaign directory (default: ./paperlike_out)")
    ap.add_argument("--seed", type=int, default=None,
                    help="override the campaign seed")
    args = ap.parse_args()

    out = Path(args.output_dir)
    synth = ["synth", "paperlike", "--output-dir", str(out)]
    if args.seed is not None:
        synth += ["--seed", str(args.seed)]
    step(synth)

    cfg_path = out / "campaign_config.json"
    run_ids = [r["run_id"] for r in json.loads(cfg_path.read_text())["runs"]]
    cfg = ["--config", str(cfg_path), "--output-dir", str(out)]
    for run_id in run_ids:
        step(["summarize", *cfg, run_id])
    step(["compare", *cfg, "baseline", "baseline_modem"])
    for run_id in run_ids:
        step(["windows", *cfg, run_id])
        step(["flags", *cfg, run_id])
    step(["phases", *cfg, "dynamic_people"])
    print(f"all outputs under {out}/")


if __name__ == "__main__":
    main()
