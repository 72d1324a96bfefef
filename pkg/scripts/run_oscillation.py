"""Ensemble started in the left well: damped coherent tunneling of P_z,
compared against the Bloch model with the predicted D.

    python3 scripts/run_oscillation.py [--config cfg.json] [--workers N] [--out DIR]
"""

import argparse
from pathlib import Path

import numpy as np

from squidnoise import experiments
from squidnoise.analysis import render_report
from squidnoise.cli import write_csv, write_json
from squidnoise.config import load_config
from squidnoise.ensemble import CSV_COLUMNS


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="runs/oscillation")
    args = ap.parse_args()

    setup = experiments.prepare(load_config(args.config), initial_state="L")
    trace = experiments.run(setup, workers=args.workers)
    _, report = experiments.oscillation_report(setup, trace)
    bloch = experiments.bloch_reference(setup, trace.times)

    out = Path(args.out)
    write_csv(out / "ensemble.csv", CSV_COLUMNS, trace.rows())
    write_json(out / "ensemble.json", experiments.sidecar(setup, trace))
    write_json(out / "report.json", report)
    write_csv(
        out / "overlay.csv",
        ("time", "p_z_sim", "p_z_bloch"),
        zip(trace.times, trace.p_vec[:, 2], bloch[:, 2]),
    )
    print(render_report(report))
    print(f"RMS(P_z - Bloch) = {report['bloch_rms']:.4f}, max |P_z - Bloch| = {np.abs(trace.p_vec[:, 2] - bloch[:, 2]).max():.4f}")


if __name__ == "__main__":
    main()
