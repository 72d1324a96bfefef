"""Ensemble started in the ground level E1: rho11 relaxes to 1/2 at rate D.

    python3 scripts/run_dephasing.py [--config cfg.json] [--workers N] [--out DIR]
"""

import argparse
import json
from pathlib import Path

from squidnoise import experiments
from squidnoise.analysis import render_report
from squidnoise.cli import write_csv, write_json
from squidnoise.config import load_config
from squidnoise.ensemble import CSV_COLUMNS


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="runs/dephasing")
    args = ap.parse_args()

    setup = experiments.prepare(load_config(args.config), initial_state="E1")
    trace = experiments.run(setup, workers=args.workers)
    _, report = experiments.dephasing_report(setup, trace)

    out = Path(args.out)
    write_csv(out / "ensemble.csv", CSV_COLUMNS, trace.rows())
    write_json(out / "ensemble.json", experiments.sidecar(setup, trace))
    write_json(out / "report.json", report)
    print(render_report(report))
    print(f"endpoint rho11(T) - 1/2 = {report['endpoint_rho11_minus_half']:+.4f}")
    print(json.dumps({"output": str(out)}))


if __name__ == "__main__":
    main()
