"""Scan the mass mu for the smallest value giving a well-isolated qubit
doublet with splitting in a target window.

    python3 scripts/calibrate.py --vx-low 0.01 --vx-high 0.05
"""

import argparse

from squidnoise.config import load_config
from squidnoise.spectrum import calibrate_mu


def main():
    cfg = load_config()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--beta", type=float, default=cfg.hamiltonian.beta)
    ap.add_argument("--v0", type=float, default=cfg.hamiltonian.v0)
    ap.add_argument("--isolation-min", type=float, default=20.0)
    ap.add_argument("--vx-low", type=float, default=cfg.vx_range[0])
    ap.add_argument("--vx-high", type=float, default=cfg.vx_range[1])
    ap.add_argument("--n-basis", type=int, default=cfg.n_basis)
    args = ap.parse_args()

    scan = calibrate_mu(args.beta, args.v0, args.isolation_min, (args.vx_low, args.vx_high), n_basis=args.n_basis)
    print(f"{'mu':>10} {'V_x':>12} {'isolation':>10}")
    for row in scan.table:
        if row["mu"] == scan.mu:
            print(f"{row['mu']:10.4f} {row['v_x']:12.6g} {row['isolation']:10.2f}  <- selected")
    print(f"mu = {scan.mu}")


if __name__ == "__main__":
    main()
