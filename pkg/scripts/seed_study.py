"""Repeat the dephasing and oscillation runs over several master seeds to show
the seed-to-seed spread of the fitted rates, the endpoint and the Bloch RMS.

    python3 scripts/seed_study.py --seeds 1 2 3 [--n 400]
"""

import argparse
from dataclasses import replace

from squidnoise import experiments
from squidnoise.config import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--n", type=int, default=None, help="realizations per run")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    base = load_config()
    print(f"{'seed':>10} {'D_fit/D_pred-1':>15} {'endpoint':>9} {'omega dev':>10} {'gamma dev':>10} {'RMS':>7}")
    for seed in args.seeds:
        ens = replace(base.ensemble, master_seed=seed, n_realizations=args.n or base.ensemble.n_realizations)
        cfg = replace(base, ensemble=ens)
        s2 = experiments.prepare(cfg, initial_state="E1")
        _, r2 = experiments.dephasing_report(s2, experiments.run(s2, args.workers))
        s3 = experiments.prepare(cfg, initial_state="L")
        _, r3 = experiments.oscillation_report(s3, experiments.run(s3, args.workers))
        print(
            f"{seed:>10} {r2['relative_deviation']:>+15.3f} {r2['endpoint_rho11_minus_half']:>+9.4f} "
            f"{r3['omega_relative_deviation']:>+10.3f} {r3['gamma_relative_deviation']:>+10.3f} {r3['bloch_rms']:>7.4f}"
        )


if __name__ == "__main__":
    main()
