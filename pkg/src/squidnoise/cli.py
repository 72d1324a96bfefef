"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
3 acceptance tolerance not met (reproduce-* only).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, experiments
from .bloch import BlochParams, integrate_bloch, predict_D
from .config import ConfigError, load_config
from .ensemble import CSV_COLUMNS, default_workers
from .noise import NoiseParams, autocorr_integral, autocorrelation_curve, count_flips, realization_seed, telegraph_trace
from .potential import NoDoubleWell, build_basis
from .propagate import StepMismatch
from .spectrum import CalibrationFailed, ConvergenceFailure, calibrate_mu, eigensystem, make_qubit_frame

log = logging.getLogger("squidnoise")

OUTPUT_ENV = "SQUIDNOISE_OUTPUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_TOLERANCE = 0, 1, 2, 3

NUMERICAL_ERRORS = (
    ConvergenceFailure,
    CalibrationFailed,
    NoDoubleWell,
    analysis.FitDiverged,
    analysis.DegenerateSeries,
    analysis.TooFewOscillations,
    np.linalg.LinAlgError,
    FloatingPointError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fmt(x) -> str:
    """17 significant digits: round-trips float64 exactly."""
    return format(float(x), ".17g")


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def write_json(path: Path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def output_dir(config, args) -> Path:
    base = os.environ.get(OUTPUT_ENV) or config.output_directory
    return Path(base) / args.command


def cmd_spectrum(args) -> int:
    config = load_config(args.config)
    params = config.hamiltonian
    basis = build_basis(params, config.n_basis)
    spec = eigensystem(basis.h_matrix, args.k)
    frame = make_qubit_frame(params.with_phi_ext(0.0), build_basis(params.with_phi_ext(0.0), config.n_basis))
    out = output_dir(config, args)
    write_csv(out / "spectrum.csv", ("level_index", "energy"), ((str(i), e) for i, e in enumerate(spec.energies)))
    write_json(out / "frame.json", {**frame.summary(), "phi_ext": params.phi_ext, "units": "hbar = 1"})
    print(json.dumps(frame.summary()))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    config = load_config(args.config)
    iso = config.isolation_min if args.isolation_min is None else args.isolation_min
    vr = config.vx_range
    vr = (vr[0] if args.vx_min is None else args.vx_min, vr[1] if args.vx_max is None else args.vx_max)
    h = config.hamiltonian
    scan = calibrate_mu(h.beta, h.v0, iso, vr, n_basis=config.n_basis)
    out = output_dir(config, args)
    write_csv(
        out / "scan.csv",
        ("mu", "v_x", "isolation", "ok"),
        ((r["mu"], r["v_x"], r["isolation"], str(int(r["ok"]))) for r in scan.table),
    )
    print(fmt(scan.mu))
    return EXIT_OK


def cmd_noise(args) -> int:
    config = load_config(args.config)
    nz = config.noise
    params = NoiseParams(nz.delta, nz.omega_c, nz.dt, args.n_steps)
    seed = args.seed if args.seed is not None else realization_seed(config.ensemble.master_seed, 0)
    trace = telegraph_trace(params, seed)
    out = output_dir(config, args)
    write_csv(
        out / "trace.csv",
        ("step", "time", "value"),
        ((str(k), k * nz.dt, v) for k, v in enumerate(trace.values)),
    )
    n_lags = max(2, int(np.ceil(np.log(100.0) / (nz.omega_c * nz.dt))) + 1)
    curve = autocorrelation_curve(trace, min(n_lags, len(trace.values) - 1))
    write_csv(out / "autocorr.csv", ("lag", "time", "c"), ((str(k), k * nz.dt, c) for k, c in enumerate(curve)))
    integral = autocorr_integral(trace)
    summary = {
        "seed": str(seed),
        "n_steps": args.n_steps,
        "autocorr_integral": integral,
        "expected": params.correlation_integral,
        "flips": count_flips(trace),
        "expected_flips": (args.n_steps - 1) * params.flip_probability,
    }
    write_json(out / "noise.json", summary)
    print(json.dumps(summary))
    return EXIT_OK


def _run_and_write(setup, args, out: Path):
    e = setup.ensemble
    log.info("running %d realizations x %d steps on %d worker(s)", e.n_realizations, e.noise.n_steps, args.workers)
    trace = experiments.run(setup, workers=args.workers)
    # the JSON sidecar (config echo + seeds) is always written; it is what makes a run reproducible
    if "csv" in setup.config.output_formats:
        write_csv(out / "ensemble.csv", CSV_COLUMNS, trace.rows())
    write_json(out / "ensemble.json", experiments.sidecar(setup, trace))
    return trace


def cmd_ensemble(args) -> int:
    config = load_config(args.config)
    setup = experiments.prepare(config, initial_state=args.initial_state)
    out = output_dir(config, args)
    _run_and_write(setup, args, out)
    print(out / "ensemble.csv")
    return EXIT_OK


def cmd_bloch(args) -> int:
    times = np.linspace(0.0, args.t_max, args.n_points)
    traj = integrate_bloch(args.p0, BlochParams((args.vx, 0.0, 0.0), args.d), times)
    rows = ((t, *p) for t, p in zip(traj.times, traj.p))
    if args.out:
        write_csv(Path(args.out), ("time", "p_x", "p_y", "p_z"), rows)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(("time", "p_x", "p_y", "p_z"))
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return EXIT_OK


def cmd_predict_d(args) -> int:
    d = predict_D(args.v0_phi_c, args.delta, args.omega_c)
    print(format(d, f".{args.digits}g"))
    return EXIT_OK


def read_ensemble_csv(path) -> dict[str, np.ndarray]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
            if missing:
                raise UsageError(f"{path}: missing columns {sorted(missing)}")
            rows = list(reader)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return {c: np.array([float(r[c]) for r in rows]) for c in CSV_COLUMNS}


def cmd_fit(args) -> int:
    data = read_ensemble_csv(args.csv)
    config = load_config(args.config)
    setup = experiments.prepare(config)
    weights = data["stderr_rho11"] if args.weighted else None
    if args.model == "exponential":
        fit = analysis.fit_exponential(data["time"], data["rho11_energy"], weights)
    else:
        fit = analysis.fit_damped_cosine(data["time"], data["p_z"])
    report = analysis.compare_report(
        fit,
        setup.d_pred,
        setup.frame.summary(),
        config_echo=config.to_dict(),
        leakage_max=float(data["leakage"].max()),
        tolerances=config.tolerances,
    )
    out = Path(args.out) if args.out else Path(args.csv).with_suffix(".fit.json")
    write_json(out, report)
    print(analysis.render_report(report))
    return EXIT_OK


def _reproduce(args, initial_state, report_fn) -> int:
    config = load_config(args.config)
    setup = experiments.prepare(config, initial_state=initial_state)
    out = output_dir(config, args)
    trace = _run_and_write(setup, args, out)
    _, report = report_fn(setup, trace)
    write_json(out / "report.json", report)
    text = analysis.render_report(report)
    if "endpoint_rho11_minus_half" in report:
        text += f"\nendpoint rho11(T) - 1/2 = {report['endpoint_rho11_minus_half']:+.4f}"
    if "bloch_rms" in report:
        text += f"\nRMS(P_z - Bloch) = {report['bloch_rms']:.4f}"
    (out / "report.txt").write_text(text + "\n")
    print(text)
    return EXIT_OK if report["passed"] else EXIT_TOLERANCE


def cmd_reproduce_fig2(args) -> int:
    return _reproduce(args, "E1", experiments.dephasing_report)


def cmd_reproduce_fig3(args) -> int:
    return _reproduce(args, "L", experiments.oscillation_report)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="squidnoise", description="rf-SQUID flux-noise decoherence simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_config(p):
        p.add_argument("--config", help="JSON config (default: packaged defaults)")
        return p

    def with_workers(p):
        p.add_argument("--workers", type=int, default=default_workers(), help="worker processes (never affects results)")
        return p

    p = with_config(sub.add_parser("spectrum", help="lowest levels and qubit frame"))
    p.add_argument("--k", type=int, default=4)
    p.set_defaults(func=cmd_spectrum)

    p = with_config(sub.add_parser("calibrate", help="scan mu for an isolated doublet"))
    p.add_argument("--isolation-min", type=float)
    p.add_argument("--vx-min", type=float)
    p.add_argument("--vx-max", type=float)
    p.set_defaults(func=cmd_calibrate)

    p = with_config(sub.add_parser("noise", help="dump a telegraph trace and its autocorrelation"))
    p.add_argument("--n-steps", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_noise)

    p = with_workers(with_config(sub.add_parser("ensemble", help="run the realization average")))
    p.add_argument("--initial-state", help='"E1".."E4", "L", "R"')
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("bloch", help="integrate the damped Bloch equation")
    p.add_argument("--vx", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--p0", type=float, nargs=3, default=[0.0, 0.0, 1.0])
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--n-points", type=int, default=501)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bloch)

    p = sub.add_parser("predict-d", help="dephasing rate from noise parameters")
    p.add_argument("--v0-phi-c", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--omega-c", type=float, required=True)
    p.add_argument("--digits", type=int, default=3)
    p.set_defaults(func=cmd_predict_d)

    p = with_config(sub.add_parser("fit", help="fit an ensemble CSV and compare with the prediction"))
    p.add_argument("--csv", required=True)
    p.add_argument("--model", choices=("exponential", "damped_cosine"), default="exponential")
    p.add_argument("--weighted", action="store_true", help="weight by stderr_rho11")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = with_workers(with_config(sub.add_parser("reproduce-fig2", help="dephasing from the ground state")))
    p.set_defaults(func=cmd_reproduce_fig2)
    p = with_workers(with_config(sub.add_parser("reproduce-fig3", help="damped oscillation from |L>")))
    p.set_defaults(func=cmd_reproduce_fig3)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, ConfigError, StepMismatch, analysis.UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


run_command = main

if __name__ == "__main__":
    sys.exit(main())
