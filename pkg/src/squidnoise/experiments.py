"""Compositions used by the CLI: dephasing (rho11 decay) and oscillation (P_z) runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import FitResult, compare_report, fit_damped_cosine, fit_exponential
from .bloch import BlochParams, integrate_bloch, predict_D
from .config import RunConfig
from .ensemble import EnsembleConfig, PolarizationTrace, run_ensemble
from .noise import NoiseParams, realization_seed
from .potential import BasisRep, build_basis
from .spectrum import QubitFrame, make_qubit_frame

TARGET_SAMPLES = 500


@dataclass(frozen=True, eq=False)
class Setup:
    config: RunConfig
    basis: BasisRep
    frame: QubitFrame
    d_pred: float
    ensemble: EnsembleConfig


def prepare(config: RunConfig, initial_state=None) -> Setup:
    """Build basis and frame, predict D from the measured well position, and
    resolve ``total_time`` (default 3 / D_pred) and ``sample_every``."""
    params = config.hamiltonian
    basis = build_basis(params.with_phi_ext(0.0), config.n_basis)
    frame = make_qubit_frame(params.with_phi_ext(0.0), basis, config.isolation_min)
    nz = config.noise
    d_pred = predict_D(params.v0 * frame.phi_c, nz.delta, nz.omega_c)
    ens = config.ensemble
    total_time = ens.total_time
    if total_time is None:
        if d_pred == 0:
            raise ValueError("total_time must be given when the predicted D is zero")
        total_time = 3.0 / d_pred
    n_steps = max(1, round(total_time / nz.dt))
    sample_every = ens.sample_every or max(1, n_steps // TARGET_SAMPLES)
    econf = EnsembleConfig(
        hamiltonian=params,
        noise=NoiseParams(nz.delta, nz.omega_c, nz.dt, n_steps),
        n_realizations=ens.n_realizations,
        master_seed=ens.master_seed,
        initial_state=ens.initial_state if initial_state is None else initial_state,
        sample_every=sample_every,
        n_basis=config.n_basis,
    )
    return Setup(config, basis, frame, d_pred, econf)


def run(setup: Setup, workers: int = 1) -> PolarizationTrace:
    return run_ensemble(setup.ensemble, workers=workers, basis=setup.basis, frame=setup.frame)


def sidecar(setup: Setup, trace: PolarizationTrace | None = None) -> dict:
    e = setup.ensemble
    out = {
        "config": setup.config.to_dict(),
        "defaulted": list(setup.config.defaulted),
        "resolved": {
            "n_steps": e.noise.n_steps,
            "total_time": e.total_time,
            "sample_every": e.sample_every,
            "initial_state": e.initial_state,
            "flip_probability": e.noise.flip_probability,
        },
        "D_pred": setup.d_pred,
        "frame": setup.frame.summary(),
        "seed_rule": "numpy SeedSequence([master_seed, realization_index]).generate_state(1, uint64) -> PCG64",
        "units": "hbar = 1; time in inverse energy units",
    }
    if trace is not None:
        out["seeds"] = [str(s) for s in trace.seeds]
        out["n_realizations"] = trace.n_realizations
    else:
        out["seeds"] = [str(realization_seed(e.master_seed, a)) for a in range(e.n_realizations)]
    return out


def dephasing_report(setup: Setup, trace: PolarizationTrace) -> tuple[FitResult, dict]:
    tol = setup.config.tolerances
    fit = fit_exponential(trace.times, trace.rho11_energy)
    report = compare_report(
        fit,
        setup.d_pred,
        setup.frame.summary(),
        leakage_max=float(trace.leakage_avg.max()),
        tolerances=tol,
    )
    endpoint = float(trace.rho11_energy[-1] - 0.5)
    report["endpoint_rho11_minus_half"] = endpoint
    report["checks"]["endpoint_mixed"] = abs(endpoint) <= tol["endpoint"]
    report["passed"] = all(report["checks"].values())
    return fit, report


def bloch_reference(setup: Setup, times) -> np.ndarray:
    traj = integrate_bloch([0.0, 0.0, 1.0], BlochParams((setup.frame.v_x, 0.0, 0.0), setup.d_pred), times)
    return traj.p


def oscillation_report(setup: Setup, trace: PolarizationTrace) -> tuple[FitResult, dict]:
    tol = setup.config.tolerances
    pz = trace.p_vec[:, 2]
    fit = fit_damped_cosine(trace.times, pz)
    report = compare_report(
        fit,
        setup.d_pred,
        setup.frame.summary(),
        leakage_max=float(trace.leakage_avg.max()),
        tolerances=tol,
    )
    ref = bloch_reference(setup, trace.times)[:, 2]
    rms = float(np.sqrt(np.mean((pz - ref) ** 2)))
    report["bloch_rms"] = rms
    report["checks"]["bloch_rms"] = rms <= tol["bloch_rms"]
    report["passed"] = all(report["checks"].values())
    return fit, report
