"""Average over noise realizations: rho = (1/N) sum_a psi^a psi^a^dagger.

Only the projection onto the qubit frame (2x2 block and leaked probability) is
accumulated per sample.  Per-realization results are combined in realization
index order, so the output does not depend on the number of workers.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .noise import NoiseParams, realization_seed, telegraph_trace
from .potential import BasisRep, HamiltonianParams, build_basis
from .propagate import PropagatorCache, evolve_realization
from .spectrum import QubitFrame, make_qubit_frame, polarization


class LeakageHigh(UserWarning):
    pass


LEAKAGE_WARN = 0.05


@dataclass(frozen=True)
class EnsembleConfig:
    hamiltonian: HamiltonianParams
    noise: NoiseParams
    n_realizations: int = 400
    master_seed: int = 20051101
    initial_state: str | tuple = "E1"
    sample_every: int = 1
    n_basis: int = 128

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")

    @property
    def total_time(self) -> float:
        return self.noise.n_steps * self.noise.dt


@dataclass(frozen=True, eq=False)
class PolarizationTrace:
    times: np.ndarray
    rho2_avg: np.ndarray
    p_vec: np.ndarray
    leakage_avg: np.ndarray
    rho11_energy: np.ndarray
    stderr_rho11: np.ndarray
    n_realizations: int
    seeds: list[int] = field(default_factory=list)
    full_density: dict | None = None

    def purity(self, t_index: int) -> float:
        return purity(self, t_index)

    def rows(self):
        for i, t in enumerate(self.times):
            px, py, pz = self.p_vec[i]
            yield (t, self.rho11_energy[i], px, py, pz, self.leakage_avg[i], self.stderr_rho11[i])


CSV_COLUMNS = ("time", "rho11_energy", "p_x", "p_y", "p_z", "leakage", "stderr_rho11")


def initial_state(selector, frame: QubitFrame) -> np.ndarray:
    """``"E1"``..``"E4"`` (energy eigenstates), ``"L"``, ``"R"``, or qubit
    coefficients ``(c_L, c_R)`` which are normalized."""
    if isinstance(selector, str):
        s = selector.strip()
        if s == "L":
            return frame.l_state.astype(complex)
        if s == "R":
            return frame.r_state.astype(complex)
        if s in ("ground", "E1"):
            return frame.state1.astype(complex)
        if s.startswith("E") and s[1:].isdigit():
            k = int(s[1:]) - 1
            if not 0 <= k < frame.states.shape[1]:
                raise ValueError(f"energy state {s} not available (frame keeps {frame.states.shape[1]})")
            return frame.states[:, k].astype(complex)
        raise ValueError(f"unknown initial state {selector!r}")
    c = np.asarray(selector, dtype=complex)
    if c.shape != (2,) or not np.linalg.norm(c) > 0:
        raise ValueError(f"qubit coefficients must be a nonzero pair, got {selector!r}")
    c = c / np.linalg.norm(c)
    return c[0] * frame.l_state + c[1] * frame.r_state


@dataclass(frozen=True, eq=False)
class _Job:
    cache: PropagatorCache
    frame: QubitFrame
    psi0: np.ndarray
    noise: NoiseParams
    sample_every: int
    snapshot_at: tuple


_JOB: _Job | None = None


def _init_worker(job):
    global _JOB
    _JOB = job


def _run_one(job: _Job, seed: int):
    trace = telegraph_trace(job.noise, seed)
    ev = evolve_realization(job.cache, job.frame, job.psi0, trace, job.sample_every, job.snapshot_at or None)
    return ev.amplitudes, ev.leakage, ev.snapshots


def _run_chunk(seeds):
    return [_run_one(_JOB, s) for s in seeds]


def _chunks(items, n):
    size = max(1, -(-len(items) // n))
    return [items[i : i + size] for i in range(0, len(items), size)]


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def run_ensemble(
    config: EnsembleConfig,
    workers: int = 1,
    basis: BasisRep | None = None,
    frame: QubitFrame | None = None,
    full_density_at=(),
    seeds: list[int] | None = None,
    traces=None,
) -> PolarizationTrace:
    """Evolve ``n_realizations`` noise paths and average their qubit projections.

    ``traces`` may supply explicit NoiseTrace objects (one per realization)
    instead of seeded telegraph noise; this is meant for tests.
    ``full_density_at`` lists sample indices at which the full n_basis x n_basis
    density matrix is also accumulated.
    """
    params = config.hamiltonian
    if basis is None:
        basis = build_basis(params.with_phi_ext(0.0), config.n_basis)
    if frame is None:
        frame = make_qubit_frame(params.with_phi_ext(0.0), basis)
    psi0 = initial_state(config.initial_state, frame)
    cache = PropagatorCache.build(params, basis, config.noise.delta, config.noise.dt)
    snapshot_at = tuple(int(j) for j in full_density_at)
    job = _Job(cache, frame, psi0, config.noise, config.sample_every, snapshot_at)

    if traces is not None:
        results = []
        for tr in traces:
            ev = evolve_realization(cache, frame, psi0, tr, config.sample_every, snapshot_at or None)
            results.append((ev.amplitudes, ev.leakage, ev.snapshots))
        seeds = [int(tr.seed) for tr in traces]
    else:
        if seeds is None:
            seeds = [realization_seed(config.master_seed, a) for a in range(config.n_realizations)]
        if workers <= 1:
            results = [_run_one(job, s) for s in seeds]
        else:
            with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(job,)) as pool:
                results = [r for chunk in pool.map(_run_chunk, _chunks(seeds, workers)) for r in chunk]

    return _reduce(results, config, frame, seeds, snapshot_at)


def _reduce(results, config, frame, seeds, snapshot_at) -> PolarizationTrace:
    n = len(results)
    n_samples = results[0][0].shape[0]
    rho2_sum = np.zeros((n_samples, 2, 2), dtype=complex)
    leak_sum = np.zeros(n_samples)
    r11 = np.empty((n, n_samples))
    full = None
    if snapshot_at:
        dim = results[0][2].shape[1]
        full = np.zeros((len(snapshot_at), dim, dim), dtype=complex)
    # sequential sums in realization order
    for a, (amps, leak, snaps) in enumerate(results):
        rho2_sum += amps[:, :, None] * amps[:, None, :].conj()
        leak_sum += leak
        # <E1|psi> = (<L|psi> + <R|psi>) / sqrt(2)
        r11[a] = 0.5 * np.abs(amps[:, 0] + amps[:, 1]) ** 2
        if full is not None:
            full += snaps[:, :, None] * snaps[:, None, :].conj()
    rho2 = rho2_sum / n
    leakage = leak_sum / n
    rho11 = r11.mean(axis=0)
    stderr = r11.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(n_samples)
    times = config.noise.dt * config.sample_every * np.arange(n_samples)
    if leakage.max() > LEAKAGE_WARN:
        warnings.warn(f"mean leakage reached {leakage.max():.3g}", LeakageHigh, stacklevel=3)
    return PolarizationTrace(
        times=times,
        rho2_avg=rho2,
        p_vec=polarization(rho2),
        leakage_avg=leakage,
        rho11_energy=rho11,
        stderr_rho11=stderr,
        n_realizations=n,
        seeds=list(seeds),
        full_density=None if full is None else {int(j): full[i] / n for i, j in enumerate(snapshot_at)},
    )


def purity(trace: PolarizationTrace, t_index: int) -> float:
    """Purity of the renormalized 2x2 block, in [1/2, 1]."""
    rho2 = trace.rho2_avg[t_index]
    tr = np.trace(rho2).real
    if tr <= 0:
        raise ValueError("no population left in the qubit subspace")
    return float(np.trace(rho2 @ rho2).real / tr**2)
