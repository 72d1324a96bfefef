"""Exact piecewise-constant time evolution.

Telegraph noise makes H^a(t) take only two values, H(phi_ext + delta) and
H(phi_ext - delta), so one realization is a product of two fixed unitaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from .noise import NoiseTrace
from .potential import BasisRep, HamiltonianParams, build_hamiltonian
from .spectrum import ConvergenceFailure, QubitFrame, qubit_amplitudes


class StepMismatch(ValueError):
    pass


def build_propagator(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i h dt) from the eigendecomposition of the Hermitian ``h``."""
    try:
        w, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return (vecs * np.exp(-1j * w * dt)) @ vecs.conj().T


@dataclass(frozen=True, eq=False)
class PropagatorCache:
    u_plus: np.ndarray
    u_minus: np.ndarray
    u_zero: np.ndarray
    dt: float
    delta: float

    @classmethod
    def build(cls, params: HamiltonianParams, basis: BasisRep, delta: float, dt: float) -> PropagatorCache:
        x = params.phi_ext
        return cls(
            u_plus=build_propagator(build_hamiltonian(basis, params, x + delta), dt),
            u_minus=build_propagator(build_hamiltonian(basis, params, x - delta), dt),
            u_zero=build_propagator(build_hamiltonian(basis, params, x), dt),
            dt=float(dt),
            delta=float(delta),
        )


@dataclass(frozen=True, eq=False)
class SampledEvolution:
    times: np.ndarray
    amplitudes: np.ndarray  # (n_samples, 2): <L|psi>, <R|psi>
    leakage: np.ndarray
    final_state: np.ndarray
    snapshots: np.ndarray | None = None  # full states at the requested sample indices

    @property
    def rho2(self) -> np.ndarray:
        a = self.amplitudes
        return a[:, :, None] * a[:, None, :].conj()


def _sampler(frame: QubitFrame, n_samples: int, snapshot_at, dim: int):
    amps = np.empty((n_samples, 2), dtype=complex)
    leak = np.empty(n_samples)
    if snapshot_at is True:
        snapshot_at = range(n_samples)
    slots = {int(j): i for i, j in enumerate(snapshot_at or ())}
    snaps = np.zeros((len(slots), dim), dtype=complex) if slots else None

    def record(j, psi):
        a = qubit_amplitudes(psi, frame)
        amps[j] = a
        leak[j] = np.vdot(psi, psi).real - abs(a[0]) ** 2 - abs(a[1]) ** 2
        if j in slots:
            snaps[slots[j]] = psi

    return amps, leak, snaps, record


def evolve_realization(
    cache: PropagatorCache,
    frame: QubitFrame,
    psi0: np.ndarray,
    trace: NoiseTrace,
    sample_every: int = 1,
    snapshot_at=None,
) -> SampledEvolution:
    """Step ``psi0`` through the noise trace, sampling the qubit projection.

    Step k uses the noise value ``trace.values[k]``; samples are taken at
    t = 0, sample_every*dt, 2*sample_every*dt, ...  ``snapshot_at`` lists sample
    indices at which the full state is also kept (``True`` keeps all of them).
    """
    if not np.isclose(trace.dt, cache.dt, rtol=1e-12, atol=0):
        raise StepMismatch(f"trace dt {trace.dt} != propagator dt {cache.dt}")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    n_steps = len(trace.values)
    n_samples = n_steps // sample_every + 1
    amps, leak, snaps, record = _sampler(frame, n_samples, snapshot_at, len(psi0))

    psi = np.asarray(psi0, dtype=complex).copy()
    if cache.delta == 0 or trace.params.delta == 0:
        ops = [cache.u_zero] * n_steps
    else:
        positive = trace.values > 0
        ops = [cache.u_plus if s else cache.u_minus for s in positive]
    record(0, psi)
    # single-threaded BLAS: matvec results must not depend on the thread count
    with threadpool_limits(1, user_api="blas"):
        for k in range(n_steps):
            psi = ops[k] @ psi
            if (k + 1) % sample_every == 0:
                record((k + 1) // sample_every, psi)
    times = cache.dt * sample_every * np.arange(n_samples)
    return SampledEvolution(times=times, amplitudes=amps, leakage=leak, final_state=psi, snapshots=snaps)


def evolve_schedule(
    params: HamiltonianParams,
    basis: BasisRep,
    frame: QubitFrame,
    schedule: list[tuple[float, float]],
    psi0: np.ndarray,
    dt: float,
    sample_every: int = 1,
    snapshot_at=None,
) -> SampledEvolution:
    """Noiseless evolution under piecewise-constant external flux.

    ``schedule`` is a list of ``(phi_ext, duration)``; every duration must be a
    whole number of ``dt`` steps.  One propagator is built per distinct flux.
    """
    steps = []
    for phi_ext, duration in schedule:
        if not duration > 0:
            raise ValueError(f"segment duration must be positive, got {duration}")
        n = round(duration / dt)
        if abs(n * dt - duration) > 1e-9 * max(1.0, duration):
            raise ValueError(f"duration {duration} is not a multiple of dt={dt}")
        steps.extend([float(phi_ext)] * n)

    props: dict[float, np.ndarray] = {}
    for x in set(steps):
        props[x] = build_propagator(build_hamiltonian(basis, params, x), dt)

    n_steps = len(steps)
    n_samples = n_steps // sample_every + 1
    amps, leak, snaps, record = _sampler(frame, n_samples, snapshot_at, len(psi0))
    psi = np.asarray(psi0, dtype=complex).copy()
    record(0, psi)
    with threadpool_limits(1, user_api="blas"):
        for k, x in enumerate(steps):
            psi = props[x] @ psi
            if (k + 1) % sample_every == 0:
                record((k + 1) // sample_every, psi)
    times = dt * sample_every * np.arange(n_samples)
    return SampledEvolution(times=times, amplitudes=amps, leakage=leak, final_state=psi, snapshots=snaps)


def reference_evolve(
    params: HamiltonianParams,
    basis: BasisRep,
    psi0: np.ndarray,
    trace: NoiseTrace,
    substeps: int = 100,
) -> np.ndarray:
    """Brute-force check: classical RK4 on i dpsi/dt = H psi with dt/substeps.

    Slow; meant as an independent reference for short runs, not for production.
    H is shifted by <psi0|H|psi0> (a global phase) so RK4 sees small energies.
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    h0 = build_hamiltonian(basis, params, params.phi_ext)
    shift = np.vdot(psi, h0 @ psi).real * np.eye(len(psi))
    h_plus = build_hamiltonian(basis, params, params.phi_ext + trace.params.delta) - shift
    h_minus = build_hamiltonian(basis, params, params.phi_ext - trace.params.delta) - shift
    h = trace.dt / substeps
    for value in trace.values:
        a = -1j * (h_plus if value >= 0 else h_minus)
        for _ in range(substeps):
            k1 = a @ psi
            k2 = a @ (psi + 0.5 * h * k1)
            k3 = a @ (psi + 0.5 * h * k2)
            k4 = a @ (psi + h * k3)
            psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return psi
