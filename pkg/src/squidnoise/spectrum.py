"""Stationary states, the two-level frame, and projection onto it.

Axis convention of the abstract spin space:
  +x  <->  ground eigenstate |E1>
  +z  <->  |L>, the state localized in the negative-flux well
  y   fixed by right-handedness (P_y = Tr rho sigma_y in the (L, R) basis)
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .potential import BasisRep, HamiltonianParams, build_basis, build_hamiltonian


class ConvergenceFailure(RuntimeError):
    pass


class PoorIsolation(UserWarning):
    pass


class CalibrationFailed(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    energies: np.ndarray
    states: np.ndarray  # columns are eigenvectors
    degenerate: bool = False


@dataclass(frozen=True, eq=False)
class QubitFrame:
    e1: float
    e2: float
    v_x: float
    state1: np.ndarray
    state2: np.ndarray
    l_state: np.ndarray
    r_state: np.ndarray
    phi_c: float
    isolation: float
    energies: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)

    def summary(self) -> dict:
        return {
            "v_x": self.v_x,
            "phi_c": self.phi_c,
            "isolation": self.isolation,
            "energies": [float(e) for e in self.energies],
        }


def eigensystem(h: np.ndarray, k: int) -> SpectrumResult:
    n = h.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    try:
        w, v = scipy.linalg.eigh(h, subset_by_index=[0, k - 1])
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    degenerate = bool(k > 1 and np.min(np.diff(w)) < 1e-12)
    return SpectrumResult(energies=w, states=v, degenerate=degenerate)


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(vec)))
    return vec if vec[i] > 0 else -vec


def make_qubit_frame(params: HamiltonianParams, basis: BasisRep, isolation_min: float = 20.0) -> QubitFrame:
    if params.phi_ext != 0.0:
        raise ValueError("the qubit frame is defined at phi_ext = 0")
    h = build_hamiltonian(basis, params, 0.0)
    spec = eigensystem(h, 4)
    e = spec.energies
    s1 = _fix_sign(spec.states[:, 0])
    s2 = _fix_sign(spec.states[:, 1])
    phi = basis.phi_matrix
    r = (s1 + s2) / np.sqrt(2.0)
    if r @ phi @ r < 0:
        s2 = -s2
        r = (s1 + s2) / np.sqrt(2.0)
    l = (s1 - s2) / np.sqrt(2.0)
    v_x = float(e[1] - e[0])
    isolation = float((e[2] - e[1]) / v_x) if v_x > 0 else np.inf
    if isolation < isolation_min:
        warnings.warn(f"qubit isolation {isolation:.3g} < {isolation_min}", PoorIsolation, stacklevel=2)
    states = spec.states.copy()
    states[:, 0], states[:, 1] = s1, s2
    return QubitFrame(
        e1=float(e[0]),
        e2=float(e[1]),
        v_x=v_x,
        state1=s1,
        state2=s2,
        l_state=l,
        r_state=r,
        phi_c=float(r @ phi @ r),
        isolation=isolation,
        energies=e,
        states=states,
    )


def qubit_amplitudes(psi: np.ndarray, frame: QubitFrame) -> tuple[complex, complex]:
    """(<L|psi>, <R|psi>)."""
    return complex(frame.l_state @ psi), complex(frame.r_state @ psi)


def project_to_qubit(psi: np.ndarray, frame: QubitFrame) -> tuple[np.ndarray, float]:
    """2x2 density-matrix contribution in the (L, R) basis and the leaked probability."""
    amp = np.array(qubit_amplitudes(psi, frame))
    rho2 = np.outer(amp, amp.conj())
    leakage = float(np.vdot(psi, psi).real - np.sum(np.abs(amp) ** 2))
    return rho2, leakage


PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def polarization(rho2: np.ndarray) -> np.ndarray:
    """P = Tr(rho2 sigma) for a single 2x2 matrix or a stack of them."""
    rho2 = np.asarray(rho2)
    return np.einsum("...ij,kji->...k", rho2, PAULI).real


@dataclass
class CalibrationScan:
    mu: float
    table: list[dict]


def calibrate_mu(
    beta: float,
    v0: float,
    isolation_min: float = 20.0,
    vx_range: tuple[float, float] = (0.01, 0.05),
    mu_grid=None,
    n_basis: int = 128,
) -> CalibrationScan:
    """Smallest mu on a log grid giving an isolated doublet with splitting in ``vx_range``."""
    if beta <= 1:
        raise ValueError("calibration needs beta > 1")
    if mu_grid is None:
        mu_grid = np.round(np.geomspace(1.0, 200.0, 233), 4)
    table = []
    found = None
    for mu in mu_grid:
        params = HamiltonianParams(mu=float(mu), beta=beta, v0=v0)
        basis = build_basis(params, n_basis)
        e = eigensystem(basis.h_matrix, 3).energies
        v_x = float(e[1] - e[0])
        iso = float((e[2] - e[1]) / v_x)
        ok = iso >= isolation_min and vx_range[0] <= v_x <= vx_range[1]
        table.append({"mu": float(mu), "v_x": v_x, "isolation": iso, "ok": ok})
        if ok and found is None:
            found = float(mu)
    if found is None:
        raise CalibrationFailed(
            f"no mu in [{mu_grid[0]}, {mu_grid[-1]}] gives isolation >= {isolation_min} "
            f"and v_x in {tuple(vx_range)}"
        )
    return CalibrationScan(mu=found, table=table)
