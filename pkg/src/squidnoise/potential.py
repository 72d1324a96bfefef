"""rf-SQUID potential and its Hamiltonian in a truncated harmonic-oscillator basis.

Units: hbar = 1, so time is measured in inverse energy units.

    H = -(1/2mu) d^2/dphi^2 + V0 * (1/2 (phi - phi_ext)^2 + beta cos(phi))
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq


class NoDoubleWell(ValueError):
    """The potential has a single minimum for the given parameters."""


class SingleWellWarning(UserWarning):
    pass


@dataclass(frozen=True)
class HamiltonianParams:
    mu: float
    beta: float
    v0: float
    phi_ext: float = 0.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.v0 > 0:
            raise ValueError(f"v0 must be positive, got {self.v0}")
        if self.beta <= 1:
            warnings.warn(
                f"beta={self.beta} <= 1: potential is a single well", SingleWellWarning, stacklevel=3
            )

    def with_phi_ext(self, phi_ext: float) -> HamiltonianParams:
        return replace(self, phi_ext=phi_ext)


@dataclass(frozen=True, eq=False)
class BasisRep:
    """Operator matrices in the lowest ``n_basis`` oscillator states.

    The oscillator has mass ``mu`` and frequency ``omega_b = sqrt(V0/mu)``, so the
    kinetic term plus ``V0 phi^2 / 2`` is diagonal.  ``phi_sq_matrix`` is the exact
    truncation of phi^2 (not the square of the truncated phi).
    """

    n_basis: int
    omega_b: float
    phi_matrix: np.ndarray
    phi_sq_matrix: np.ndarray
    kinetic_matrix: np.ndarray
    cos_matrix: np.ndarray
    h_matrix: np.ndarray
    mu: float
    v0: float


def potential_value(params: HamiltonianParams, phi, phi_ext: float | None = None):
    if phi_ext is None:
        phi_ext = params.phi_ext
    phi = np.asarray(phi, dtype=float)
    return params.v0 * (0.5 * (phi - phi_ext) ** 2 + params.beta * np.cos(phi))


def _stationary_points(params: HamiltonianParams, grid: int = 4001):
    # dU/dphi = V0 * (phi - phi_ext - beta sin phi)
    def grad(x):
        return x - params.phi_ext - params.beta * np.sin(x)

    xs = np.linspace(-np.pi, np.pi, grid)
    g = grad(xs)
    roots = []
    for i in range(grid - 1):
        if g[i] == 0.0:
            roots.append(xs[i])
        elif g[i] * g[i + 1] < 0:
            roots.append(brentq(grad, xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15))
    return np.array(roots)


def well_minima(params: HamiltonianParams) -> tuple[float, float]:
    """Positive-side well position and the barrier height above it.

    Returns ``(phi_c, barrier)`` with ``barrier = U(phi_top) - U(phi_c)`` where
    ``phi_top`` is the local maximum between the wells.
    """
    roots = _stationary_points(params)
    curvature = 1.0 - params.beta * np.cos(roots)
    minima = roots[curvature > 0]
    maxima = roots[curvature < 0]
    if len(minima) < 2 or len(maxima) == 0:
        raise NoDoubleWell(
            f"only {len(minima)} minimum found for beta={params.beta}, phi_ext={params.phi_ext}"
        )
    phi_c = float(minima.max())
    top = float(maxima[np.argmin(np.abs(maxima - 0.5 * (minima.min() + minima.max())))])
    barrier = float(potential_value(params, top) - potential_value(params, phi_c))
    return phi_c, barrier


def _ladder_matrices(n: int, mu: float, omega_b: float):
    k = np.arange(n, dtype=float)
    x0_sq = 1.0 / (2.0 * mu * omega_b)
    off1 = np.sqrt(k[1:] * x0_sq)
    phi = np.diag(off1, 1) + np.diag(off1, -1)

    off2 = np.sqrt((k[:-2] + 1.0) * (k[:-2] + 2.0))
    phi_sq = x0_sq * (np.diag(2.0 * k + 1.0) + np.diag(off2, 2) + np.diag(off2, -2))
    # p^2 = (mu omega_b / 2) (2n+1 - a^2 - a^dag^2)
    p_sq = 0.5 * mu * omega_b * (np.diag(2.0 * k + 1.0) - np.diag(off2, 2) - np.diag(off2, -2))
    return phi, phi_sq, p_sq / (2.0 * mu)


def operator_function(matrix: np.ndarray, func) -> np.ndarray:
    """Apply ``func`` to a real symmetric matrix through its eigendecomposition."""
    w, vecs = np.linalg.eigh(matrix)
    out = (vecs * func(w)) @ vecs.T
    return 0.5 * (out + out.T)


def build_basis(params: HamiltonianParams, n_basis: int = 128) -> BasisRep:
    if n_basis < 8:
        raise ValueError(f"n_basis must be >= 8, got {n_basis}")
    omega_b = float(np.sqrt(params.v0 / params.mu))
    phi, phi_sq, kinetic = _ladder_matrices(n_basis, params.mu, omega_b)
    cos_m = operator_function(phi, np.cos)
    basis = BasisRep(
        n_basis=n_basis,
        omega_b=omega_b,
        phi_matrix=phi,
        phi_sq_matrix=phi_sq,
        kinetic_matrix=kinetic,
        cos_matrix=cos_m,
        h_matrix=np.zeros((n_basis, n_basis)),
        mu=params.mu,
        v0=params.v0,
    )
    object.__setattr__(basis, "h_matrix", build_hamiltonian(basis, params, params.phi_ext))
    return basis


def flux_independent_part(basis: BasisRep, params: HamiltonianParams) -> np.ndarray:
    """The piece of H that does not depend on the external flux."""
    return basis.kinetic_matrix + params.v0 * (0.5 * basis.phi_sq_matrix + params.beta * basis.cos_matrix)


def build_hamiltonian(basis: BasisRep, params: HamiltonianParams, phi_ext_effective: float) -> np.ndarray:
    """H = H0 - V0 x phi + (V0 x^2 / 2) I for effective external flux x."""
    if basis.mu != params.mu or basis.v0 != params.v0:
        raise ValueError("basis was built for different mu / v0")
    x = float(phi_ext_effective)
    h = flux_independent_part(basis, params) - params.v0 * x * basis.phi_matrix
    h[np.diag_indices_from(h)] += 0.5 * params.v0 * x * x
    return 0.5 * (h + h.T)


def parity_matrix(n: int) -> np.ndarray:
    """phi -> -phi in the oscillator basis."""
    return np.diag((-1.0) ** np.arange(n))
