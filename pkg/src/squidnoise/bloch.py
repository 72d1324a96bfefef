"""Two-level reference model: dP/dt = P x V - D P_T, with P_T = (P_x, P_y, 0)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


STEP_FRACTION = 0.01


class Overdamped(ValueError):
    pass


@dataclass(frozen=True)
class BlochParams:
    v: tuple[float, float, float]
    d: float

    def __post_init__(self):
        if self.d < 0:
            raise ValueError(f"damping rate must be >= 0, got {self.d}")


@dataclass(frozen=True, eq=False)
class BlochTrajectory:
    times: np.ndarray
    p: np.ndarray  # (n, 3)


def predict_D(v0_phi_c: float, delta: float, omega_c: float) -> float:
    """Dephasing rate 4 (V0 phi_c)^2 delta^2 / omega_c from telegraph flux noise."""
    if not omega_c > 0:
        raise ValueError(f"omega_c must be > 0, got {omega_c}")
    return 4.0 * v0_phi_c**2 * delta**2 / omega_c


def _rhs(p: np.ndarray, v: np.ndarray, d: float) -> np.ndarray:
    return np.array(
        [
            p[1] * v[2] - p[2] * v[1] - d * p[0],
            p[2] * v[0] - p[0] * v[2] - d * p[1],
            p[0] * v[1] - p[1] * v[0],
        ]
    )


def integrate_bloch(p0, params: BlochParams, times) -> BlochTrajectory:
    """Fixed-step RK4, with each output interval split into equal substeps.

    Steps are at most 0.01/|V| and 0.01/D, which keeps the error near 1e-10
    over ten precession periods.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("time grid must be monotone")
    v = np.asarray(params.v, dtype=float)
    vnorm = float(np.linalg.norm(v))
    h_max = min(STEP_FRACTION / vnorm if vnorm > 0 else np.inf, STEP_FRACTION / params.d if params.d > 0 else np.inf)
    out = np.empty((len(times), 3))
    p = np.asarray(p0, dtype=float).copy()
    out[0] = p
    for i in range(1, len(times)):
        span = times[i] - times[i - 1]
        n = max(1, int(np.ceil(span / h_max))) if np.isfinite(h_max) else 1
        h = span / n
        for _ in range(n):
            k1 = _rhs(p, v, params.d)
            k2 = _rhs(p + 0.5 * h * k1, v, params.d)
            k3 = _rhs(p + 0.5 * h * k2, v, params.d)
            k4 = _rhs(p + h * k3, v, params.d)
            p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i] = p
    return BlochTrajectory(times=times, p=out)


def closed_form_damped(v_x: float, d: float, times) -> BlochTrajectory:
    """Exact solution from P(0) = z-hat with V = (v_x, 0, 0).

    P_z = e^{-dt/2} (cos wt + (d / 2w) sin wt), w = sqrt(v_x^2 - d^2/4)
    P_y = (v_x / w) e^{-dt/2} sin wt
    """
    if v_x <= d / 2:
        raise Overdamped(f"v_x={v_x} <= d/2={d / 2}")
    t = np.asarray(times, dtype=float)
    w = np.sqrt(v_x**2 - 0.25 * d**2)
    env = np.exp(-0.5 * d * t)
    pz = env * (np.cos(w * t) + (0.5 * d / w) * np.sin(w * t))
    py = env * (v_x / w) * np.sin(w * t)
    return BlochTrajectory(times=t, p=np.column_stack([np.zeros_like(t), py, pz]))
