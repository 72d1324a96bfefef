"""Random telegraph flux noise.

The process jumps between +delta and -delta.  Sign flips happen at rate
omega_c / 2 per unit time, so that the autocorrelation is
delta^2 exp(-omega_c |t|) and its one-sided integral is delta^2 / omega_c.
On the time grid a flip occurs at each step with probability
1 - exp(-omega_c dt / 2).

Generator: numpy PCG64 seeded with a 64-bit integer.  Per-realization seeds
come from ``SeedSequence((master_seed, index))``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


class TooShort(ValueError):
    pass


class NonstationaryWarning(UserWarning):
    pass


MAX_OMEGA_DT = 0.2


@dataclass(frozen=True)
class NoiseParams:
    delta: float
    omega_c: float
    dt: float
    n_steps: int

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if not self.omega_c > 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.omega_c * self.dt > MAX_OMEGA_DT:
            raise ValueError(
                f"omega_c*dt = {self.omega_c * self.dt:.3g} > {MAX_OMEGA_DT}: "
                "time step does not resolve the noise correlation time"
            )

    @property
    def flip_probability(self) -> float:
        return float(-np.expm1(-0.5 * self.omega_c * self.dt))

    @property
    def correlation_integral(self) -> float:
        return self.delta**2 / self.omega_c


@dataclass(frozen=True, eq=False)
class NoiseTrace:
    values: np.ndarray
    seed: int
    params: NoiseParams

    @property
    def dt(self) -> float:
        return self.params.dt

    def __len__(self):
        return len(self.values)


def realization_seed(master_seed: int, index: int) -> int:
    """Order-independent 64-bit seed for realization ``index``."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def telegraph_trace(params: NoiseParams, seed: int) -> NoiseTrace:
    rng = np.random.Generator(np.random.PCG64(seed))
    first = 1.0 if rng.random() < 0.5 else -1.0
    flips = rng.random(params.n_steps - 1) < params.flip_probability
    parity = np.concatenate(([0], np.cumsum(flips) & 1))
    signs = first * (1.0 - 2.0 * parity)
    values = params.delta * signs
    if params.delta == 0:
        values = np.zeros(params.n_steps)
    return NoiseTrace(values=values, seed=int(seed), params=params)


def count_flips(trace: NoiseTrace) -> int:
    return int(np.count_nonzero(np.diff(np.sign(trace.values))))


def autocorrelation(values: np.ndarray, lag: int) -> float:
    n = len(values)
    return float(np.dot(values[: n - lag], values[lag:]) / (n - lag))


def autocorr_integral(trace: NoiseTrace, max_lag: int | None = None) -> float:
    """One-sided trapezoid estimate of the integral of <N(t) N(0)>.

    Lags are summed until the correlation falls below delta^2 / 100.
    """
    p = trace.params
    n = len(trace.values)
    if n < 10.0 / (p.omega_c * p.dt):
        raise TooShort(f"trace of {n} steps is shorter than 10 correlation times")
    if p.delta == 0:
        return 0.0
    threshold = p.delta**2 / 100.0
    if max_lag is None:
        max_lag = n // 10
    total = 0.5 * autocorrelation(trace.values, 0)
    for k in range(1, max_lag):
        c = autocorrelation(trace.values, k)
        if c < threshold:
            break
        total += c
    else:
        warnings.warn(
            f"autocorrelation stayed above delta^2/100 for {max_lag} lags; trace looks nonstationary",
            NonstationaryWarning,
            stacklevel=2,
        )
    return p.dt * total


def autocorrelation_curve(trace: NoiseTrace, n_lags: int) -> np.ndarray:
    return np.array([autocorrelation(trace.values, k) for k in range(n_lags)])
