"""Fits of simulated traces and the simulation-vs-prediction report."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


class FitDiverged(RuntimeError):
    pass


class DegenerateSeries(ValueError):
    pass


class DegenerateSeriesWarning(UserWarning):
    pass


class TooFewOscillations(ValueError):
    pass


class UsageError(ValueError):
    pass


MAX_ITER = 200
XTOL = 1e-10


@dataclass
class FitResult:
    model: str
    params: dict
    rms_residual: float
    converged: bool
    n_iter: int = 0
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": {k: float(v) for k, v in self.params.items()},
            "rms_residual": self.rms_residual,
            "converged": self.converged,
            "n_iter": self.n_iter,
            **({"notes": self.notes} if self.notes else {}),
        }


def levenberg_marquardt(func, jac, theta0, y, sigma, scale):
    """Minimize sum(((func(theta) - y) / sigma)^2).

    ``scale`` gives a typical magnitude per parameter; a step counts as
    converged when every |step_i| < XTOL * (|theta_i| + scale_i).
    """
    theta = np.asarray(theta0, dtype=float).copy()
    scale = np.asarray(scale, dtype=float)
    w = 1.0 / sigma
    r = (func(theta) - y) * w
    cost = r @ r
    lam = 1e-3
    for it in range(1, MAX_ITER + 1):
        j = jac(theta) * w[:, None]
        jtj = j.T @ j
        g = j.T @ r
        diag = np.diag(jtj).copy()
        diag[diag == 0] = 1.0
        while True:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                if lam > 1e16:
                    raise FitDiverged("singular normal equations") from None
                continue
            trial = theta + step
            r_new = (func(trial) - y) * w
            cost_new = r_new @ r_new
            if np.isfinite(cost_new) and cost_new <= cost:
                theta, r, cost = trial, r_new, cost_new
                lam = max(lam / 10.0, 1e-12)
                break
            lam *= 10.0
            if lam > 1e16:
                # no downhill step left: at a minimum to machine precision
                return theta, it
        if np.all(np.abs(step) < XTOL * (np.abs(theta) + scale)):
            return theta, it
    raise FitDiverged(f"no convergence after {MAX_ITER} iterations")


def _sigma(y, weights):
    if weights is None:
        return np.ones_like(y)
    s = np.asarray(weights, dtype=float)
    positive = s[s > 0]
    if positive.size == 0:
        return np.ones_like(y)
    # zero standard errors (e.g. t = 0, where all realizations coincide) get the median
    return np.where(s > 0, s, np.median(positive))


def _exp_model(t):
    def f(th):
        return 0.5 * (1.0 + th[0] * np.exp(-th[1] * t))

    def j(th):
        e = np.exp(-th[1] * t)
        return np.column_stack([0.5 * e, -0.5 * th[0] * t * e])

    return f, j


def fit_exponential(times, rho11, weights=None) -> FitResult:
    """Fit rho11(t) = (1 + A exp(-D t)) / 2 by weighted least squares."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(rho11, dtype=float)
    if len(t) < 10:
        raise ValueError("need at least 10 points")
    c = 2.0 * y - 1.0
    half = slice(0, len(t) // 2)
    ok = c[half] > 0
    if ok.sum() < 2 or np.max(np.abs(c)) < 1e-12:
        raise DegenerateSeries("2*rho11 - 1 has no decaying signal to fit")
    slope, intercept = np.polyfit(t[half][ok], np.log(c[half][ok]), 1)
    d0 = max(-slope, 1e-12 / max(t[-1], 1e-300))
    a0 = float(np.exp(intercept))

    nonpos = np.nonzero(c <= 0)[0]
    if nonpos.size and d0 * (t[nonpos[0]] - t[0]) < 3.0:
        warnings.warn(
            f"2*rho11-1 changes sign at t={t[nonpos[0]]:.4g}, before 3 e-foldings",
            DegenerateSeriesWarning,
            stacklevel=2,
        )

    f, j = _exp_model(t)
    sigma = _sigma(y, weights)
    theta, n_iter = levenberg_marquardt(f, j, [a0, d0], y, sigma, scale=[1.0, d0])
    if abs(theta[0]) < 1e-8:
        raise DegenerateSeries("fitted amplitude vanishes; decay rate unidentifiable")
    rms = float(np.sqrt(np.mean((f(theta) - y) ** 2)))
    return FitResult(
        model="exponential",
        params={"D": float(theta[1]), "A": float(theta[0])},
        rms_residual=rms,
        converged=True,
        n_iter=n_iter,
        notes={"weighted": weights is not None, "window": [float(t[0]), float(t[-1])]},
    )


def _damped_model(t):
    def f(th):
        a, g, w, ph = th
        u = w * t + ph
        return a * np.exp(-g * t) * (np.cos(u) + (g / w) * np.sin(u))

    def j(th):
        a, g, w, ph = th
        u = w * t + ph
        e = np.exp(-g * t)
        s, co = np.sin(u), np.cos(u)
        base = co + (g / w) * s
        return np.column_stack(
            [
                e * base,
                a * e * (-t * base + s / w),
                a * e * (-t * s - (g / w**2) * s + (g / w) * t * co),
                a * e * (-s + (g / w) * co),
            ]
        )

    return f, j


def _zero_crossings(t, y):
    idx = np.nonzero(np.signbit(y[:-1]) != np.signbit(y[1:]))[0]
    # linear interpolation of the crossing instant
    return t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])


def _initial_oscillation(t, y):
    cross = _zero_crossings(t, y)
    if len(cross) >= 2:
        # merge noise-induced crossings that sit much closer than the typical half period
        spacing = np.median(np.diff(cross))
        kept = [cross[0]]
        for c in cross[1:]:
            if c - kept[-1] > 0.25 * spacing:
                kept.append(c)
        cross = np.array(kept)
    if len(cross) < 3:
        raise TooFewOscillations(f"only {len(cross)} zero crossings found")
    half_period = float(np.mean(np.diff(cross)))
    omega0 = np.pi / half_period
    edges = np.concatenate(([t[0]], cross, [t[-1]]))
    ext_t, ext_v = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (t >= lo) & (t <= hi)
        if m.sum() == 0:
            continue
        i = np.argmax(np.abs(y[m]))
        ext_t.append(t[m][i])
        ext_v.append(abs(y[m][i]))
    if len(ext_v) < 4:
        raise TooFewOscillations(f"only {len(ext_v)} extrema found")
    ext_t, ext_v = np.array(ext_t), np.array(ext_v)
    good = ext_v > 0
    slope = np.polyfit(ext_t[good], np.log(ext_v[good]), 1)[0]
    return omega0, max(-slope, 0.0), float(ext_v[0])


def fit_damped_cosine(times, pz, weights=None) -> FitResult:
    """Fit P_z(t) = A exp(-g t) (cos(w t + ph) + (g/w) sin(w t + ph)).

    With A = 1 and ph = 0 this is the Bloch closed form, where g is half the
    transverse damping rate.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(pz, dtype=float)
    omega0, gamma0, a0 = _initial_oscillation(t, y)
    f, j = _damped_model(t)
    sigma = _sigma(y, weights)
    theta, n_iter = levenberg_marquardt(
        f, j, [a0, gamma0, omega0, 0.0], y, sigma, scale=[1.0, omega0, omega0, 1.0]
    )
    a, g, w, ph = theta
    if w < 0:
        # (w, ph) -> (-w, -ph) with g/w flipping sign is not the same model; refuse it
        raise FitDiverged("fit converged to a negative frequency")
    rms = float(np.sqrt(np.mean((f(theta) - y) ** 2)))
    return FitResult(
        model="damped_cosine",
        params={"gamma": float(g), "omega": float(w), "phase": float(ph), "amplitude": float(a)},
        rms_residual=rms,
        converged=True,
        n_iter=n_iter,
        notes={"weighted": weights is not None, "window": [float(t[0]), float(t[-1])]},
    )


def relative_deviation(measured: float, predicted: float) -> float:
    return measured / predicted - 1.0


def compare_report(
    fit: FitResult,
    predicted_d: float,
    frame_summary: dict,
    config_echo: dict | None = None,
    leakage_max: float | None = None,
    tolerances: dict | None = None,
) -> dict:
    """Collect fit, prediction and frame data into a report with pass/fail flags."""
    if not fit.converged:
        raise UsageError("compare_report needs a converged fit")
    tol = {"d_rel": 0.20, "omega_rel": 0.05, "gamma_rel": 0.25, "leakage_max": 0.01}
    tol.update(tolerances or {})
    checks = {}
    report = {
        "units": "hbar = 1; time in inverse energy units",
        "model": fit.model,
        "fit": fit.to_dict(),
        "D_pred": predicted_d,
        "frame": frame_summary,
    }
    if fit.model == "exponential":
        d_hat = fit.params["D"]
        dev = relative_deviation(d_hat, predicted_d)
        report.update(D_fit=d_hat, relative_deviation=dev)
        checks["D_within_tolerance"] = abs(dev) <= tol["d_rel"]
    elif fit.model == "damped_cosine":
        g, w = fit.params["gamma"], fit.params["omega"]
        v_x = frame_summary["v_x"]
        report.update(
            gamma_fit=g,
            gamma_pred=predicted_d / 2,
            gamma_relative_deviation=relative_deviation(g, predicted_d / 2),
            omega_fit=w,
            omega_relative_deviation=relative_deviation(w, v_x),
            D_fit=2 * g,
            relative_deviation=relative_deviation(2 * g, predicted_d),
        )
        checks["omega_within_tolerance"] = abs(report["omega_relative_deviation"]) <= tol["omega_rel"]
        checks["gamma_within_tolerance"] = abs(report["gamma_relative_deviation"]) <= tol["gamma_rel"]
    else:
        raise UsageError(f"unknown fit model {fit.model!r}")
    if leakage_max is not None:
        report["leakage_max"] = leakage_max
        checks["leakage_small"] = leakage_max <= tol["leakage_max"]
    report["isolation"] = frame_summary.get("isolation")
    report["tolerances"] = tol
    report["checks"] = checks
    report["passed"] = all(checks.values())
    if config_echo is not None:
        report["config"] = config_echo
    return report


def render_report(report: dict) -> str:
    lines = [f"model: {report['model']}  ({report['units']})"]
    if report["model"] == "exponential":
        lines.append(f"D fit      = {report['D_fit']:.6g}")
    else:
        lines.append(f"gamma fit  = {report['gamma_fit']:.6g}  (prediction D/2 = {report['gamma_pred']:.6g})")
        lines.append(f"omega fit  = {report['omega_fit']:.6g}  (V_x = {report['frame']['v_x']:.6g})")
    lines.append(f"D pred     = {report['D_pred']:.6g}")
    lines.append(f"deviation  = {100 * report['relative_deviation']:+.1f}%")
    if "leakage_max" in report:
        lines.append(f"leakage    = {report['leakage_max']:.3g} (max)")
    if report.get("isolation") is not None:
        lines.append(f"isolation  = {report['isolation']:.3g}")
    for name, ok in report["checks"].items():
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {name}")
    return "\n".join(lines)
