import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squidnoise.analysis import (
    DegenerateSeries,
    DegenerateSeriesWarning,
    FitResult,
    TooFewOscillations,
    UsageError,
    compare_report,
    fit_damped_cosine,
    fit_exponential,
    render_report,
)
from squidnoise.bloch import closed_form_damped

T = np.linspace(0, 2000, 401)


def rho11(d, a=1.0, t=T):
    return 0.5 * (1 + a * np.exp(-d * t))


def test_exponential_round_trip():
    fit = fit_exponential(T, rho11(0.00175))
    assert fit.converged
    assert fit.params["D"] == pytest.approx(0.00175, rel=1e-6)
    assert fit.params["A"] == pytest.approx(1.0, rel=1e-6)
    assert fit.rms_residual < 1e-10


@given(st.floats(2e-4, 5e-3), st.floats(0.8, 1.1))
@settings(max_examples=25, deadline=None)
def test_exponential_round_trip_property(d, a):
    fit = fit_exponential(T, rho11(d, a))
    assert fit.params["D"] == pytest.approx(d, rel=1e-6)
    assert fit.params["A"] == pytest.approx(a, rel=1e-6)


@pytest.mark.parametrize("c", [0.1, 3.0, 250.0])
def test_exponential_time_scale_equivariance(c):
    rng = np.random.default_rng(0)
    y = rho11(0.0015) + 0.01 * rng.standard_normal(T.size)
    d1 = fit_exponential(T, y).params["D"]
    d2 = fit_exponential(c * T, y).params["D"]
    assert d2 == pytest.approx(d1 / c, rel=1e-8)


def test_equal_weights_reduce_to_unweighted():
    rng = np.random.default_rng(1)
    y = rho11(0.0015) + 0.01 * rng.standard_normal(T.size)
    plain = fit_exponential(T, y)
    weighted = fit_exponential(T, y, weights=np.full(T.size, 0.037))
    assert weighted.params["D"] == pytest.approx(plain.params["D"], rel=1e-9)
    assert weighted.params["A"] == pytest.approx(plain.params["A"], rel=1e-9)


def test_constant_half_is_degenerate():
    with pytest.raises(DegenerateSeries):
        fit_exponential(T, np.full(T.size, 0.5))


def test_early_sign_change_warns():
    y = rho11(0.00175)
    y[5] = 0.49
    with pytest.warns(DegenerateSeriesWarning):
        fit_exponential(T, y)


def test_exponential_needs_points():
    with pytest.raises(ValueError):
        fit_exponential(T[:5], rho11(0.001, t=T[:5]))


def test_damped_cosine_round_trip():
    t = np.linspace(0, 2000, 1001)
    pz = closed_form_damped(0.02, 0.00175, t).p[:, 2]
    fit = fit_damped_cosine(t, pz)
    assert fit.params["gamma"] == pytest.approx(0.000875, rel=1e-6)
    assert fit.params["omega"] == pytest.approx(np.sqrt(0.02**2 - 0.000875**2), rel=1e-6)
    assert fit.params["omega"] == pytest.approx(0.02, rel=1e-3)
    assert fit.params["amplitude"] == pytest.approx(1.0, rel=1e-6)
    assert abs(fit.params["phase"]) < 1e-6


def test_damped_cosine_undamped():
    t = np.linspace(0, 2000, 1001)
    fit = fit_damped_cosine(t, np.cos(0.02 * t))
    assert abs(fit.params["gamma"]) <= 1e-8
    assert fit.params["omega"] == pytest.approx(0.02, rel=1e-8)


@given(st.floats(0.008, 0.03), st.floats(0.0, 0.004))
@settings(max_examples=20, deadline=None)
def test_damped_cosine_round_trip_property(vx, d):
    t = np.linspace(0, 6 * np.pi / vx * 2, 1200)
    fit = fit_damped_cosine(t, closed_form_damped(vx, d, t).p[:, 2])
    assert fit.params["gamma"] == pytest.approx(d / 2, rel=1e-6, abs=1e-10)
    assert fit.params["omega"] == pytest.approx(np.sqrt(vx**2 - d**2 / 4), rel=1e-6)


def test_damped_cosine_time_scale_equivariance():
    t = np.linspace(0, 2000, 801)
    rng = np.random.default_rng(2)
    y = closed_form_damped(0.015, 0.0015, t).p[:, 2] + 0.02 * rng.standard_normal(t.size)
    a = fit_damped_cosine(t, y).params
    b = fit_damped_cosine(10 * t, y).params
    assert b["gamma"] == pytest.approx(a["gamma"] / 10, rel=1e-8)
    assert b["omega"] == pytest.approx(a["omega"] / 10, rel=1e-8)


def test_too_few_oscillations():
    t = np.linspace(0, 100, 200)
    with pytest.raises(TooFewOscillations):
        fit_damped_cosine(t, np.cos(0.02 * t))


def test_report_paper_numbers():
    fit = FitResult("exponential", {"D": 0.00175, "A": 1.0}, 0.0, True)
    rep = compare_report(fit, 0.00164, {"v_x": 0.01, "phi_c": 0.9, "isolation": 30.0})
    assert rep["relative_deviation"] == pytest.approx(0.067, abs=5e-4)
    assert rep["passed"]
    assert "D fit" in render_report(rep)


def test_report_equal_values():
    fit = FitResult("exponential", {"D": 0.002, "A": 1.0}, 0.0, True)
    rep = compare_report(fit, 0.002, {"v_x": 0.01, "phi_c": 0.9, "isolation": 30.0}, leakage_max=0.5)
    assert rep["relative_deviation"] == 0.0
    assert not rep["checks"]["leakage_small"]
    assert not rep["passed"]


def test_report_damped_cosine():
    fit = FitResult("damped_cosine", {"gamma": 0.0008, "omega": 0.0102, "phase": 0.0, "amplitude": 1.0}, 0.0, True)
    rep = compare_report(fit, 0.0016, {"v_x": 0.01, "phi_c": 0.9, "isolation": 30.0})
    assert rep["gamma_relative_deviation"] == pytest.approx(0.0)
    assert rep["omega_relative_deviation"] == pytest.approx(0.02)
    assert rep["passed"]


def test_report_rejects_unconverged():
    fit = FitResult("exponential", {"D": 0.002, "A": 1.0}, 0.0, False)
    with pytest.raises(UsageError):
        compare_report(fit, 0.002, {"v_x": 0.01})


def test_no_warnings_on_clean_data():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fit_exponential(T, rho11(0.00175))
