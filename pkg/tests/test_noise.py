import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squidnoise.noise import (
    NoiseParams,
    NoiseTrace,
    NonstationaryWarning,
    TooShort,
    autocorr_integral,
    autocorrelation_curve,
    count_flips,
    realization_seed,
    telegraph_trace,
)

DEFAULT_NOISE = dict(delta=0.00032, omega_c=0.05, dt=0.5)


@pytest.fixture(scope="module")
def long_trace():
    return telegraph_trace(NoiseParams(n_steps=1_000_000, **DEFAULT_NOISE), seed=7)


def test_zero_amplitude_gives_zero_trace():
    t = telegraph_trace(NoiseParams(0.0, 0.05, 0.5, 1000), seed=1)
    assert np.all(t.values == 0)
    assert autocorr_integral(t) == 0.0


@given(st.integers(0, 2**64 - 1))
@settings(max_examples=25)
def test_values_are_plus_minus_delta(seed):
    t = telegraph_trace(NoiseParams(n_steps=500, **DEFAULT_NOISE), seed)
    assert set(np.unique(t.values)) <= {DEFAULT_NOISE["delta"], -DEFAULT_NOISE["delta"]}


def test_determinism():
    p = NoiseParams(n_steps=10_000, **DEFAULT_NOISE)
    np.testing.assert_array_equal(telegraph_trace(p, 99).values, telegraph_trace(p, 99).values)
    assert not np.array_equal(telegraph_trace(p, 99).values, telegraph_trace(p, 100).values)


def test_frozen_stream():
    # guards the documented generator (PCG64 + SeedSequence) against silent changes
    t = telegraph_trace(NoiseParams(n_steps=1000, **DEFAULT_NOISE), 12345)
    assert count_flips(t) == 12
    assert np.sign(t.values[0]) == 1
    assert realization_seed(20051101, 0) == 6158822082349981478


def test_realization_seeds_are_order_independent():
    forward = [realization_seed(3, a) for a in range(50)]
    backward = [realization_seed(3, a) for a in reversed(range(50))][::-1]
    assert forward == backward
    assert len(set(forward)) == 50


def test_flip_probability_exact_form():
    p = NoiseParams(n_steps=10, **DEFAULT_NOISE)
    assert p.flip_probability == pytest.approx(1 - np.exp(-0.0125), rel=1e-15)


def test_mean_is_small(long_trace):
    p = long_trace.params
    bound = 5 * p.delta / np.sqrt(p.n_steps * p.omega_c * p.dt)
    assert abs(long_trace.values.mean()) <= bound


def test_flip_count_binomial(long_trace):
    p = long_trace.params
    n, q = p.n_steps - 1, p.flip_probability
    assert abs(count_flips(long_trace) - n * q) <= 5 * np.sqrt(n * q * (1 - q))


def test_autocorr_integral_matches_closed_form(long_trace):
    est = autocorr_integral(long_trace)
    assert est == pytest.approx(DEFAULT_NOISE["delta"] ** 2 / DEFAULT_NOISE["omega_c"], rel=0.10)
    assert DEFAULT_NOISE["delta"] ** 2 / DEFAULT_NOISE["omega_c"] == pytest.approx(2.048e-6)


def test_autocorrelation_decay_rate(long_trace):
    p = long_trace.params
    n_lags = int(2.0 / (p.omega_c * p.dt))
    c = autocorrelation_curve(long_trace, n_lags)
    lags = np.arange(n_lags) * p.dt
    rate = -np.polyfit(lags, np.log(c / p.delta**2), 1)[0]
    assert rate == pytest.approx(p.omega_c, rel=0.10)


def test_constant_trace_is_flagged():
    p = NoiseParams(n_steps=1000, **DEFAULT_NOISE)
    const = NoiseTrace(values=np.full(1000, p.delta), seed=0, params=p)
    with pytest.warns(NonstationaryWarning):
        est = autocorr_integral(const, max_lag=100)
    assert est == pytest.approx(p.dt * p.delta**2 * (100 - 0.5), rel=1e-12)


def test_too_short():
    t = telegraph_trace(NoiseParams(n_steps=100, **DEFAULT_NOISE), 1)
    with pytest.raises(TooShort):
        autocorr_integral(t)


@pytest.mark.parametrize(
    "kw",
    [dict(delta=-1e-3), dict(omega_c=0.0), dict(dt=0.0), dict(dt=5.0), dict(n_steps=0)],
)
def test_noise_params_validation(kw):
    base = dict(delta=0.00032, omega_c=0.05, dt=0.5, n_steps=10) | kw
    with pytest.raises(ValueError):
        NoiseParams(**base)
