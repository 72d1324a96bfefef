import warnings

import numpy as np
import pytest

from squidnoise.config import load_config
from squidnoise.potential import HamiltonianParams, SingleWellWarning, build_basis
from squidnoise.spectrum import make_qubit_frame


@pytest.fixture(scope="session")
def config():
    return load_config()


@pytest.fixture(scope="session")
def params(config):
    return config.hamiltonian


@pytest.fixture(scope="session")
def basis(params, config):
    return build_basis(params, config.n_basis)


@pytest.fixture(scope="session")
def frame(params, basis):
    return make_qubit_frame(params, basis)


@pytest.fixture
def harmonic_params():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SingleWellWarning)
        return HamiltonianParams(mu=13.8228, beta=0.0, v0=14.15)


@pytest.fixture(params=range(5))
def rng(request):
    return np.random.default_rng(request.param)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(RESULTS):
        ok, detail = RESULTS[name]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
