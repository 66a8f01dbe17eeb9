import numpy as np
import pytest

from dirac_darboux import kernels

BACKENDS = ["python"] + (["cython"] if kernels.rk4_linear_ext is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available RK4 backend."""
    fn = kernels.rk4_linear_py if request.param == "python" else kernels.rk4_linear_ext
    monkeypatch.setattr(kernels, "rk4_linear", fn)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20101014)


def random_matrix(rng, scale=1.0):
    return scale * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
