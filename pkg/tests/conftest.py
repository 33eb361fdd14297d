import numpy as np
import pytest

from farfield_kalman import ExperimentConfig, ForwardModel, make_directions, make_grid

# Filled by test_acceptance; printed at the end of the session.
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def config():
    return ExperimentConfig()


@pytest.fixture(scope="session")
def small_model():
    """M=2 cells per half axis on a 16-point periodic grid."""
    from farfield_kalman.forward import make_fine_grid
    return ForwardModel(3.0, make_fine_grid(3.0, 2, 16), make_directions(6), tol=1e-12)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
