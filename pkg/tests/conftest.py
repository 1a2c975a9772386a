import numpy as np
import pytest

import kirchhoffsim as ks


@pytest.fixture(scope="session")
def base_problem():
    """gamma=1 three-mode problem used throughout the suite."""
    return ks.build_problem([1, 2, 3], 1.0, 0.05, [1, 0.5, 0.25], [0, 0, 0])


@pytest.fixture(scope="session")
def gamma1_trace(base_problem):
    """Long-horizon run backing the limit-constant checks."""
    return ks.evolve(base_problem, 1e5)


@pytest.fixture(scope="session")
def medium_trace(base_problem):
    """Shorter run for diagnostics where raw weights stay representable."""
    return ks.evolve(base_problem, 1e3)


@pytest.fixture(scope="session")
def linear_power_trace():
    """Prescribed-coefficient run: b = 1/(1+t) on two modes."""
    spec = ks.Spectrum(np.array([1.0, 2.0]))
    coeff = ks.power_coefficient(1.0, 1.0)
    return ks.evolve_linear(spec, coeff, 0.05, [1.0, 0.5], [0.0, 0.3], 1e4)
