from functools import lru_cache

import numpy as np
import pytest

from liouvspec.lindblad import VdpParams
from liouvspec.spectrum import vdp_spectrum


@lru_cache(maxsize=None)
def cached_spectrum(u=0.0, r=1.0, n_max=15, gamma=1.0, omega0=0.0):
    return vdp_spectrum(VdpParams(omega0=omega0, u=u, gamma=gamma, r=r, n_max=n_max))


@pytest.fixture
def spectrum_of():
    return cached_spectrum


@pytest.fixture
def rng():
    return np.random.default_rng(20181120)


def random_operator(rng, d, hermitian=False):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    if hermitian:
        x = x + x.conj().T
    return x


def random_density_matrix(rng, d):
    g = random_operator(rng, d)
    rho = g @ g.conj().T
    return rho / np.trace(rho)


ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    """Record one acceptance line; printed now and again in the terminal summary."""
    line = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
