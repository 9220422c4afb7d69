"""Shared fixtures.  The full 1D system is computed once per session."""

import numpy as np
import pytest

from stabcs.direct_cs import theta_trajectory
from stabcs.eig import eigvals_complex
from stabcs.model1d import BasisSpec, PotentialParams, build_complex_hamiltonian
from stabcs.pipeline import diabatize_graph
from stabcs.stabgraph import sweep, uniform_grid

THREADS = 4


@pytest.fixture(scope="session")
def system_params():
    return PotentialParams()


@pytest.fixture(scope="session")
def even_basis():
    return BasisSpec(parity="even")


@pytest.fixture(scope="session")
def system_graph(system_params, even_basis):
    return sweep(uniform_grid(-1.0, 1.0, 0.01), system_params, even_basis, threads=THREADS)


@pytest.fixture(scope="session")
def system_diabatization(system_graph, system_params, even_basis):
    return diabatize_graph(system_graph, 1.5388, 0.15, system_params, even_basis,
                           threads=THREADS, eta_span=(-1.0, 1.0))


@pytest.fixture(scope="session")
def system_model(system_diabatization):
    return system_diabatization.model()


@pytest.fixture(scope="session")
def system_benchmark(system_params, even_basis):
    return theta_trajectory(system_params, even_basis, np.arange(0.0, 0.41, 0.02),
                            threads=THREADS)


@pytest.fixture(scope="session")
def direct_spectrum_0025(system_params, even_basis):
    return eigvals_complex(build_complex_hamiltonian(0.025, 0.0, system_params, even_basis).matrix)


@pytest.fixture
def small_basis():
    return BasisSpec(L0=20.0, N=60)


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
