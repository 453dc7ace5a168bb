import math

import numpy as np
import pytest

from cmctori import generate_torus, solve_C_for_m

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def flagship_C():
    return solve_C_for_m(1.0, 3).C


@pytest.fixture(scope="session")
def flagship_mesh(flagship_C):
    return generate_torus(1.0, flagship_C, 3, 384, 256)


@pytest.fixture(scope="session")
def small_torus(flagship_C):
    return generate_torus(1.0, flagship_C, 3, 96, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def geodesic_sphere_mesh(rho, n_theta=40, n_phi=80, center_axis=3):
    """Geodesic sphere of radius rho about e4 with outward normal, as raw arrays."""
    th = np.linspace(0.05, math.pi - 0.05, n_theta)
    ph = 2 * math.pi * np.arange(n_phi) / n_phi
    T, P = np.meshgrid(th, ph, indexing="ij")
    w = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1)
    F = np.concatenate([math.sin(rho) * w, np.full(T.shape + (1,), math.cos(rho))], axis=-1)
    nu = np.concatenate([math.cos(rho) * w, np.full(T.shape + (1,), -math.sin(rho))], axis=-1)
    return T, P, F, nu


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
