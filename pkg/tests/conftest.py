"""Shared fixtures: default lattice, bath, and eigenbasis.

Session-scoped because the default (N = 21) diagonalization and the
kernel tables behind it are reused by most modules and are cheap to keep
alive, expensive to rebuild per test.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gaah.bath import BathParams
from gaah.model import (
    ModelParams,
    build_hamiltonian,
    diagonalize,
    highest_excited_state,
)

settings.register_profile(
    "gaah",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("gaah")


@pytest.fixture(scope="session")
def model() -> ModelParams:
    """Default lattice: N = 21, lam = 1, Delta = 2.5, a = 0."""
    return ModelParams()


@pytest.fixture(scope="session")
def bath() -> BathParams:
    """Default Ohmic bath: eta = 0.1, omega_c = 10, s = 1."""
    return BathParams()


@pytest.fixture(scope="session")
def eig(model):
    return diagonalize(build_hamiltonian(model))


@pytest.fixture(scope="session")
def es_state(eig) -> np.ndarray:
    """Highest excited eigenstate of the default closed lattice."""
    return highest_excited_state(eig)
