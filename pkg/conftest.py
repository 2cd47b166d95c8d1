"""Gemeinsame Fixtures der Testsuite."""
import math

import numpy as np
import pytest

from src.model import CouplingParams


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: lange Läufe (große N, volle Prüfsuite)")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def unbroken_params():
    """Innerhalb des Einheitskreises, fern der kritischen Linien."""
    return CouplingParams.from_polar(0.45, 0.7, N=4)


@pytest.fixture
def broken_params():
    """Außerhalb des Einheitskreises mit großem ξ; ε⁹ und ε¹¹ sind dort komplex."""
    return CouplingParams(0.3, 1.3, N=4)


@pytest.fixture
def sample_points():
    return [
        (0.4, CouplingParams.from_polar(0.45, 0.7)),
        (1.3, CouplingParams.from_polar(1.25, 2.1)),
        (2.2, CouplingParams(0.3, 1.3)),
        (math.pi / 3, CouplingParams(-0.8, 0.2)),
    ]
