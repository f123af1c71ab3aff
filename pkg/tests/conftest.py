"""Shared fixtures: the two reference pipeline runs are reused across files."""
import pytest

from atomcbs import AtomFieldParams, compute_cbs

WEAK = AtomFieldParams(rabi=0.1, detuning=-5.0)
STRONG = AtomFieldParams(rabi=10.0, detuning=-5.0)


@pytest.fixture(scope="session")
def weak_cbs():
    return compute_cbs(WEAK, with_totals=True)


@pytest.fixture(scope="session")
def strong_cbs():
    return compute_cbs(STRONG, with_totals=True)
