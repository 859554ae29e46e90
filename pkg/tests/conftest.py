"""
Shared fixtures and hypothesis profiles

Select a profile with GSM_HYPOTHESIS_PROFILE (default, ci, thorough).
"""

import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

# Add parent directory to path so `services`, `models`, ... import as in the app
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from models import Graph  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=(HealthCheck.too_slow,))
settings.register_profile("ci", deadline=None, max_examples=30,
                          suppress_health_check=(HealthCheck.too_slow, HealthCheck.data_too_large))
settings.register_profile("thorough", deadline=None, max_examples=500,
                          suppress_health_check=(HealthCheck.too_slow,))
settings.load_profile(os.getenv("GSM_HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def k2() -> Graph:
    return Graph(n=2, edges=((0, 1),))


@pytest.fixture
def k3() -> Graph:
    return Graph(n=3, edges=((0, 1), (0, 2), (1, 2)))


@pytest.fixture
def p4() -> Graph:
    return Graph(n=4, edges=((0, 1), (1, 2), (2, 3)))


@pytest.fixture
def star4() -> Graph:
    """K_{1,4} centred on node 0"""
    return Graph(n=5, edges=((0, 1), (0, 2), (0, 3), (0, 4)))
