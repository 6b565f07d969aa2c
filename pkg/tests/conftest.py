"""
Shared test setup: src/ on the import path, hypothesis profiles, fixtures.
"""

import os
import sys

import hypothesis
import pytest

# Add src to path for imports (same as src/main.py)
sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from services.cone_service import Cone  # noqa: E402
from services.field_service import QuadField  # noqa: E402

hypothesis.settings.register_profile("fast", max_examples=25, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fast"))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical acceptance checks")


@pytest.fixture
def rationals():
    return QuadField.rationals()


@pytest.fixture
def gaussian():
    return QuadField.quadratic(-1)


@pytest.fixture
def sqrt2():
    return QuadField.quadratic(2)


@pytest.fixture
def unit_square(gaussian):
    """N{1, i}"""
    return Cone.of(gaussian, 1, (0, 1))


@pytest.fixture
def ray(rationals):
    return Cone.of(rationals, 1)
