import pytest
from hypothesis import HealthCheck, settings

from dominofill import build_alphabet, validate_family

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def flagship():
    """The 2-d family with shapes (3,2) and (2,3); W=(6,6), collar 26."""
    return validate_family([(3, 2), (2, 3)])


@pytest.fixture(scope="session")
def flagship_alphabet(flagship):
    return build_alphabet(flagship)


@pytest.fixture(scope="session")
def line_family():
    """The 1-d family with shapes (2,) and (3,); W=(6,), collar 14."""
    return validate_family([(2,), (3,)])


@pytest.fixture(scope="session")
def line_alphabet(line_family):
    return build_alphabet(line_family)
