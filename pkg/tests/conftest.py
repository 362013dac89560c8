import pytest

from intfsim import gen_synthetic_profiles


@pytest.fixture(scope="session")
def table():
    """Default synthetic profile table shared across the suite."""
    return gen_synthetic_profiles()
