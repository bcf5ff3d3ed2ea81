import pytest

from neckflow.surface import SurfaceProfile


@pytest.fixture(scope="session")
def prof4():
    return SurfaceProfile(r=4.0, eps0=1.0)


@pytest.fixture(scope="session")
def prof6():
    return SurfaceProfile(r=6.0, eps0=1.0)


@pytest.fixture(scope="session")
def prof_narrow():
    """A narrower neck; a = 1 + 0.5^4 = 1.0625 is exactly representable."""
    return SurfaceProfile(r=4.0, eps0=0.5)
