from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import HealthCheck, settings

from fuchsian.ode import FuchsianODE

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def gauss_ode(a, b, c) -> FuchsianODE:
    """z(1-z) y'' + (c - (a+b+1) z) y' - ab y = 0."""
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    return FuchsianODE(((-a * b,), (c, -(a + b + 1)), (0, 1, -1)))


def hyp_series(a, b, c, N):
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    out, t = [], Fraction(1)
    for k in range(N + 1):
        out.append(t)
        t = t * (a + k) * (b + k) / ((c + k) * (k + 1))
    return out


@pytest.fixture
def gauss():
    return gauss_ode(Fraction(1, 3), Fraction(1, 5), Fraction(1, 2))


@pytest.fixture
def resonant_gauss():
    return gauss_ode(Fraction(1, 2), Fraction(1, 2), 1)


@pytest.fixture(autouse=True)
def _reset_mp():
    # tests must not leak working precision into each other
    dps = mp.mp.dps
    yield
    mp.mp.dps = dps
