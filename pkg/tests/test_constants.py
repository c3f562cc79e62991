from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, strategies as st

from fuchsian.constants import (I3PLUS_REFERENCE, PUBLIC_NAMES, catalan, clausen2, dilog,
                                eval_constant, i3_crosscheck, i3_plus, i4_minus, matches_printed,
                                trigamma, zeta3)
from fuchsian.errors import PreconditionError


def _close(x, y, digits):
    with mp.workdps(digits + 20):
        return abs(x - y) <= mp.mpf(10) ** -digits * max(1, abs(y))


def test_pi_50():
    v = eval_constant("pi", 50)
    assert mp.nstr(v, 51, strip_zeros=False) == "3.14159265358979323846264338327950288419716939937511"


def test_i3plus_printed_digits():
    assert matches_printed(eval_constant("I3plus", 50), I3PLUS_REFERENCE)
    assert matches_printed(i3_plus(60), I3PLUS_REFERENCE)


def test_zeta3_two_methods():
    assert _close(zeta3(30, "apery"), zeta3(30, "direct"), 30)
    with mp.workdps(120):
        assert _close(zeta3(100), mp.zeta(3), 100)


def test_zeta3_unknown_method():
    with pytest.raises(PreconditionError):
        zeta3(30, "magic")


def test_catalan_against_mpmath():
    with mp.workdps(100):
        assert _close(catalan(80), +mp.catalan, 80)


def test_unknown_constant():
    with pytest.raises(PreconditionError, match="unknown constant"):
        eval_constant("tau", 30)


@pytest.mark.parametrize("name", PUBLIC_NAMES)
def test_precision_self_consistency(name):
    P = 60
    assert _close(eval_constant(name, P), eval_constant(name, P + 10), P)


def test_clausen_special_values():
    assert clausen2(0, 40) == 0
    assert clausen2(mp.pi, 40) == 0
    with mp.workdps(60):
        expected = (mp.pi**2 / 3 + 2 - 2 * mp.pi**2 * i3_plus(60)) / (3 * mp.sqrt(3))
        assert _close(clausen2(mp.pi / 3, 50), expected, 45)
        assert _close(clausen2(mp.pi / 3, 50), mp.clsin(2, mp.pi / 3), 45)


@given(st.floats(min_value=0.01, max_value=3.1))
def test_clausen_odd(theta):
    with mp.workdps(40):
        assert abs(clausen2(-theta, 30) + clausen2(theta, 30)) < mp.mpf(10) ** -28


@given(st.floats(min_value=0.05, max_value=1.5))
def test_clausen_duplication(theta):
    with mp.workdps(40):
        t = mp.mpf(theta)
        lhs = clausen2(2 * t, 30)
        rhs = 2 * clausen2(t, 30) - 2 * clausen2(mp.pi - t, 30)
        assert abs(lhs - rhs) < mp.mpf(10) ** -27


def test_dilog_values():
    assert dilog(0, 30) == 0
    with mp.workdps(80):
        assert _close(dilog(mp.mpf(1) / 2, 60), mp.pi**2 / 12 - mp.ln2**2 / 2, 60)


@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_dilog_against_polylog(z):
    if z.imag == 0 and z.real >= 1:
        return
    with mp.workdps(50):
        assert abs(dilog(z, 30) - mp.polylog(2, z)) < mp.mpf(10) ** -27 * max(1, abs(mp.polylog(2, z)))


def test_dilog_cut_needs_a_side():
    with pytest.raises(PreconditionError, match="side"):
        dilog(3, 30)
    with mp.workdps(40):
        up = dilog(3, 30, side="+")
        assert abs(up - mp.polylog(2, mp.mpc(3, 1e-30))) < mp.mpf(10) ** -25
        assert abs(mp.im(up) + mp.im(dilog(3, 30, side="-"))) < mp.mpf(10) ** -28


def test_dilog_identity_for_i3plus():
    P = 60
    with mp.workdps(P + 20):
        x = mp.mpc(mp.mpf(1) / 2, -mp.sqrt(3) / 2)
        # Li2(1 - x) = dilog(x) in the Maple convention
        lhs = i3_plus(P) - (mp.mpf(1) / 6 + 1 / mp.pi**2)
        rhs = -3 * mp.sqrt(3) / (2 * mp.pi**2) * mp.im(dilog(1 - x, P))
        assert abs(lhs - rhs) < mp.mpf(10) ** -(P - 5)


def test_trigamma_values():
    with mp.workdps(70):
        assert _close(trigamma(1, 50), mp.pi**2 / 6, 50)
        assert _close(trigamma(Fraction(1, 2), 50), mp.pi**2 / 2, 50)
        assert _close(trigamma(Fraction(1, 6), 50), mp.psi(1, mp.mpf(1) / 6), 50)


def test_trigamma_domain():
    with pytest.raises(PreconditionError):
        trigamma(0, 30)


def test_polygamma_form_of_i3plus():
    P = 50
    with mp.workdps(P + 20):
        s = (trigamma(Fraction(2, 3), P) + trigamma(Fraction(5, 6), P)
             - trigamma(Fraction(1, 6), P) - trigamma(Fraction(1, 3), P))
        assert _close(s / (16 * mp.pi**2) + mp.mpf(1) / 6 + 1 / mp.pi**2, i3_plus(P), P - 5)


def test_i4minus():
    with mp.workdps(60):
        v = i4_minus(30)
        oracle = (4 * mp.pi**2 / 9 - mp.mpf(1) / 6 - 7 * mp.zeta(3) / 2) / (16 * mp.pi**3)
        assert _close(v, oracle, 30)
        assert mp.mpf("2.54e-5") < v < mp.mpf("2.55e-5")


def test_crosscheck_50():
    rep = i3_crosscheck(50)
    assert all(r < mp.mpf(10) ** -45 for r in rep["residuals"].values())
    assert rep["reference_match"]
    assert rep["barnes_g"] == "not evaluated"


def test_crosscheck_needs_digits():
    with pytest.raises(PreconditionError):
        i3_crosscheck(20)
