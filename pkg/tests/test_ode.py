from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, strategies as st

from conftest import gauss_ode
from fuchsian.errors import IrregularSingularityError, PreconditionError
from fuchsian.kernel import Poly
from fuchsian.ode import (FuchsianODE, indicial_exponents, is_apparent, is_fuchsian, point_label,
                          singular_points, wronskian_logderiv_check)

F = Fraction
chi1_ode = FuchsianODE.from_lists([["-1"], ["0", "1", "-4"]])


def labels(ode):
    return [sp.label for sp in singular_points(ode, classify=False)]


def test_normalization_removes_common_factor_and_scales():
    # (w - 1) * (2 y' - y) / 3
    ode = FuchsianODE.from_lists([["1/3", "-1/3"], ["-2/3", "2/3"]])
    assert ode.to_dict() == {"order": 1, "coeffs": [["-1"], ["2"]]}


def test_json_roundtrip():
    ode = gauss_ode(F(1, 3), F(1, 5), F(1, 2))
    assert FuchsianODE.from_dict(ode.to_dict()) == ode


def test_json_rejects_wrong_order():
    with pytest.raises(PreconditionError):
        FuchsianODE.from_dict({"order": 3, "coeffs": [["1"], ["1"]]})


def test_singular_points_chi1():
    assert labels(chi1_ode) == ["0", "1/4", "inf"]


def test_singular_points_constant_leading():
    assert labels(FuchsianODE.from_lists([["0"], ["0"], ["1"]])) == ["inf"]


def test_singular_points_order7_shape():
    lead = Poly.from_roots([0] * 7 + [1, F(-1, 2)] + [F(1, 4)] * 5 + [F(-1, 4)] * 3) * Poly((1, 3, 4))
    ode = FuchsianODE(tuple([Poly((1,))] * 7 + [lead]))
    pts = singular_points(ode, classify=False)
    assert [p.label for p in pts[:5]] == ["-1/2", "-1/4", "0", "1/4", "1"]
    assert pts[-1].label == "inf"
    quad = pts[5:7]
    with mp.workdps(30):
        values = sorted((complex(p.location.value(30)) for p in quad), key=lambda z: z.imag)
    r7 = 7 ** 0.5
    assert abs(values[0] - complex(-3, -r7) / 8) < 1e-12
    assert abs(values[1] - complex(-3, r7) / 8) < 1e-12


def test_indicial_gauss():
    g = gauss_ode(F(1, 2), F(1, 2), 1)
    assert indicial_exponents(g, 0) == [0, 0]
    assert indicial_exponents(g, "inf") == [F(1, 2), F(1, 2)]


def test_indicial_pole():
    assert indicial_exponents(chi1_ode, "1/4") == [-1]


def test_indicial_ordinary_point():
    g = gauss_ode(F(1, 3), F(1, 5), F(1, 2))
    assert indicial_exponents(g, F(1, 3)) == [0, 1]


def test_irregular_point_raises():
    ode = FuchsianODE.from_lists([["-1"], ["0"], ["1"]])    # y'' - y
    with pytest.raises(IrregularSingularityError):
        indicial_exponents(ode, "inf")


def test_is_fuchsian():
    assert is_fuchsian(gauss_ode(F(1, 3), F(1, 5), F(1, 2)))[0]
    assert is_fuchsian(chi1_ode)[0]
    ok, bad = is_fuchsian(FuchsianODE.from_lists([["-1"], ["0"], ["1"]]))
    assert not ok and [point_label(p) for p in bad] == ["inf"]


def test_apparent_examples():
    assert is_apparent(FuchsianODE.from_lists([["0"], ["-2"], ["0", "1"]]), 0)      # {1, w^3}
    assert not is_apparent(FuchsianODE.from_lists([["0"], ["1"], ["0", "1"]]), 0)   # {1, ln w}
    assert not is_apparent(gauss_ode(F(1, 2), F(1, 2), 1), 0)


def test_apparent_needs_enough_terms():
    with pytest.raises(PreconditionError, match="increase T"):
        is_apparent(FuchsianODE.from_lists([["0"], ["-2"], ["0", "1"]]), 0, T=2)


def _fuchs_sum(ode):
    total = Fraction(0)
    pts = singular_points(ode)
    for sp in pts:
        total += sum(sp.exponents)
    n = ode.order
    return total, Fraction(n * (n - 1), 2) * (len(pts) - 2)


def test_fuchs_relation_gauss():
    s, expected = _fuchs_sum(gauss_ode(F(1, 3), F(1, 5), F(1, 2)))
    assert s == expected


@given(st.fractions(-3, 3, max_denominator=7), st.fractions(-3, 3, max_denominator=7),
       st.fractions(-3, 3, max_denominator=7))
def test_fuchs_relation_random_gauss(a, b, c):
    if a * b == 0:
        return   # degenerate: a_0 vanishes and the point count changes
    s, expected = _fuchs_sum(gauss_ode(a, b, c))
    assert s == expected


def test_wronskian_gauss():
    g = gauss_ode(F(1, 2), F(1, 2), 1)
    assert wronskian_logderiv_check(g, [F(1, 5)], 50) < mp.mpf(10) ** -35


def test_wronskian_trivial():
    assert wronskian_logderiv_check(FuchsianODE.from_lists([["0"], ["0"], ["1"]]), [F(1, 3)], 30) \
        < mp.mpf(10) ** -25


def test_wronskian_order3():
    ode = FuchsianODE.from_lists([["1", "2"], ["-1", "0", "3"], ["2", "1"], ["1", "-1", "1"]])
    assert wronskian_logderiv_check(ode, [F(1, 3)], 100) < mp.mpf(10) ** -85


def test_wronskian_too_close():
    with pytest.raises(PreconditionError):
        wronskian_logderiv_check(chi1_ode, [F(1, 4) + F(1, 10**6)], 30)
