from fractions import Fraction

import mpmath as mp
import pytest

from fuchsian.errors import PreconditionError
from fuchsian.frobenius import evaluate_basis, local_basis
from fuchsian.ode import FuchsianODE
from fuchsian.transport import connect, path_connect, taylor_step

from conftest import gauss_ode

A, B, C = Fraction(1, 3), Fraction(1, 5), Fraction(1, 2)


def _gamma_0_to_1(a, b, c):
    G = mp.gamma
    return mp.matrix([
        [G(c) * G(a + b - c) / (G(a) * G(b)), G(c) * G(c - a - b) / (G(c - a) * G(c - b))],
        [G(2 - c) * G(a + b - c) / (G(a - c + 1) * G(b - c + 1)),
         G(2 - c) * G(c - a - b) / (G(1 - a) * G(1 - b))],
    ])


def _gamma_0_to_inf(a, b, c):
    # along the positive imaginary axis; rows are F and w^(1-c) F(..), columns
    # are t^b, t^a (t = 1/w) with t^s real on the ray t in -i R+
    G = mp.gamma

    def coef(x, y, z):
        return G(z) * G(y - x) / (G(y) * G(z - x))

    def e(x):
        return mp.expj(mp.pi * x / 2)

    a1, b1, c1 = a - c + 1, b - c + 1, 2 - c
    return mp.matrix([
        [coef(b, a, c) * e(b), coef(a, b, c) * e(a)],
        [coef(b1, a1, c1) * e(1 - c) * e(b1), coef(a1, b1, c1) * e(1 - c) * e(a1)],
    ])


def _abc():
    return mp.mpf(1) / 3, mp.mpf(1) / 5, mp.mpf(1) / 2


def _dist(X, Y):
    with mp.workdps(200):
        return mp.mnorm(X - Y, 1)


def test_constant_solution():
    ode = FuchsianODE.from_lists([["0"], ["1"]])
    C01 = connect(ode, 0, 1, 30)
    assert _dist(C01.entries, mp.matrix([[1]])) < mp.mpf(10) ** -28


def test_rational_solution_sign():
    # 1/(1-w) = -(w-1)^-1
    ode = FuchsianODE.from_lists([["-1"], ["1", "-1"]])
    C01 = connect(ode, 0, 1, 30)
    assert _dist(C01.entries, mp.matrix([[-1]])) < mp.mpf(10) ** -28


def test_gauss_gamma_oracle_0_to_1(gauss):
    Cm = connect(gauss, 0, 1, 120)
    with mp.workdps(140):
        assert _dist(Cm.entries, _gamma_0_to_1(*_abc())) < mp.mpf(10) ** -100
    assert Cm.precision_estimate >= 100


def test_gauss_gamma_oracle_0_to_inf(gauss):
    Cm = path_connect(gauss, 0, "inf", ["1j"], 60, branch_from=1)
    with mp.workdps(80):
        assert _dist(Cm.entries, _gamma_0_to_inf(*_abc())) < mp.mpf(10) ** -50


def test_inverse_pair(gauss):
    P = 40
    pq = connect(gauss, 0, 1, P)
    qp = connect(gauss, 1, 0, P)
    with mp.workdps(P + 20):
        assert _dist(pq.entries * qp.entries, mp.eye(2)) < mp.mpf(10) ** -(P - 5)


def test_path_via_half_equals_direct(gauss):
    P = 40
    direct = connect(gauss, 0, 1, P)
    via = path_connect(gauss, 0, 1, ["1/2"], P)
    assert _dist(direct.entries, via.entries) < mp.mpf(10) ** -(P - 10)


def test_homotopic_paths_agree(gauss):
    P = 50
    direct = connect(gauss, 0, 1, P)
    above = path_connect(gauss, 0, 1, ["0.25+0.25j", "0.5+0.2j", "0.6"], P, branch_from=1)
    # the basis at 1 is read on the ray the path arrives along, so both
    # detours come back to the real axis before landing
    below = path_connect(gauss, 0, 1, ["0.3-0.4j", "0.7-0.1j", "0.8"], P, branch_from=1)
    assert _dist(direct.entries, above.entries) < mp.mpf(10) ** -(P - 10)
    assert _dist(direct.entries, below.entries) < mp.mpf(10) ** -(P - 10)


def test_composition_through_an_intermediate_singularity():
    # 1/4 lies between 0 and 1; composing C(0,1/4) C(1/4,1) must match a path
    # that stays above 1/4, with the middle basis read on the same side
    ode = FuchsianODE.from_lists([["1"], ["1", "-5", "4"], ["0", "1", "-5", "4"]])
    P = 40
    up = "0.25+0.1j"
    left = path_connect(ode, 0, "1/4", [up], P, branch_from=1)
    right = path_connect(ode, "1/4", 1, [up, "0.6+0.1j"], P)
    whole = path_connect(ode, 0, 1, [up, "0.6+0.1j"], P, branch_from=1)
    with mp.workdps(P + 20):
        assert _dist(left.entries * right.entries, whole.entries) < mp.mpf(10) ** -(P - 12)


def test_abel_determinant(gauss):
    # det C is the ratio of the Wronskians of the two bases at any common point
    P = 40
    Cm = connect(gauss, 0, 1, P)
    w = mp.mpf("0.55")
    with mp.workdps(P + 20):
        Wp = mp.det(evaluate_basis(local_basis(gauss, 0, T=200, dps=P + 20), w, digits=P + 10))
        Wq = mp.det(evaluate_basis(local_basis(gauss, 1, T=200, dps=P + 20), w, digits=P + 10,
                                   branch=-1))
        assert abs(mp.det(Cm.entries) - Wp / Wq) < mp.mpf(10) ** -(P - 10)


def test_taylor_step_closed_form():
    ode = FuchsianODE.from_lists([["-1"], ["1", "-1"]])
    F1 = taylor_step(ode, 0, mp.mpf(1) / 4, mp.matrix([[1]]), 50)
    with mp.workdps(70):
        assert abs(F1[0, 0] - mp.mpf(4) / 3) < mp.mpf(10) ** -50


def test_taylor_step_zero_length(gauss):
    F0 = mp.matrix([[1, 2], [3, 5]])
    F1 = taylor_step(gauss, mp.mpf(1) / 5, mp.mpf(1) / 5, F0, 30)
    assert _dist(F0, F1) < mp.mpf(10) ** -30


def test_taylor_step_chain_matches_basis(gauss):
    P = 40
    with mp.workdps(P + 20):
        basis = local_basis(gauss, 0, T=250, dps=P + 20)
        F0 = evaluate_basis(basis, mp.mpf(1) / 5, digits=P + 10)
        chain = [mp.mpf(1) / 5, mp.mpf(1) / 4, mp.mpf(7) / 20, mp.mpf(2) / 5]
        F1 = F0
        for z0, z1 in zip(chain, chain[1:]):
            F1 = taylor_step(gauss, z0, z1, F1, P)
        direct = evaluate_basis(basis, mp.mpf(2) / 5, digits=P + 10)
        assert _dist(F1, direct) < mp.mpf(10) ** -(P - 10)


def test_taylor_step_too_long():
    ode = FuchsianODE.from_lists([["-1"], ["1", "-1"]])
    with pytest.raises(PreconditionError):
        taylor_step(ode, 0, mp.mpf("0.6"), mp.matrix([[1]]), 30)


def test_trivial_loop_is_identity(gauss):
    loop = path_connect(gauss, 0, 0, (), 30)
    assert _dist(loop.entries, mp.eye(2)) == 0


def test_no_overlap_asks_for_a_path():
    # singularities at 0, 1/4 and 1: the disks at 0 and 1 do not meet
    ode = FuchsianODE.from_lists([["1"], ["1", "-5", "4"], ["0", "1", "-5", "4"]])
    with pytest.raises(PreconditionError, match="path_connect"):
        connect(ode, 0, 1, 30)


def test_path_too_close_to_singularity(gauss):
    with pytest.raises(PreconditionError, match="reroute"):
        path_connect(gauss, 0, 1, ["0.9+0.001j", "1.1+0.001j", "0.8"], 30)


def test_matrix_json(gauss):
    d = connect(gauss, 0, 1, 30).to_dict()
    assert d["from"] == "0" and d["to"] == "1" and d["digits"] == 30
    assert len(d["entries"]) == 2 and all(len(c) == 2 for c in d["entries"][0])
