from fractions import Fraction

import mpmath as mp
import pytest
import sympy

from fuchsian.fixtures import c014_fixture, chi3_fixture, chi3_fixture_checks
from fuchsian.kernel import ALPHA, OMEGA
from fuchsian.monodromy import (base_branch, eigenvalue_check, monodromy_generators,
                                product_relation, search_orderings)
from fuchsian.ode import FuchsianODE

P = 40


@pytest.fixture(scope="module")
def gauss_generators():
    from conftest import gauss_ode
    ode = gauss_ode(Fraction(1, 3), Fraction(1, 5), Fraction(1, 2))
    return ode, monodromy_generators(ode, 0, [0, 1, "inf"], P, paths={"inf": ["1j", "3j"]})


def _trace(M):
    return mp.fsum(M[i, i] for i in range(M.rows))


def test_gauss_traces(gauss_generators):
    _, (g0, g1, ginf) = gauss_generators
    tol = mp.mpf(10) ** -(P - 10)
    with mp.workdps(P + 20):
        e = lambda x: mp.expj(2 * mp.pi * x)
        assert abs(_trace(g0.matrix)) < tol
        assert abs(_trace(g1.matrix) - (1 + e(mp.mpf(-1) / 30))) < tol
        assert abs(_trace(ginf.matrix) - (e(mp.mpf(1) / 3) + e(mp.mpf(1) / 5))) < tol


def test_gauss_determinants(gauss_generators):
    # |det| = |exp(2 pi i sum rho)| = 1 for real exponents
    _, gens = gauss_generators
    with mp.workdps(P + 20):
        for g in gens:
            assert abs(abs(mp.det(g.matrix)) - 1) < mp.mpf(10) ** -(P - 20)


def test_gauss_eigenvalues(gauss_generators):
    ode, gens = gauss_generators
    for g in gens:
        assert eigenvalue_check(g, ode, P) < mp.mpf(10) ** -(P - 20)


def test_product_relation(gauss_generators):
    _, gens = gauss_generators
    rep = product_relation(gens)
    assert rep.residual < mp.mpf(10) ** -(P - 20)
    assert rep.best_residual <= rep.residual


def test_cyclic_shifts_also_hold(gauss_generators):
    _, gens = gauss_generators
    rep = product_relation(gens, ordering=[1, "inf", 0])
    assert rep.residual < mp.mpf(10) ** -(P - 20)


def test_wrong_order_is_flagged(gauss_generators):
    _, gens = gauss_generators
    rep = product_relation(gens, ordering=[1, 0, "inf"])
    assert rep.best_residual > mp.mpf("0.01")
    ranked = search_orderings(gens)
    assert [str(x) for x in ranked[0][0]] == ["0", "1", "inf"]
    assert ranked[-1][1] > mp.mpf("0.01")


def test_log_solution():
    # (1-w) y'' - y' = 0: basis {1, -ln(1-w)} at 0
    ode = FuchsianODE.from_lists([["0"], ["-1"], ["1", "-1"]])
    (g,) = monodromy_generators(ode, 0, [1], 30)
    with mp.workdps(50):
        expected = mp.matrix([[1, 0], [-2j * mp.pi, 1]])
        assert mp.mnorm(g.matrix - expected, 1) < mp.mpf(10) ** -28


def test_single_valued_solution():
    ode = FuchsianODE.from_lists([["-1"], ["1", "-1"]])
    gens = monodromy_generators(ode, 0, [1], 30)
    with mp.workdps(50):
        assert abs(gens[0].matrix[0, 0] - 1) < mp.mpf(10) ** -28
    assert product_relation(gens).residual < mp.mpf(10) ** -28


def test_base_branch_bisects_widest_gap():
    u = base_branch([mp.mpc(1), mp.mpc(0, 1)])
    # directions at 0 and 90 degrees: the cut goes to 225 degrees
    assert abs(-u - mp.expj(5 * mp.pi / 4)) < 1e-12


def test_generator_json(gauss_generators):
    _, gens = gauss_generators
    d = gens[1].to_dict(20)
    assert d["point"] == "1" and d["base"] == "0" and d["orientation"] == "counterclockwise"


# ---------------------------------------------------------------------------
# chi3 fixtures
# ---------------------------------------------------------------------------

def _entry(M, i, j):
    return sympy.simplify(M.domain.to_sympy(M[i - 1, j - 1].element))


def test_chi3_entries():
    M = chi3_fixture()
    assert _entry(M, 1, 1) == -1
    assert sympy.simplify(_entry(M, 4, 6) - 64 * OMEGA**2 / ALPHA**4) == 0
    for i in range(1, 4):
        for j in range(4, 7):
            assert _entry(M, i, j) == 0


def test_chi3_checks():
    rep = chi3_fixture_checks()
    for key in ("a_inverse", "b_cube", "c_square", "d_det", "e_involution"):
        assert rep[key]["holds"], key
    assert rep["power_rule"]["1"]
    assert 1 in rep["power_rule_holds_for"]


def test_chi3_power_rule_fails_for_even_powers():
    rep = chi3_fixture_checks()
    assert not rep["power_rule"]["2"]


def test_c014_cells():
    C = c014_fixture()
    assert C[1][2] == {"sqrt3_over_pi": Fraction(-9, 64)}
    assert C[3][1] == {"one": Fraction(1, 3), "I3plus": -2}
    assert C[0][1] == {}
