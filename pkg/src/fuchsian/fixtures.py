"""Published exact matrices for the order-six chi^(3) operator.

``chi3_fixture`` is the monodromy around w = 1/4 in the basis at w = 0, a
6x6 matrix over Q(alpha, Omega) (alpha = 2 pi i tracks the pi's of the
connection matrix, Omega = 2 pi i the logarithmic shift).  ``c014_fixture``
is the connection matrix C(0, 1/4) with entries written over a small
basis of constants.
"""
from __future__ import annotations

from fractions import Fraction

import mpmath as mp
import sympy
from sympy.polys.matrices import DomainMatrix

from .kernel import ALPHA, OMEGA, format_rational, ratfun_field

a, W = ALPHA, OMEGA


def _scaled_blocks():
    """24 alpha^4 M as a list of rows of sympy polynomials."""
    rho1 = 5 * a**4 + 8 * W**2 + 8 * W**2 * a**2
    rho2 = 4 * W * a**2 - 75 * W - 15 * a**2
    rho3 = 5 * a**2 + 4 * W + 4 * W * a**2
    A = [[-24 * a**4, 0, 0],
         [-48 * a**4, 24 * a**4, -144 * a**2 * W],
         [0, 0, 24 * a**4]]
    B = [[-48 * rho1, 32 * W * rho2, 48 * W * (9 * a**2 + 80 * W)],
         [12 * a**2 * rho3, 4 * (75 - 4 * a**2) * a**2 * W, -300 * a**2 * W],
         [-(87 + 8 * a**2) * a**4, 0, 3 * (4 * a**2 - 75) * a**2 * W]]
    C = [[24 * a**4, -384 * a**2 * W, 1536 * W**2],
         [0, 24 * a**4, -192 * a**2 * W],
         [0, 0, 24 * a**4]]
    rows = [A[i] + [0, 0, 0] for i in range(3)] + [B[i] + C[i] for i in range(3)]
    return [[sympy.expand(x) for x in row] for row in rows]


def chi3_fixture(alpha=ALPHA, omega=OMEGA) -> DomainMatrix:
    """M_{w=0}(1/4)(alpha, Omega) over the field Q(alpha, Omega).

    Passing other expressions for alpha/omega substitutes them (for example
    ``omega=3*OMEGA``); the result stays in the same field.
    """
    K = ratfun_field()
    scale = 24 * ALPHA**4
    rows = []
    for row in _scaled_blocks():
        out = []
        for x in row:
            e = sympy.sympify(x).subs({ALPHA: alpha, OMEGA: omega}, simultaneous=True)
            out.append(K.from_sympy(sympy.cancel(e / scale.subs(ALPHA, alpha))))
        rows.append(out)
    return DomainMatrix(rows, (6, 6), K)


def _identity(K, n=6) -> DomainMatrix:
    return DomainMatrix.eye(n, K)


def _first_difference(X: DomainMatrix, Y: DomainMatrix):
    K = X.domain
    for i in range(X.shape[0]):
        for j in range(X.shape[1]):
            d = X[i, j].element - Y[i, j].element
            if d != K.zero:
                return {"entry": [i + 1, j + 1], "difference": str(K.to_sympy(d))}
    return None


def _check(X: DomainMatrix, Y: DomainMatrix) -> dict:
    w = _first_difference(X, Y)
    return {"holds": w is None, "witness": w}


def chi3_fixture_checks(powers=range(1, 7)) -> dict:
    """Exact identities of the chi^(3) monodromy fixture.

    The literal power rule M^N = M(alpha, N Omega) is reported per N: the
    semisimple part has eigenvalue -1, so it can only hold for odd N.
    """
    K = ratfun_field()
    M = chi3_fixture()
    Mneg = chi3_fixture(omega=-OMEGA)
    M0 = chi3_fixture(omega=sympy.Integer(0))
    I = _identity(K)
    report = {
        "a_inverse": _check(M * Mneg, I),
        "b_cube": _check(M**3, chi3_fixture(omega=3 * OMEGA)),
        "c_square": _check(M**2, M0 * chi3_fixture(omega=2 * OMEGA)),
        "d_det": None,
        "e_involution": _check(M0**2, I),
    }
    det = K.to_sympy(M.det())
    report["d_det"] = {"holds": sympy.simplify(det + 1) == 0,
                       "witness": None if sympy.simplify(det + 1) == 0 else {"det": str(det)}}
    power = {}
    P = I
    for N in range(1, max(powers) + 1):
        P = P * M
        if N in powers:
            power[str(N)] = _check(P, chi3_fixture(omega=N * OMEGA))["holds"]
    report["power_rule"] = power
    report["power_rule_holds_for"] = [int(k) for k, v in power.items() if v]
    return report


# ---------------------------------------------------------------------------
# the connection matrix C(0, 1/4)
# ---------------------------------------------------------------------------

CONSTANT_NAMES = ("one", "pi", "pi2", "inv_pi", "inv_pi2", "sqrt3_over_pi", "pi_sqrt3", "I3plus")

F = Fraction
_C014 = [
    [{"one": F(1)}, {}, {}, {}, {}, {}],
    [{"one": F(1)}, {}, {"sqrt3_over_pi": F(-9, 64)}, {}, {}, {}],
    [{}, {"pi_sqrt3": F(-3, 32)}, {}, {}, {}, {}],
    [{"one": F(5)}, {"one": F(1, 3), "I3plus": F(-2)}, {"sqrt3_over_pi": F(3, 64)}, {}, {},
     {"inv_pi2": F(1, 16)}],
    [{"one": F(-5, 4)}, {"pi_sqrt3": F(-3, 32)}, {"sqrt3_over_pi": F(45, 256)}, {},
     {"one": F(1, 32)}, {}],
    [{"one": F(29, 16), "pi2": F(-2, 3)}, {"pi_sqrt3": F(15, 64)},
     {"sqrt3_over_pi": F(-225, 1024), "pi_sqrt3": F(-3, 64)}, {"pi2": F(1, 64)}, {}, {}],
]


def c014_fixture() -> list[list[dict]]:
    """Cells as {constant name: rational coefficient}; an empty dict is zero."""
    return [[dict(cell) for cell in row] for row in _C014]


def cell_to_string(cell: dict) -> str:
    if not cell:
        return "0"
    parts = []
    order = {name: k for k, name in enumerate(CONSTANT_NAMES)}
    for name in sorted(cell, key=lambda n: (order.get(n, len(order)), n)):
        c = cell[name]
        parts.append(format_rational(c) if name == "one" else f"{format_rational(c)}*{name}")
    return " + ".join(parts)


def render_cell(cell: dict, values: dict) -> mp.mpf:
    return sum((mp.mpf(c.numerator) / c.denominator * values[name] for name, c in cell.items()),
               mp.mpf(0))


def c014_numeric(digits: int) -> mp.matrix:
    """Numeric rendering of the fixture at the requested precision."""
    from .constants import basis_values
    with mp.workdps(digits + 10):
        vals = basis_values(CONSTANT_NAMES, digits + 10)
        M = mp.matrix(6, 6)
        for i, row in enumerate(_C014):
            for j, cell in enumerate(row):
                M[i, j] = render_cell(cell, vals)
        return M
