"""Local Frobenius bases with logarithms, their evaluation and local monodromy.

A local solution at a point p is

    y(z) = z^rho * sum_{k=0}^{T} sum_{j=0}^{L} c[k][j] z^k ln(z)^j,   z = w - p

(z = 1/w at infinity).  Solutions are computed from the theta-form of the
operator, L = sum_k z^k q_k(theta): on the coefficient vector of
z^s ln^j / j!, theta acts as s + N with N the shift j+1 -> j, so each power
is obtained by solving q_0(s + N) c_m = -sum_k q_k(s - k + N) c_{m-k}.  At a
root s of q_0 of multiplicity mu the first mu components are free; they are
set to zero (echelon normalization), which adds mu to the log degree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath as mp
import sympy

from .errors import PrecisionError, PreconditionError
from .kernel import OMEGA, format_rational, to_mp
from .ode import (INF, AlgebraicPoint, FuchsianODE, LocalOperator, Point, local_operator,
                  max_finite_singular_modulus, nearest_singularity_distance, parse_point,
                  point_label, point_value)

ORDERING_RULE = "re-exponent, im-exponent, head-log ascending"
GUARD_DIGITS = 10
MAX_TERMS = 40000


@dataclass(frozen=True)
class LocalSolution:
    exponent: object          # Fraction, or mpc for irrational exponents
    head_log: int             # the head term is z^exponent ln(z)^head_log
    log_degree: int
    table: tuple              # table[k][j], k = 0..T
    truncation: int
    exact: bool

    def coefficient(self, k: int, j: int):
        row = self.table[k]
        return row[j] if j < len(row) else 0


@dataclass
class LocalBasis:
    ode: FuchsianODE
    point: Point
    solutions: list
    truncation: int
    ordering: str = ORDERING_RULE
    _structure: list = field(default_factory=list, repr=False)

    @property
    def order(self) -> int:
        return len(self.solutions)

    @property
    def exact(self) -> bool:
        return all(s.exact for s in self.solutions)

    def exponents(self) -> list:
        return [s.exponent for s in self.solutions]

    def to_dict(self) -> dict:
        sols = []
        for s in self.solutions:
            entry = {"exponent": _exp_str(s.exponent), "head_log": s.head_log,
                     "log_degree": s.log_degree}
            if s.exact:
                entry["coefficients"] = [[format_rational(x) for x in row] for row in s.table]
            else:
                entry["coefficients"] = [[_num_str(x) for x in row] for row in s.table]
            sols.append(entry)
        return {"point": point_label(self.point), "truncation": self.truncation,
                "ordering": self.ordering, "solutions": sols}


def _exp_str(e) -> str:
    return format_rational(e) if isinstance(e, Fraction) else mp.nstr(e, 30)


def _num_str(x) -> str:
    return format_rational(x) if isinstance(x, Fraction) else mp.nstr(x, 30)


# ---------------------------------------------------------------------------
# root structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Head:
    exponent: object
    head_log: int
    later: tuple     # ((offset, multiplicity), ...) of roots above the head, same class
    mult: int        # multiplicity of the head root


def _classes(roots: list[tuple[object, int]], dps: int) -> list[list[tuple[object, int]]]:
    """Group indicial roots whose differences are integers."""
    tol = mp.mpf(10) ** (-(dps // 3))
    groups: list[list[tuple[object, int]]] = []
    for r, m in roots:
        for g in groups:
            r0 = g[0][0]
            if isinstance(r, Fraction) and isinstance(r0, Fraction):
                if (r - r0).denominator == 1:
                    g.append((r, m))
                    break
            elif not isinstance(r, Fraction) and not isinstance(r0, Fraction):
                d = r - r0
                if abs(mp.im(d)) < tol and abs(mp.re(d) - mp.nint(mp.re(d))) < tol:
                    g.append((r, m))
                    break
        else:
            groups.append([(r, m)])
    for g in groups:
        g.sort(key=lambda rm: float(mp.re(to_mp(rm[0]))))
    return groups


def _offset(a, b) -> int:
    d = a - b
    if isinstance(d, Fraction):
        return int(d)
    return int(mp.nint(mp.re(d)))


def _heads(op: LocalOperator, dps: int) -> list[_Head]:
    heads = []
    for g in _classes(op.roots(), dps):
        for idx, (s, mu) in enumerate(g):
            later = tuple((_offset(r, s), m) for r, m in g[idx + 1:])
            for f in range(mu):
                heads.append(_Head(s, f, later, mu))
    heads.sort(key=lambda h: (float(mp.re(to_mp(h.exponent))), float(mp.im(to_mp(h.exponent))),
                              h.head_log))
    return heads


def _max_gap(heads: Sequence[_Head]) -> int:
    return max((h.later[-1][0] for h in heads if h.later), default=0)


# ---------------------------------------------------------------------------
# the recurrence
# ---------------------------------------------------------------------------

def _taylor(coeffs: Sequence, s) -> list:
    """[q(s), q'(s), q''(s)/2, ...] by repeated synthetic division."""
    c = list(coeffs)
    n = len(c)
    out = []
    for i in range(n):
        acc = 0
        for j in range(n - 1, i - 1, -1):
            acc = acc * s + c[j]
            c[j] = acc
        out.append(c[i])
    return out


def _apply(t: Sequence, v: Sequence) -> list:
    """(q(s + N) v)_j = sum_d t_d v_{j+d}."""
    L = len(v)
    out = []
    for j in range(L):
        acc = 0
        for d in range(min(len(t), L - j)):
            if t[d] and v[j + d]:
                acc = acc + t[d] * v[j + d]
        out.append(acc)
    return out


def _recurrence(q: Sequence[Sequence], head: _Head, numeric: bool) -> Iterator[list]:
    """Yield divided-power coefficient vectors c_0, c_1, ... for one head."""
    K = len(q) - 1
    s0 = to_mp(head.exponent) if numeric else head.exponent
    one = mp.mpf(1) if numeric else Fraction(1)
    zero = mp.mpf(0) if numeric else Fraction(0)
    c0 = [zero] * (head.head_log + 1)
    c0[head.head_log] = one * math.factorial(head.head_log)
    later = dict(head.later)
    hist = [c0]
    yield c0
    m = 0
    while True:
        m += 1
        s = s0 + m
        r: list = []
        for k in range(1, min(m, K) + 1):
            prev = hist[-k]
            if not any(prev):
                continue
            t = _taylor(q[k], s - k)
            contrib = _apply(t, prev)
            if len(contrib) > len(r):
                r.extend([zero] * (len(contrib) - len(r)))
            for j, x in enumerate(contrib):
                r[j] = r[j] - x
        mu = later.get(m, 0)
        t0 = _taylor(q[0], s)
        c = [zero] * (len(r) + mu)
        for j in range(len(r) - 1, -1, -1):
            acc = r[j]
            for d in range(mu + 1, len(t0)):
                if j + d < len(c) and c[j + d]:
                    acc = acc - t0[d] * c[j + d]
            c[j + mu] = acc / t0[mu]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c:
            c = [zero]
        hist.append(c)
        if len(hist) > K + 1:
            hist.pop(0)
        yield c


def _numeric_q(op: LocalOperator) -> list:
    return [[to_mp(x) for x in row] for row in op.q]


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def _operator(ode: FuchsianODE, p: Point, dps: int) -> LocalOperator:
    op = local_operator(ode, p, dps)
    if not op.regular:
        from .errors import IrregularSingularityError
        raise IrregularSingularityError(f"irregular singular point at {point_label(p)}")
    return op


def local_basis(ode: FuchsianODE, p, T: int = 20, dps: int = 60) -> LocalBasis:
    """Frobenius basis at p truncated at order T (relative to each head)."""
    p = parse_point(p)
    if T < 1:
        raise PreconditionError("T must be >= 1")
    op = _operator(ode, p, dps)
    heads = _heads(op, dps)
    gap = _max_gap(heads)
    if T < gap:
        raise PreconditionError(f"T too small: truncation {T} below exponent gap {gap}")
    sols = []
    with mp.workdps(dps):
        qn = None
        for h in heads:
            exact = op.exact and isinstance(h.exponent, Fraction)
            if exact:
                gen = _recurrence(op.q, h, numeric=False)
            else:
                qn = qn or _numeric_q(op)
                gen = _recurrence(qn, h, numeric=True)
            rows = []
            for k, c in zip(range(T + 1), gen):
                rows.append(tuple(x / math.factorial(j) for j, x in enumerate(c)))
            L = max((j for row in rows for j, x in enumerate(row) if _nonzero(x, exact)), default=0)
            rows = [row[:L + 1] + tuple([row[0] * 0] * (L + 1 - len(row))) for row in rows]
            sols.append(LocalSolution(h.exponent, h.head_log, L, tuple(rows), T, exact))
    basis = LocalBasis(ode, p, sols, T)
    basis._structure = heads
    return basis


def _nonzero(x, exact: bool) -> bool:
    if exact:
        return x != 0
    return abs(x) > mp.mpf(10) ** (-(mp.mp.dps // 2))


def annihilation_residual(basis: LocalBasis, sol: LocalSolution) -> list:
    """Substitute a truncated solution into the ODE (in its local variable)
    and return the coefficients that must vanish.

    Works directly on sum a_i(z) D^i, independently of the theta-form used to
    build the solution.
    """
    ode = basis.ode.at_infinity if basis.point is INF else basis.ode
    p = Fraction(0) if basis.point is INF else basis.point
    if not isinstance(p, Fraction):
        raise PreconditionError("exact residual needs a rational point")
    shifted = [c.shift(p) for c in ode.coeffs]
    s = sol.exponent
    T = sol.truncation
    terms = {(k, j): x for k, row in enumerate(sol.table) for j, x in enumerate(row) if x}
    total: dict = {}
    bound = None
    for i, a in enumerate(shifted):
        if a.is_zero():
            continue
        cur = dict(terms)
        for _ in range(i):
            nxt: dict = {}
            for (k, j), x in cur.items():
                # d/dz z^(s+k) ln^j = (s+k) z^(s+k-1) ln^j + j z^(s+k-1) ln^(j-1)
                key = (k - 1, j)
                nxt[key] = nxt.get(key, 0) + (s + k) * x
                if j:
                    key = (k - 1, j - 1)
                    nxt[key] = nxt.get(key, 0) + j * x
            cur = nxt
        for e, ae in enumerate(a.coeffs):
            if not ae:
                continue
            for (k, j), x in cur.items():
                key = (k + e, j)
                total[key] = total.get(key, 0) + ae * x
        b = T - i + a.valuation()
        bound = b if bound is None else min(bound, b)
    return [x for (k, j), x in sorted(total.items()) if k <= bound and x != 0]


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _series_log(z0, order: int) -> list:
    """Coefficients of ln(z0 + h) - ln(z0) in h."""
    return [0] + [(-1) ** (d + 1) / (d * z0**d) for d in range(1, order)]


def _series_mul(a: Sequence, b: Sequence, order: int) -> list:
    out = [mp.mpf(0)] * order
    for i, x in enumerate(a[:order]):
        if x == 0:
            continue
        for j in range(order - i):
            if j < len(b):
                out[i + j] += x * b[j]
    return out


def _series_power(z0, s, log0, order: int, anchor=0) -> list:
    """(z0 + h)^s with z0^s = exp(anchor*log0) * z0^(s - anchor), s - anchor an integer."""
    base = mp.exp(anchor * log0) * z0 ** int(mp.nint(mp.re(s - anchor)))
    out = []
    coef = mp.mpf(1)
    for d in range(order):
        out.append(base * coef / z0**d)
        coef = coef * (s - d) / (d + 1)
    return out


def _anchors(heads) -> list:
    """Per head, the exponent that carries the branch choice.

    Integer powers are single valued and taken literally.  In every other
    class mod 1 the smallest exponent takes the branch and the others differ
    from it by literal integer powers, so a whole class is rescaled by one
    constant and the formal local monodromy stays valid.
    """
    exps = [to_mp(h.exponent) for h in heads]
    out = []
    for e in exps:
        if _is_integer(e):
            out.append(mp.mpf(0))
            continue
        same = [f for f in exps if _is_integer(f - e)]
        out.append(min(same, key=lambda f: mp.re(f)))
    return out


def _is_integer(x) -> bool:
    return abs(mp.im(x)) < mp.mpf(10) ** -20 and abs(mp.re(x) - mp.nint(mp.re(x))) < mp.mpf(10) ** -20


def local_jets(basis: LocalBasis, z0, log0, nder: int, dps: int) -> list[list]:
    """Taylor coefficients (in h) of every basis solution at z0 + h, in the
    local variable, with ln(z0) := log0.  Returns one row per solution with
    ``nder`` entries y^(d)(z0)/d!."""
    op = _operator(basis.ode, basis.point, dps)
    heads = basis._structure
    if not heads or not all(isinstance(h.exponent, Fraction) for h in heads):
        heads = _heads(op, dps)
    q = _numeric_q(op)
    rows = []
    eps = mp.mpf(10) ** (-dps)
    absz = abs(z0)
    logmag = max(mp.mpf(1), abs(log0))
    for h, anchor in zip(heads, _anchors(heads)):
        gen = _recurrence(q, h, numeric=True)
        S: list[list] = []   # S[j][d] = sum_m c_{m,j}/j! binom(m, d) z0^(m-d)
        recent: list = []
        zpow = mp.mpf(1)
        total_mag = mp.mpf(0)
        m = 0
        for c in gen:
            if m > MAX_TERMS:
                raise PrecisionError("precision unreachable at this point")
            while len(S) < len(c):
                S.append([mp.mpf(0)] * nder)
            mag = mp.mpf(0)
            for j, x in enumerate(c):
                if x == 0:
                    continue
                xp = x / math.factorial(j)
                term = xp * zpow
                binom = mp.mpf(1)
                for d in range(min(nder, m + 1)):
                    S[j][d] += binom * term / z0**d
                    binom = binom * (m - d) / (d + 1)
                mag = max(mag, abs(term) * logmag**j)
            mag = mag * (1 + m) ** (nder - 1) / max(absz, eps) ** (nder - 1) if nder > 1 else mag
            total_mag = max(total_mag, mag)
            recent.append(mag)
            if len(recent) > 12:
                recent.pop(0)
            zpow = zpow * z0
            m += 1
            if len(recent) >= 12 and m > 12:
                thresh = eps * max(total_mag, mp.mpf(1))
                if all(r < thresh for r in recent[-10:]):
                    a, b = recent[-11], recent[-1]
                    ratio = (b / a) ** (mp.mpf(1) / 10) if a > 0 and b > 0 else mp.mpf(0)
                    tail = b * ratio / (1 - ratio) if ratio < 1 else mp.inf
                    if tail < thresh:
                        break
        # combine: z^s * sum_j ln^j * f_j
        powser = _series_power(z0, to_mp(h.exponent), log0, nder, anchor)
        lser = _series_log(z0, nder)
        lser[0] = log0
        acc = [mp.mpf(0)] * nder
        lpow = [mp.mpf(1)] + [mp.mpf(0)] * (nder - 1)
        for j in range(len(S)):
            acc = [a + b for a, b in zip(acc, _series_mul(lpow, S[j], nder))]
            lpow = _series_mul(lpow, lser, nder)
        rows.append(_series_mul(powser, acc, nder))
    return rows


def compose_inverse(jets: Sequence, e, order: int) -> list:
    """Given Taylor coefficients of Y(t) at t_e = 1/e, return the Taylor
    coefficients of y(w) = Y(1/w) at w = e."""
    # k(h) = 1/(e+h) - 1/e
    k = [mp.mpf(0)] + [(-1) ** d / e ** (d + 1) for d in range(1, order)]
    out = [mp.mpf(0)] * order
    kp = [mp.mpf(1)] + [mp.mpf(0)] * (order - 1)
    for d in range(order):
        if d < len(jets):
            out = [a + jets[d] * b for a, b in zip(out, kp)]
        kp = _series_mul(kp, k, order)
    return out


def local_coordinate(point: Point, w, dps: int):
    """z = w - p, or t = 1/w at infinity."""
    if point is INF:
        return 1 / w
    return w - point_value(point, dps)


def default_branch(point: Point, w, dps: int):
    z = local_coordinate(point, w, dps)
    return z / abs(z)


def evaluate_basis(basis: LocalBasis, w, derivatives: int | None = None, digits: int = 30,
                   branch=None) -> mp.matrix:
    """Matrix whose row i is (y_i(w), y_i'(w), ..., y_i^(d-1)(w)) in the
    global variable w.

    ``branch`` is a unit complex number u; the local logarithm is
    ln(z) = Log(z/u) + 0, i.e. the ray of direction u has argument 0.  By
    default the ray through the evaluation point is used.  Fractional powers
    take their branch from the same logarithm; integer powers are literal
    (see ``_anchors``).
    """
    n = derivatives or basis.order
    dps = digits + GUARD_DIGITS
    with mp.workdps(dps + 5):
        w = to_mp(w)
        z = local_coordinate(basis.point, w, dps + 5)
        if z == 0:
            raise PreconditionError("cannot evaluate at the expansion point")
        _check_inside(basis, w, z, dps)
        u = z / abs(z) if branch is None else to_mp(branch)
        log0 = mp.log(z / u)
        jets = local_jets(basis, z, log0, n, dps + 5)
        if basis.point is INF:
            jets = [compose_inverse(row, w, n) for row in jets]
        M = mp.matrix(len(jets), n)
        for i, row in enumerate(jets):
            for d in range(n):
                M[i, d] = row[d] * math.factorial(d)
    return M


def radius(ode: FuchsianODE, p: Point, dps: int = 30):
    """Convergence radius of local series at p in the local variable."""
    if p is INF:
        R = max_finite_singular_modulus(ode, dps)
        return mp.inf if R == 0 else 1 / R
    return nearest_singularity_distance(ode, point_value(p, dps), dps, exclude=p)


def _check_inside(basis: LocalBasis, w, z, dps: int):
    r = radius(basis.ode, basis.point, 30)
    if abs(z) >= r * (1 - mp.mpf(10) ** -8):
        raise PreconditionError(
            f"point outside the disk of convergence at {point_label(basis.point)}")


# ---------------------------------------------------------------------------
# local monodromy
# ---------------------------------------------------------------------------

def _phase_symbolic(e):
    if not isinstance(e, Fraction):
        raise PreconditionError("symbolic local monodromy needs rational exponents")
    r = sympy.Rational(e.numerator, e.denominator)
    return sympy.nsimplify(sympy.exp(2 * sympy.pi * sympy.I * r).rewrite(sympy.cos))


def local_monodromy(basis: LocalBasis, mode: str = "numeric", digits: int = 30):
    """Loc(Omega): continued basis = Loc * basis after one counterclockwise loop.

    Symbolic mode returns a sympy Matrix in the symbol Omega with exact
    roots of unity; numeric mode uses Omega = 2 pi i.
    """
    if mode == "symbolic":
        return _loc_symbolic(basis)
    if mode != "numeric":
        raise PreconditionError(f"unknown mode {mode!r}")
    n = basis.order
    with mp.workdps(digits + GUARD_DIGITS):
        Om = 2j * mp.pi
        M = mp.matrix(n, n)
        for i, l, m, f in _loc_pattern(basis):
            yi = basis.solutions[i]
            row = yi.table[m]
            acc = sum((to_mp(row[j]) * math.comb(j, f) * Om ** (j - f)
                       for j in range(f, len(row)) if row[j] != 0), mp.mpf(0))
            M[i, l] = mp.exp(2j * mp.pi * to_mp(yi.exponent)) * acc
    return M


def _loc_symbolic(basis: LocalBasis) -> sympy.Matrix:
    n = basis.order
    M = sympy.zeros(n, n)
    for i, l, m, f in _loc_pattern(basis):
        yi = basis.solutions[i]
        if not yi.exact:
            raise PreconditionError("symbolic local monodromy needs an exact basis")
        zeta = _phase_symbolic(yi.exponent)
        row = yi.table[m]
        acc = sum((sympy.Rational(row[j].numerator, row[j].denominator)
                   * math.comb(j, f) * OMEGA ** (j - f)
                   for j in range(f, len(row)) if row[j] != 0), sympy.Integer(0))
        M[i, l] = sympy.expand(zeta * acc)
    return M


def _loc_pattern(basis: LocalBasis):
    """(i, l, offset, head_log of l) for every pair where solution l's head
    lies in the support of solution i."""
    for i, yi in enumerate(basis.solutions):
        for l, yl in enumerate(basis.solutions):
            d = yl.exponent - yi.exponent
            if isinstance(d, Fraction):
                if d.denominator != 1 or d < 0:
                    continue
                m = int(d)
            else:
                dd = to_mp(d)
                tol = mp.mpf(10) ** -20
                if abs(mp.im(dd)) > tol or abs(mp.re(dd) - mp.nint(mp.re(dd))) > tol \
                        or mp.re(dd) < -0.5:
                    continue
                m = int(mp.nint(mp.re(dd)))
            if m > yi.truncation:
                raise PreconditionError("truncation below exponent gap")
            yield i, l, m, yl.head_log
