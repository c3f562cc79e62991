"""Linear ODEs with polynomial coefficients and their singular points."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

import mpmath as mp

from .errors import IrregularSingularityError, PreconditionError
from .kernel import Poly, format_rational, parse_rational, to_mp


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


@dataclass(frozen=True)
class AlgebraicPoint:
    """A root of an irreducible integer polynomial, singled out by an enclosure."""

    minpoly: Poly
    enclosure: mp.mpc
    radius: float = 1e-25

    def value(self, dps: int) -> mp.mpc:
        with mp.workdps(dps + 10):
            coeffs = [to_mp(c) for c in reversed(self.minpoly.coeffs)]
            roots = mp.polyroots(coeffs, maxsteps=200, extraprec=2 * dps + 40)
            root = min(roots, key=lambda r: abs(r - self.enclosure))
        return mp.mpc(root)

    def multiplicity_in(self, poly: Poly) -> int:
        k = 0
        while poly and (poly % self.minpoly).is_zero():
            poly = poly // self.minpoly
            k += 1
        return k

    def __repr__(self):
        import sympy
        poly = self.minpoly.to_sympy(sympy.Symbol("w"))
        return f"root({poly}, {mp.nstr(self.enclosure, 12)})"


Point = Union[Fraction, AlgebraicPoint, _Infinity, mp.mpc]


def parse_point(text) -> Point:
    """``"inf"``, ``"p/q"`` or a complex literal such as ``"0.5+1j"``."""
    if isinstance(text, (Fraction, AlgebraicPoint, _Infinity, mp.mpc)):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip().lower()
    if s in ("inf", "infinity", "oo"):
        return INF
    try:
        return parse_rational(s)
    except PreconditionError:
        pass
    try:
        return mp.mpc(complex(s.replace("i", "j")))
    except ValueError as exc:
        raise PreconditionError(f"cannot parse point {text!r}") from exc


def point_label(p: Point) -> str:
    if p is INF:
        return "inf"
    if isinstance(p, Fraction):
        return format_rational(p)
    if isinstance(p, AlgebraicPoint):
        return repr(p)
    z = mp.mpc(p)
    return mp.nstr(z, 20)


def point_value(p: Point, dps: int):
    """Numeric location of a finite point."""
    if p is INF:
        raise PreconditionError("infinity has no finite location")
    if isinstance(p, AlgebraicPoint):
        return p.value(dps)
    return to_mp(p)


@dataclass(frozen=True)
class FuchsianODE:
    """sum_i a_i(w) y^(i)(w) = 0 with a_0..a_n polynomials over Q.

    Construction normalizes: common polynomial factors are removed and the
    coefficients are scaled to coprime integers with the lowest nonzero
    coefficient of a_n positive.
    """

    coeffs: tuple
    var: str = "w"

    def __post_init__(self):
        cs = [c if isinstance(c, Poly) else Poly(c) for c in self.coeffs]
        while len(cs) > 1 and cs[-1].is_zero():
            cs.pop()
        if len(cs) < 2 or cs[-1].is_zero():
            raise PreconditionError("ODE needs order >= 1 with nonzero leading coefficient")
        g = Poly()
        for c in cs:
            g = g.gcd(c) if not g.is_zero() else c.monic()
        if g.degree > 0:
            cs = [c // g for c in cs]
        den = math.lcm(*(x.denominator for c in cs for x in c.coeffs))
        num = math.gcd(*(x.numerator for c in cs for x in c.coeffs))
        scale = Fraction(den, num)
        lead = next(x for x in cs[-1].coeffs if x)
        if lead < 0:
            scale = -scale
        object.__setattr__(self, "coeffs", tuple(Poly(x * scale for x in c.coeffs) for c in cs))

    @classmethod
    def from_lists(cls, coeffs: Sequence[Sequence], var: str = "w") -> "FuchsianODE":
        return cls(tuple(Poly(tuple(parse_rational(x) for x in c)) for c in coeffs), var)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Poly:
        return self.coeffs[-1]

    def to_dict(self) -> dict:
        return {"order": self.order,
                "coeffs": [[format_rational(x) for x in c.coeffs] or ["0"] for c in self.coeffs]}

    @classmethod
    def from_dict(cls, data: dict) -> "FuchsianODE":
        if "coeffs" not in data:
            raise PreconditionError("ODE JSON lacks 'coeffs'")
        ode = cls.from_lists(data["coeffs"])
        if "order" in data and int(data["order"]) != ode.order:
            raise PreconditionError(f"declared order {data['order']} != {ode.order}")
        return ode

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                parts.append(f"({c.to_sympy(__import__('sympy').Symbol(self.var))})*y^({i})")
        return " + ".join(parts) + " = 0"

    # -- transformations -------------------------------------------------

    def shifted(self, p: Fraction) -> "FuchsianODE":
        """The ODE in the variable z = w - p."""
        return FuchsianODE(tuple(c.shift(Fraction(p)) for c in self.coeffs), "z")

    @cached_property
    def at_infinity(self) -> "FuchsianODE":
        """The ODE in t = 1/w (d/dw = -t^2 d/dt)."""
        n = self.order
        ops = [[Poly((1,))]]
        minus_t2 = Poly((0, 0, -1))
        for _ in range(n):
            prev = ops[-1]
            nxt = [Poly() for _ in range(len(prev) + 1)]
            for k, c in enumerate(prev):
                nxt[k] = nxt[k] + minus_t2 * c.derivative()
                nxt[k + 1] = nxt[k + 1] + minus_t2 * c
            ops.append(nxt)
        dmax = max(c.degree for c in self.coeffs if c)
        out = [Poly() for _ in range(n + 1)]
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            ai = a.reverse(dmax)  # t^dmax * a(1/t)
            for k, c in enumerate(ops[i]):
                out[k] = out[k] + ai * c
        return FuchsianODE(tuple(out), "t")

    def apply_to_series(self, series: Sequence[Fraction]) -> list[Fraction]:
        """Coefficients of L(y) for y = sum series[k] w^k, valid through
        index len(series) - 1 - order."""
        N = len(series) - 1
        n = self.order
        valid = N - n
        out = [Fraction(0)] * (valid + 1) if valid >= 0 else []
        for i, a in enumerate(self.coeffs):
            # i-th derivative coefficients
            d = [Fraction(series[k + i]) * math.perm(k + i, i) for k in range(N - i + 1)]
            for j, aj in enumerate(a.coeffs):
                if not aj:
                    continue
                for m in range(j, valid + 1):
                    out[m] += aj * d[m - j]
        return out


# ---------------------------------------------------------------------------
# local operators in theta form
# ---------------------------------------------------------------------------

def _falling_theta(i: int) -> list:
    """Coefficients (ascending in theta) of theta (theta-1) ... (theta-i+1)."""
    p = Poly((1,))
    for k in range(i):
        p = p * Poly((-k, 1))
    return list(p.coeffs)


@dataclass
class LocalOperator:
    """L = z^v sum_k z^k q_k(theta) at a point, with theta = z d/dz.

    ``q`` holds coefficient lists ascending in theta; entries are Fractions
    when ``exact`` and mpmath numbers otherwise.
    """

    point: Point
    q: list
    exact: bool
    order: int
    regular: bool
    dps: int | None = None
    _roots: list | None = field(default=None, repr=False)

    @property
    def indicial(self) -> list:
        return self.q[0]

    def eval_q(self, k: int, s):
        acc = 0
        for c in reversed(self.q[k]):
            acc = acc * s + c
        return acc

    def roots(self) -> list[tuple[object, int]]:
        """Distinct indicial roots with multiplicities.

        Exact operators return Fractions for rational roots and mpc values
        for the remaining ones (computed at 60 digits unless ``dps`` is set).
        """
        if self._roots is None:
            self._roots = _indicial_roots(self)
        return self._roots


def _theta_form(shifted: Sequence[Sequence], n: int, valuations: Sequence[int] | None = None):
    """theta-form of sum_i a_i(z) D^i given shifted coefficient lists."""
    Q: dict[int, list] = {}
    for i, a in enumerate(shifted):
        ff = _falling_theta(i)
        start = valuations[i] if valuations is not None else 0
        for k in range(start, len(a)):
            c = a[k]
            if c == 0:
                continue
            j = k + n - i
            row = Q.setdefault(j, [0] * (n + 1))
            for d, f in enumerate(ff):
                row[d] = row[d] + c * f
    return Q


def local_operator(ode: FuchsianODE, p: Point, dps: int = 60) -> LocalOperator:
    n = ode.order
    if p is INF:
        inner = local_operator(ode.at_infinity, Fraction(0), dps)
        inner.point = INF
        return inner
    if isinstance(p, Fraction) or isinstance(p, int):
        p = Fraction(p)
        shifted = [list(c.shift(p).coeffs) for c in ode.coeffs]
        Q = _theta_form(shifted, n)
        exact = True
        lead_val = ode.leading.shift(p).valuation()
        zero = Fraction(0)
    else:
        exact = False
        with mp.workdps(dps + 20):
            z0 = point_value(p, dps + 20)
            shifted = [_numeric_shift(c, z0) for c in ode.coeffs]
        if isinstance(p, AlgebraicPoint):
            vals = [p.multiplicity_in(c) if c else 0 for c in ode.coeffs]
        else:
            vals = [0] * len(shifted)
        for i, v in enumerate(vals):
            for k in range(min(v, len(shifted[i]))):
                shifted[i][k] = 0
        Q = _theta_form(shifted, n, vals)
        lead_val = vals[-1]
        zero = mp.mpf(0)
        ordinary = lead_val == 0
    if not Q:
        raise PreconditionError("zero operator")
    v = min(Q)
    regular = (v == lead_val)
    kmax = max(Q) - v
    q = [Q.get(v + k, [zero] * (n + 1)) for k in range(kmax + 1)]
    for row in q:
        for d in range(len(row)):
            if row[d] == 0:
                row[d] = zero
    op = LocalOperator(point=p, q=q, exact=exact, order=n, regular=regular,
                       dps=None if exact else dps)
    if not exact and ordinary:
        op._roots = [(Fraction(k), 1) for k in range(n)]
    return op


def _numeric_shift(poly: Poly, z0) -> list:
    c = [to_mp(x) for x in poly.coeffs]
    m = len(c)
    for i in range(m):
        for j in range(m - 2, i - 1, -1):
            c[j] += z0 * c[j + 1]
    return c


def _snap_rational(x, tol, max_den: int = 10**4):
    re = mp.re(x)
    if abs(mp.im(x)) > tol:
        return None
    cand = Fraction(mp.nstr(re, 40, strip_zeros=False)).limit_denominator(max_den)
    if abs(to_mp(cand) - x) < tol:
        return cand
    return None


def _indicial_roots(op: LocalOperator) -> list[tuple[object, int]]:
    if op.exact:
        q0 = Poly(op.indicial)
        out: list[tuple[object, int]] = []
        dps = op.dps or 60
        for f, m in q0.factor_list():
            if f.degree == 1:
                out.append((-f[0] / f[1], m))
            else:
                with mp.workdps(dps + 20):
                    rts = mp.polyroots([to_mp(c) for c in reversed(f.coeffs)],
                                       maxsteps=300, extraprec=2 * dps + 40)
                out.extend((mp.mpc(r), m) for r in rts)
        return out
    dps = op.dps or 60
    with mp.workdps(dps + 20):
        coeffs = [mp.mpc(c) for c in reversed(op.indicial)]
        rts = mp.polyroots(coeffs, maxsteps=400, extraprec=3 * dps + 60, error=False)
        tol = mp.mpf(10) ** (-(dps // (2 * op.order)) - 2)
        clusters: list[list] = []
        for r in rts:
            for cl in clusters:
                if abs(cl[0] - r) < tol:
                    cl.append(r)
                    break
            else:
                clusters.append([r])
        out = []
        for cl in clusters:
            center = sum(cl) / len(cl)
            snapped = _snap_rational(center, tol)
            out.append((snapped if snapped is not None else mp.mpc(center), len(cl)))
    return out


# ---------------------------------------------------------------------------
# singular points
# ---------------------------------------------------------------------------

@dataclass
class SingularPoint:
    location: Point
    exponents: list | None = None
    apparent: bool | None = None
    regular: bool = True
    note: str = ""

    @property
    def label(self) -> str:
        return point_label(self.location)


def _exponent_multiset(op: LocalOperator) -> list:
    out = []
    for r, m in op.roots():
        out.extend([r] * m)
    return sorted(out, key=_exponent_key)


def _exponent_key(r):
    if isinstance(r, Fraction):
        return (float(r), 0.0)
    return (float(mp.re(r)), float(mp.im(r)))


def singular_points(ode: FuchsianODE, classify: bool = True) -> list[SingularPoint]:
    """Roots of the leading coefficient (grouped by irreducible factor) plus infinity."""
    rational: list[Fraction] = []
    algebraic: list[AlgebraicPoint] = []
    notes: dict = {}
    for f, _m in ode.leading.factor_list():
        if f.degree == 1:
            rational.append(-f[0] / f[1])
            continue
        with mp.workdps(40):
            roots = mp.polyroots([to_mp(c) for c in reversed(f.coeffs)], maxsteps=300, extraprec=200)
        for r in roots:
            ap = AlgebraicPoint(f, mp.mpc(r))
            algebraic.append(ap)
            if f.degree > 8:
                notes[id(ap)] = "no exact exponent arithmetic"
    rational.sort()
    algebraic.sort(key=lambda a: (a.minpoly.degree, a.minpoly.coeffs,
                                  float(mp.re(a.enclosure)), float(mp.im(a.enclosure))))
    pts: list[SingularPoint] = [SingularPoint(r) for r in rational]
    pts += [SingularPoint(a, note=notes.get(id(a), "")) for a in algebraic]
    pts.append(SingularPoint(INF))
    if classify:
        for sp in pts:
            op = local_operator(ode, sp.location)
            sp.regular = op.regular
            if op.regular:
                sp.exponents = _exponent_multiset(op)
                sp.apparent = is_apparent(ode, sp.location)
    return pts


def indicial_exponents(ode: FuchsianODE, p: Point) -> list:
    """The n indicial roots at p (at infinity in the variable t = 1/w)."""
    p = parse_point(p)
    op = local_operator(ode, p)
    if not op.regular:
        raise IrregularSingularityError(f"irregular singular point at {point_label(p)}")
    return _exponent_multiset(op)


def is_fuchsian(ode: FuchsianODE) -> tuple[bool, list]:
    bad = [sp.location for sp in singular_points(ode, classify=False)
           if not local_operator(ode, sp.location).regular]
    return (not bad, bad)


def _integer_exponents(exps) -> list[int] | None:
    out = []
    for e in exps:
        if not isinstance(e, Fraction) or e.denominator != 1:
            return None
        out.append(int(e))
    return out


def is_apparent(ode: FuchsianODE, p: Point, T: int | None = None) -> bool:
    """True iff every local solution at p is analytic there."""
    from .frobenius import local_basis

    p = parse_point(p)
    op = local_operator(ode, p)
    if not op.regular:
        return False
    ints = _integer_exponents(_exponent_multiset(op))
    if ints is None or len(set(ints)) != len(ints) or min(ints) < 0:
        return False
    gap = max(ints) - min(ints)
    if T is None:
        T = gap + 10
    elif T < gap:
        raise PreconditionError(f"increase T: truncation {T} below exponent gap {gap}")
    basis = local_basis(ode, p, T)
    return all(sol.log_degree == 0 for sol in basis.solutions)


def nearest_singularity_distance(ode: FuchsianODE, z, dps: int = 30, exclude=None) -> mp.mpf:
    """Distance from a finite point to the closest finite singular point."""
    best = mp.inf
    with mp.workdps(dps):
        for sp in _finite_singular_locations(ode):
            if exclude is not None and _same_point(sp, exclude):
                continue
            d = abs(point_value(sp, dps) - to_mp(z))
            if d < best:
                best = d
    return best


def _same_point(a, b) -> bool:
    if a is INF or b is INF:
        return a is b
    if isinstance(a, AlgebraicPoint) or isinstance(b, AlgebraicPoint):
        return abs(point_value(a, 30) - point_value(b, 30)) < mp.mpf(10) ** -20
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(to_mp(a) - to_mp(b)) < mp.mpf(10) ** -20


_FINITE_CACHE: dict = {}


def _finite_singular_locations(ode: FuchsianODE) -> list:
    key = ode.coeffs
    if key not in _FINITE_CACHE:
        _FINITE_CACHE[key] = [sp.location for sp in singular_points(ode, classify=False)
                              if sp.location is not INF]
    return _FINITE_CACHE[key]


def max_finite_singular_modulus(ode: FuchsianODE, dps: int = 30):
    locs = _finite_singular_locations(ode)
    if not locs:
        return mp.mpf(0)
    return max(abs(point_value(p, dps)) for p in locs)


def wronskian_logderiv_check(ode: FuchsianODE, samples, digits: int) -> mp.mpf:
    """max over samples of |W'/W + a_{n-1}/a_n| for a numerically built fundamental system.

    The system is built from Taylor solutions at a point displaced from each
    sample, so the check exercises the series machinery rather than the
    initial conditions.
    """
    from .transport import taylor_jets

    n = ode.order
    worst = mp.mpf(0)
    scale = max(mp.mpf(1), max_finite_singular_modulus(ode))
    with mp.workdps(digits + 20):
        for s in samples:
            z = to_mp(parse_point(s) if isinstance(s, str) else s)
            dist = nearest_singularity_distance(ode, z, digits + 20)
            if dist < mp.mpf(10) ** -3 * scale:
                raise PreconditionError(f"sample {mp.nstr(z, 10)} too close to a singular point")
            if dist == mp.inf:
                dist = mp.mpf(1)
            z0 = z - dist / 8
            # jets up to order n at z of the solutions with unit initial data at z0
            J = taylor_jets(ode, z0, z, digits + 20, order=n + 1)
            F = mp.matrix(n, n)
            Fp = mp.matrix(n, n)
            for i in range(n):
                for j in range(n):
                    F[i, j] = J[i][j]
                    Fp[i, j] = J[i][j + 1]
            trace = sum((mp.inverse(F) * Fp)[k, k] for k in range(n))
            expected = -ode.coeffs[n - 1](z) / ode.coeffs[n](z)
            worst = max(worst, abs(trace - expected))
    return worst
