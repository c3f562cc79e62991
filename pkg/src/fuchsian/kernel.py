"""Exact arithmetic and linear algebra used by every other module.

Rationals are :class:`fractions.Fraction`; multiprecision complex numbers are
:mod:`mpmath` ``mpc`` values, whose mantissas carry their own precision.
Bivariate rational functions in the formal symbols ``alpha`` and ``Omega``
live in a sympy fraction field (see :func:`ratfun_field`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath as mp
import sympy

from .errors import PreconditionError

Rational = Fraction


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int/Fraction into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    text = str(text).strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise PreconditionError(f"not a rational number: {text!r}") from exc


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# multiprecision helpers
# ---------------------------------------------------------------------------

def to_mp(x):
    """Convert ints, Fractions, complex numbers and mpmath values to mpmath."""
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    if isinstance(x, (mp.mpf, mp.mpc)):
        return x
    if isinstance(x, complex):
        return mp.mpc(x.real, x.imag)
    if isinstance(x, sympy.Basic):
        v = sympy.N(x, mp.mp.dps + 5)
        re, im = v.as_real_imag()
        return mp.mpc(mp.mpf(str(re)), mp.mpf(str(im))) if im != 0 else mp.mpf(str(re))
    return mp.mpmathify(x)


def decimal_str(x, digits: int) -> str:
    """Fixed number of significant digits, deterministic across runs."""
    with mp.workdps(digits + 10):
        x = mp.mpf(x)
        if x == 0:
            return "0"
        return mp.nstr(x, digits, strip_zeros=False, min_fixed=-mp.inf, max_fixed=mp.inf)


def complex_pair(z, digits: int) -> list[str]:
    with mp.workdps(digits + 10):
        z = mp.mpc(z)
        return [decimal_str(z.real, digits), decimal_str(z.imag, digits)]


# ---------------------------------------------------------------------------
# univariate polynomials over Q
# ---------------------------------------------------------------------------

def _trim(coeffs: Iterable) -> tuple:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Poly:
    """Dense univariate polynomial, coefficients in ascending order."""

    coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(Fraction(c) for c in self.coeffs))

    @classmethod
    def from_roots(cls, roots: Sequence) -> "Poly":
        p = cls((1,))
        for r in roots:
            p = p * cls((-Fraction(r), 1))
        return p

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __len__(self):
        return len(self.coeffs)

    def _coerce(self, other) -> "Poly":
        return other if isinstance(other, Poly) else Poly((other,))

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self), len(other))
        return Poly(self[k] + other[k] for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self) + len(other) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly((1,))
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, x):
        """Horner evaluation; works for Fractions and mpmath numbers alike."""
        if isinstance(x, (mp.mpf, mp.mpc)):
            acc = mp.mpf(0)
            for c in reversed(self.coeffs):
                acc = acc * x + to_mp(c)
            return acc
        acc = Fraction(0) if not isinstance(x, Poly) else Poly()
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Poly":
        return Poly(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def shift(self, a) -> "Poly":
        """Coefficients of p(x + a), exact Taylor shift."""
        c = list(self.coeffs)
        n = len(c)
        for i in range(n):
            for j in range(n - 2, i - 1, -1):
                c[j] += a * c[j + 1]
        return Poly(c)

    def valuation(self) -> int:
        """Order of vanishing at 0; ``-1`` for the zero polynomial."""
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return -1

    def reverse(self, degree: int | None = None) -> "Poly":
        """x^degree * p(1/x)."""
        d = self.degree if degree is None else degree
        return Poly(self[d - k] for k in range(d + 1))

    def divmod(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        q = [Fraction(0)] * max(len(r) - len(other) + 1, 0)
        lead = other.coeffs[-1]
        for k in range(len(q) - 1, -1, -1):
            f = r[k + other.degree] / lead
            q[k] = f
            if f:
                for j, b in enumerate(other.coeffs):
                    r[k + j] -= f * b
        return Poly(q), Poly(r)

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        lead = self.coeffs[-1]
        return Poly(c / lead for c in self.coeffs)

    def content(self) -> Fraction:
        """Positive rational c with p/c primitive with integer coefficients."""
        if self.is_zero():
            return Fraction(1)
        den = math.lcm(*(c.denominator for c in self.coeffs))
        num = math.gcd(*(c.numerator for c in self.coeffs))
        return Fraction(num, den)

    def primitive(self) -> "Poly":
        c = self.content()
        return Poly(x / c for x in self.coeffs)

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def to_sympy(self, var):
        return sum(sympy.Rational(c.numerator, c.denominator) * var**k
                   for k, c in enumerate(self.coeffs))

    @classmethod
    def from_sympy(cls, expr, var) -> "Poly":
        p = sympy.Poly(expr, var)
        coeffs = p.all_coeffs()[::-1]
        return cls(Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in coeffs)

    def factor_list(self) -> list[tuple["Poly", int]]:
        """Irreducible factors over Q (primitive, positive leading coefficient)."""
        if self.degree < 1:
            return []
        x = sympy.Symbol("x")
        _, facs = sympy.factor_list(self.to_sympy(x), x)
        out = [(Poly.from_sympy(f, x), m) for f, m in facs]
        out = [(f if f.coeffs[-1] > 0 else -f, m) for f, m in out]
        return sorted(out, key=lambda fm: (fm[0].degree, fm[0].coeffs))

    def rational_roots(self) -> list[tuple[Fraction, int]]:
        return [(-f[0] / f[1], m) for f, m in self.factor_list() if f.degree == 1]

    def __repr__(self):
        if self.is_zero():
            return "Poly(0)"
        terms = [f"{format_rational(c)}*x^{k}" for k, c in enumerate(self.coeffs) if c]
        return "Poly(" + " + ".join(terms) + ")"


# ---------------------------------------------------------------------------
# exact linear algebra
# ---------------------------------------------------------------------------

def _integer_rows(M) -> list[list[int]]:
    rows = []
    for row in M:
        row = [Fraction(x) for x in row]
        den = math.lcm(*(x.denominator for x in row)) if row else 1
        rows.append([int(x * den) for x in row])
    return rows


def _normalize_vector(v: Sequence[Fraction]) -> tuple[int, ...]:
    den = math.lcm(*(Fraction(x).denominator for x in v))
    ints = [int(Fraction(x) * den) for x in v]
    g = math.gcd(*ints) or 1
    ints = [x // g for x in ints]
    lead = next((x for x in ints if x), 1)
    if lead < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def bareiss_echelon(M) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form of an integer-scaled copy of M.

    Returns the echelon rows (only the nonzero ones) and the pivot columns.
    """
    A = _integer_rows(M)
    rows, cols = len(A), len(A[0]) if A else 0
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        p = next((i for i in range(r, rows) if A[i][c]), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        piv = A[r][c]
        for i in range(r + 1, rows):
            a_ic = A[i][c]
            Ai, Ar = A[i], A[r]
            for j in range(c, cols):
                Ai[j] = (piv * Ai[j] - a_ic * Ar[j]) // prev
        prev = piv
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rational_nullspace(M) -> list[tuple[int, ...]]:
    """Basis of the right kernel of a rational matrix.

    Each vector is scaled to coprime integers with first nonzero entry
    positive; the list is empty iff M has full column rank.
    """
    M = [list(row) for row in M]
    if not M or not M[0]:
        raise PreconditionError("empty matrix")
    cols = len(M[0])
    E, pivots = bareiss_echelon(M)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for r in range(len(pivots) - 1, -1, -1):
            pc = pivots[r]
            s = sum((E[r][j] * v[j] for j in range(pc + 1, cols) if v[j]), Fraction(0))
            v[pc] = -s / E[r][pc]
        basis.append(_normalize_vector(v))
    return basis


def mat_vec(M, v) -> list[Fraction]:
    return [sum((Fraction(a) * b for a, b in zip(row, v)), Fraction(0)) for row in M]


def modular_nullspace(M_int: Sequence[Sequence[int]], p: int) -> tuple[list[int], list[list[int]]]:
    """Kernel of an integer matrix modulo a prime, in reduced echelon form.

    Returns (pivot columns, basis) where each basis vector has a 1 at its
    free column and 0 at the other free columns.
    """
    A = [[x % p for x in row] for row in M_int]
    rows, cols = len(A), len(A[0])
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        piv = next((i for i in range(r, rows) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [(x * inv) % p for x in A[r]]
        for i in range(rows):
            if i != r and A[i][c]:
                f = A[i][c]
                Ai, Ar = A[i], A[r]
                A[i] = [(a - f * b) % p for a, b in zip(Ai, Ar)]
        pivots.append(c)
        r += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * cols
        v[f] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-A[i][f]) % p
        basis.append(v)
    return pivots, basis


def crt(residues: Sequence[int], moduli: Sequence[int]) -> tuple[int, int]:
    """Combine residues modulo pairwise coprime moduli."""
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        t = ((r - x) * pow(m, -1, n)) % n
        x += m * t
        m *= n
    return x % m, m


def rational_reconstruct(residue: int, modulus: int, bound: int) -> Fraction | None:
    """Find p/q with |p|, q <= bound and p = residue*q (mod modulus)."""
    if modulus < 2 or not 0 <= residue < modulus:
        raise PreconditionError("residue must lie in [0, modulus)")
    if bound < 1 or 2 * bound * bound > modulus:
        raise PreconditionError("bound too large for modulus: need 2*bound^2 <= modulus")
    r0, r1 = modulus, residue
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if math.gcd(r1, abs(s1)) != 1:
        return None
    res = Fraction(r1, s1)
    if (res.numerator - residue * res.denominator) % modulus:
        return None
    return res


@lru_cache(maxsize=None)
def word_primes(count: int, start: int = 2**61) -> tuple[int, ...]:
    """The first ``count`` primes above ``start``."""
    out = []
    p = start
    while len(out) < count:
        p = int(sympy.nextprime(p))
        out.append(p)
    return tuple(out)


# ---------------------------------------------------------------------------
# bivariate rational functions in the formal symbols alpha, Omega
# ---------------------------------------------------------------------------

ALPHA, OMEGA = sympy.symbols("alpha Omega")


@lru_cache(maxsize=None)
def ratfun_field():
    """The field Q(alpha, Omega); elements are kept in reduced form."""
    return sympy.QQ.frac_field(ALPHA, OMEGA)
