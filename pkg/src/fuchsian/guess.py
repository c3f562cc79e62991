"""Guessing a linear ODE with polynomial coefficients from a truncated series.

For a shape (r, d) the unknowns are the coefficients c[i][j] of
p_i(w) = sum_j c[i][j] w^j, i <= r, j <= d.  The coefficient of w^m in
sum_i p_i(w) y^(i)(w) is linear in them; equations are kept while every
coefficient of y they use is known.  The last HELD_OUT equations are kept
aside and only used to confirm a candidate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import AmbiguousResultError, PreconditionError
from .kernel import (_normalize_vector, crt, modular_nullspace, parse_rational, rational_nullspace,
                     rational_reconstruct, word_primes)
from .ode import FuchsianODE

HELD_OUT = 10
MIN_PRIMES = 3
MAX_PRIMES = 64


@dataclass(frozen=True)
class SeriesData:
    coefficients: tuple
    origin: str = ""

    def __post_init__(self):
        cs = tuple(Fraction(c) for c in self.coefficients)
        if len(cs) < 2:
            raise PreconditionError("series needs at least two coefficients (N >= 1)")
        object.__setattr__(self, "coefficients", cs)

    @property
    def N(self) -> int:
        return len(self.coefficients) - 1

    def scaled(self, c) -> "SeriesData":
        return SeriesData(tuple(Fraction(c) * x for x in self.coefficients), self.origin)

    def to_text(self) -> str:
        from .kernel import format_rational
        return "".join(f"{k} {format_rational(c)}\n" for k, c in enumerate(self.coefficients))

    @classmethod
    def from_text(cls, text: str, origin: str = "") -> "SeriesData":
        """Lines "k p/q"; indices must run 0, 1, 2, ... without gaps."""
        coeffs = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise PreconditionError(f"line {lineno}: expected 'k p/q', got {line!r}")
            try:
                k = int(parts[0])
            except ValueError:
                raise PreconditionError(f"line {lineno}: bad index {parts[0]!r}") from None
            if k != len(coeffs):
                raise PreconditionError(f"line {lineno}: expected index {len(coeffs)}, got {k}")
            try:
                coeffs.append(parse_rational(parts[1]))
            except PreconditionError as exc:
                raise PreconditionError(f"line {lineno}: {exc}") from None
        return cls(tuple(coeffs), origin)


def shapes(rmax: int, dmax: int):
    """(r, d) with r >= 1 by increasing (r+1)(d+1), ties by smaller r."""
    out = [(r, d) for r in range(1, rmax + 1) for d in range(dmax + 1)]
    out.sort(key=lambda s: ((s[0] + 1) * (s[1] + 1), s[0], s[1]))
    return out


def _derivative_table(y: Sequence[Fraction], r: int) -> list[list[Fraction]]:
    """D[i][k] = coefficient of w^k in y^(i), k <= N - i."""
    N = len(y) - 1
    return [[y[k + i] * math.perm(k + i, i) for k in range(N - i + 1)] for i in range(r + 1)]


def _system(y: Sequence[Fraction], r: int, d: int) -> list[list[Fraction]]:
    """Rows m = 0 .. N - r, columns (i, j) in order i-major."""
    N = len(y) - 1
    D = _derivative_table(y, r)
    rows = []
    for m in range(N - r + 1):
        row = []
        for i in range(r + 1):
            for j in range(d + 1):
                row.append(D[i][m - j] if m - j >= 0 else Fraction(0))
        rows.append(row)
    return rows


def _to_ode(v: Sequence, r: int, d: int) -> FuchsianODE | None:
    polys = [tuple(Fraction(v[i * (d + 1) + j]) for j in range(d + 1)) for i in range(r + 1)]
    if not any(polys[r]):
        return None
    try:
        return FuchsianODE(polys)
    except PreconditionError:
        return None


def _annihilates(rows, v) -> bool:
    return all(sum((a * b for a, b in zip(row, v) if a and b), Fraction(0)) == 0 for row in rows)


# ---------------------------------------------------------------------------
# nullspaces: exact and multimodular
# ---------------------------------------------------------------------------

def _mod(x: Fraction, p: int) -> int | None:
    if x.denominator % p == 0:
        return None
    return x.numerator * pow(x.denominator, -1, p) % p


def _nullspace_exact(rows) -> list[tuple[int, ...]]:
    return rational_nullspace(rows)


def _nullspace_modular(rows) -> list[tuple[int, ...]]:
    """Kernel via images modulo word-size primes, CRT and rational reconstruction.

    Primes whose rank differs from the best rank seen are discarded as
    unlucky.  Reconstructed vectors are checked exactly before returning.
    """
    cols = len(rows[0])
    images: list[tuple[int, list]] = []
    best_pivots = None
    primes = word_primes(MAX_PRIMES)
    for count, p in enumerate(primes, 1):
        reduced = []
        for row in rows:
            r = [_mod(x, p) for x in row]
            if any(t is None for t in r):
                break
            reduced.append(r)
        else:
            pivots, basis = modular_nullspace(reduced, p)
            key = tuple(pivots)
            if best_pivots is None or (len(key), [-c for c in key]) > (len(best_pivots),
                                                                       [-c for c in best_pivots]):
                best_pivots, images = key, []
            if key == best_pivots:
                images.append((p, basis))
        if len(images) < MIN_PRIMES:
            continue
        if not images[0][1]:
            return []
        vecs = _reconstruct(images, cols)
        if vecs is not None and all(_annihilates(rows, v) for v in vecs):
            return [_normalize_vector(v) for v in vecs]
    raise PreconditionError("modular nullspace did not stabilize; use the exact path")


def _reconstruct(images, cols) -> list[list[Fraction]] | None:
    moduli = [p for p, _ in images]
    nvec = len(images[0][1])
    out = []
    for k in range(nvec):
        v = []
        for c in range(cols):
            x, m = crt([basis[k][c] for _, basis in images], moduli)
            q = rational_reconstruct(x, m, math.isqrt(m // 2))
            if q is None:
                return None
            v.append(q)
        out.append(v)
    return out


# ---------------------------------------------------------------------------
# the scan
# ---------------------------------------------------------------------------

@dataclass
class GuessResult:
    ode: FuchsianODE | None
    shape: tuple | None = None
    tried: list = field(default_factory=list)
    minimal_order: bool | None = None

    def to_dict(self) -> dict:
        return {
            "ode": self.ode.to_dict() if self.ode else None,
            "shape": list(self.shape) if self.shape else None,
            "tried": [list(s) for s in self.tried],
        }


def guess(series: SeriesData, rmax: int = 4, dmax: int = 8, method: str = "modular") -> GuessResult:
    """Scan shapes and return the first verified ODE (see module docstring)."""
    if method not in ("modular", "exact"):
        raise PreconditionError(f"unknown method {method!r}")
    kernel = _nullspace_modular if method == "modular" else _nullspace_exact
    y = series.coefficients
    N = series.N
    if all(c == 0 for c in y):
        raise PreconditionError("zero series")
    tried = []
    for r, d in shapes(rmax, dmax):
        unknowns = (r + 1) * (d + 1)
        if N < unknowns + HELD_OUT:
            continue
        tried.append((r, d))
        rows = _system(y, r, d)
        fit, held = rows[:-HELD_OUT], rows[-HELD_OUT:]
        ker = kernel(fit)
        if not ker:
            continue
        if len(ker) == 1:
            if _annihilates(held, ker[0]):
                ode = _to_ode(ker[0], r, d)
                if ode is not None:
                    return GuessResult(ode, (r, d), tried, r == ode.order)
            continue
        full = kernel(rows)
        if len(full) > 1:
            raise AmbiguousResultError(
                f"need more terms: shape (r={r}, d={d}) leaves a {len(full)}-dimensional family")
        if len(full) == 1:
            ode = _to_ode(full[0], r, d)
            if ode is not None:
                return GuessResult(ode, (r, d), tried, r == ode.order)
    return GuessResult(None, None, tried)


def guess_ode(series: SeriesData, rmax: int = 4, dmax: int = 8,
              method: str = "modular") -> FuchsianODE | None:
    return guess(series, rmax, dmax, method).ode


def verify_annihilation(ode: FuchsianODE, series: SeriesData) -> int:
    """Largest M with L(y) = O(w^(M+1)), checked through index N - order."""
    out = ode.apply_to_series(series.coefficients)
    for m, c in enumerate(out):
        if c != 0:
            return m - 1
    return len(out) - 1
