"""Ising-specific helpers: Nickel singularities, the s <-> w maps, the S+/S-
prefactors and low-order series of the normalized n-particle terms.

Series of chi~(n) are produced in the formal domain.  With z = e^{i phi},
x~ solves w(1 + x~^2) = (1 - w(z + 1/z)) x~ and is obtained by fixed-point
iteration in the w-adic topology; y~ = 2w / (1 - w(z + 1/z) - 2w x~).  The
angular average over phi_1 + ... + phi_n = 0 of a product f_1(phi_1)...
f_n(phi_n) is sum_m f_1^(m) ... f_n^(m), which lets every term of the
expanded integrand be averaged from one-angle Fourier coefficients.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import sympy

from .errors import PreconditionError
from .guess import SeriesData

MAX_ORDER = {1: 400, 2: 80, 3: 30}


# ---------------------------------------------------------------------------
# singularities and variable changes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NickelPoint:
    k: int
    m: int
    sigma: object          # s + 1/s, exact sympy expression
    w: object              # exact sympy expression, or sympy.oo
    s_moduli: tuple        # |s| of both roots of s + 1/s = sigma

    def w_value(self, digits: int = 30):
        if self.w is sympy.oo:
            return mp.inf
        with mp.workdps(digits):
            return mp.mpf(sympy.N(self.w, digits + 5))


def nickel_singularities(n: int, digits: int = 30) -> list[NickelPoint]:
    """Points w = 1/(2 sigma), sigma = cos(2 pi k/N) + cos(2 pi m/N), N = 2n+1,
    over -n <= k, m <= n with (k, m) != (0, 0), deduplicated by value."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    N = 2 * n + 1
    seen: dict = {}
    for k in range(-n, n + 1):
        for m in range(-n, n + 1):
            if k == 0 and m == 0:
                continue
            sigma = sympy.nsimplify(sympy.cos(2 * sympy.pi * k / N) + sympy.cos(2 * sympy.pi * m / N))
            sigma = sympy.radsimp(sympy.simplify(sigma))
            with mp.workdps(digits + 10):
                sv = mp.mpf(sympy.N(sigma, digits + 10))
                key = mp.nstr(sv, digits)
                if key in seen:
                    continue
                if sigma == 0:
                    w = sympy.oo
                else:
                    w = sympy.radsimp(sympy.nsimplify(1 / (2 * sigma)))
                disc = mp.sqrt(mp.mpc(sv**2 - 4))
                mods = tuple(sorted((abs((sv + disc) / 2), abs((sv - disc) / 2))))
            seen[key] = NickelPoint(k, m, sigma, w, mods)
    return sorted(seen.values(), key=lambda p: float(p.w_value()) if p.w is not sympy.oo
                  else float("inf"))


def w_of_s(s):
    """w = s / (2 (1 + s^2)); invariant under s -> 1/s."""
    if isinstance(s, (int, Fraction)):
        s = Fraction(s)
        if 1 + s * s == 0:
            raise PreconditionError("s = +-i maps to w = infinity")
        return s / (2 * (1 + s * s))
    s = mp.mpmathify(s)
    if 1 + s * s == 0:
        raise PreconditionError("s = +-i maps to w = infinity")
    return s / (2 * (1 + s * s))


def s_of_w(w, digits: int = 50):
    """Both roots of 2w s^2 - s + 2w = 0: (1 +- sqrt(1 - 16 w^2)) / (4w)."""
    with mp.workdps(digits + 10):
        w = mp.mpmathify(w)
        if w == 0:
            raise PreconditionError("w = 0 corresponds to s = 0 and s = infinity")
        r = mp.sqrt(1 - 16 * w * w)
        return ((1 + r) / (4 * w), (1 - r) / (4 * w))


def normalization_factor(s, parity: str, digits: int = 30):
    """S+ = (1 - s^4)^(1/4) / s (odd n), S- = (1 - s^-4)^(1/4) (even n), principal root."""
    if parity not in ("odd", "even"):
        raise PreconditionError("parity must be 'odd' or 'even'")
    with mp.workdps(digits + 10):
        s = mp.mpmathify(s)
        if s == 0:
            raise PreconditionError("s = 0")
        base = 1 - s**4 if parity == "odd" else 1 - s**-4
        if mp.im(base) == 0 and mp.re(base) < 0:
            raise PreconditionError(
                "on the branch cut of the fourth root: perturb s (Im s > 0 or < 0) to pick a side")
        root = mp.root(base, 4)
        return +(root / s if parity == "odd" else root)


# ---------------------------------------------------------------------------
# one-angle series in w
# ---------------------------------------------------------------------------
# A series truncated at w^T is a list of T+1 rows; row k lists the integer
# coefficients of z^m, m = -T..T (z = e^{i phi}).  Every series used here has
# nonnegative integer coefficients, so products can be done by Kronecker
# substitution: pack all coefficients into one big integer, multiply, unpack.


def _zero(T):
    return [[0] * (2 * T + 1) for _ in range(T + 1)]


def _add(a, b, scale=1):
    return [[x + scale * y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _pack(a, slot: int, width: int) -> int:
    nbytes = width // 8
    buf = bytearray(len(a) * slot * nbytes)
    for k, row in enumerate(a):
        base = k * slot
        for j, c in enumerate(row):
            if c:
                pos = (base + j) * nbytes
                buf[pos:pos + nbytes] = c.to_bytes(nbytes, "little")
    return int.from_bytes(buf, "little")


def _mul(a, b, T, rows=None):
    """Product truncated at w^T (rows beyond ``rows`` are left zero)."""
    rows = T if rows is None else rows
    a, b = a[:rows + 1], b[:rows + 1]
    span = 2 * T + 1
    slot = 2 * span - 1                  # room for m1 + m2 without overlap
    bound = max(max(map(max, a)), 1) * max(max(map(max, b)), 1) * span * (rows + 1)
    width = (bound.bit_length() + 8) // 8 * 8
    prod = _pack(a, slot, width) * _pack(b, slot, width)
    nbytes = width // 8
    raw = prod.to_bytes(max((prod.bit_length() + 7) // 8, 1), "little")
    out = []
    for k in range(T + 1):
        row = [0] * span
        if k <= rows:
            for j in range(span):
                pos = (k * slot + j + T) * nbytes
                chunk = raw[pos:pos + nbytes]
                if chunk:
                    row[j] = int.from_bytes(chunk, "little")
        out.append(row)
    return out


def _shift_w(a, T):
    """w * a."""
    return [[0] * (2 * T + 1)] + [list(r) for r in a[:T]]


@lru_cache(maxsize=8)
def _xy(T: int):
    """(x~, y~) as one-angle series truncated at w^T."""
    one = _zero(T)
    one[0][T] = 1
    zsum = _zero(T)
    zsum[0][T - 1] = zsum[0][T + 1] = 1           # z + 1/z
    x = _zero(T)
    # x = w (1 + x^2) + w (z + 1/z) x ; pass j fixes the coefficient of w^j
    for j in range(1, T + 1):
        x = _shift_w(_add(_add(one, _mul(x, x, T, j - 1)), _mul(zsum, x, T, j - 1)), T)
    # y = 2w + u y,  u = w (z + 1/z) + 2 w x
    u = _shift_w(_add(zsum, x, 2), T)
    two_w = _zero(T)
    two_w[1][T] = 2
    y = _zero(T)
    for j in range(1, T + 1):
        y = _add(two_w, _mul(u, y, T, j))
    return x, y


@lru_cache(maxsize=128)
def _y_times_x_power(a: int, T: int):
    if a == 0:
        return _xy(T)[1]
    return _mul(_y_times_x_power(a - 1, T), _xy(T)[0], T)


def _fourier_column(series, m: int, T: int) -> list:
    """The w-series of Fourier coefficient m."""
    if abs(m) > T:
        return [0] * (T + 1)
    return [r[m + T] for r in series]


def _series_mul_1d(a, b, T):
    out = [0] * (T + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(T + 1 - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


def _angular_average(factors, shifts, T):
    """Constant mode of prod_i F_i(phi_i) e^{i s_i phi_i} over sum phi_i = 0."""
    lo = max(-T + s for s in shifts)
    hi = min(T + s for s in shifts)
    total = [0] * (T + 1)
    for m in range(lo, hi + 1):
        acc = None
        for f, s in zip(factors, shifts):
            col = _fourier_column(f, m - s, T)
            acc = col if acc is None else _series_mul_1d(acc, col, T)
            if not any(acc):
                break
        total = [p + q for p, q in zip(total, acc)]
    return total


def chi_tilde_series(n: int, T: int) -> SeriesData:
    """Coefficients of chi~(n)(w) through w^T for n in {1, 2, 3}."""
    if n not in MAX_ORDER:
        raise PreconditionError("n must be 1, 2 or 3")
    if T > MAX_ORDER[n]:
        raise PreconditionError(f"order {T} beyond the guard {MAX_ORDER[n]} for n = {n}")
    if T < 1:
        raise PreconditionError("T must be >= 1")
    if n == 1:
        # 2w / (1 - 4w)
        return SeriesData((Fraction(0),) + tuple(Fraction(2 * 4 ** (k - 1)) for k in range(1, T + 1)),
                          "chi1")
    return SeriesData(tuple(expand_integrand(n, T)), f"chi{n}")


def expand_integrand(n: int, T: int) -> list:
    """Angular average of the expanded integrand, power by power (any n >= 1)."""
    pairs = list(itertools.combinations(range(n), 2))
    budget = T - n           # every factor y~ carries at least one w
    coeffs = [Fraction(0)] * (T + 1)
    # R = 1 + 2 sum_{k>=1} X^k, X = prod x~_i ; H pair factor
    # 4 x_i x_j sum_k (k+1) (x_i x_j)^k * (1/2 - (e^{i(phi_i-phi_j)} + e^{-i(...)})/4)
    sin2 = ((0, Fraction(1, 2)), (1, Fraction(-1, 4)), (-1, Fraction(-1, 4)))
    terms: dict = defaultdict(Fraction)
    for kR in range(budget // n + 1):
        wR = 1 if kR == 0 else 2
        rest = budget - n * kR - 2 * len(pairs)
        if rest < 0:
            break
        for ks in _compositions_bounded(len(pairs), rest // 2):
            a = [kR] * n
            weight = Fraction(wR)
            for (i, j), k in zip(pairs, ks):
                a[i] += 1 + k
                a[j] += 1 + k
                weight *= 4 * (k + 1)
            if sum(a) > budget:
                continue
            for choice in itertools.product(sin2, repeat=len(pairs)):
                shift = [0] * n
                wt = weight
                for (i, j), (e, c) in zip(pairs, choice):
                    shift[i] += e
                    shift[j] -= e
                    wt *= c
                terms[(tuple(a), tuple(shift))] += wt
    for (a, shift), wt in terms.items():
        if not wt:
            continue
        factors = [_y_times_x_power(ai, T) for ai in a]
        avg = _angular_average(factors, shift, T)
        for k, v in enumerate(avg):
            if v:
                coeffs[k] += wt * v
    return coeffs


def _compositions_bounded(parts: int, bound: int):
    """Tuples of `parts` nonnegative integers with sum <= bound."""
    if parts == 0:
        yield ()
        return
    for first in range(bound + 1):
        for rest in _compositions_bounded(parts - 1, bound - first):
            yield (first,) + rest
