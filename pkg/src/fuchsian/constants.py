"""Multiprecision constants: dilogarithm, Clausen, trigamma, zeta(3), Catalan,
and the two Ising constants I3+ and I4-.

All evaluators take a number of significant decimal digits P and return an
mpmath number computed with a guard of GUARD digits; the caller's working
precision is left untouched.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Callable

import mpmath as mp

from .errors import PreconditionError

GUARD = 15

# the 51 decimals printed for the triple integral defining I3+
I3PLUS_REFERENCE = "0.000814462565662504439391217128562721997861158118508"


def _eps():
    return mp.mpf(2) ** (-mp.mp.prec)


# ---------------------------------------------------------------------------
# dilogarithm
# ---------------------------------------------------------------------------

def _li2_series(z):
    """sum z^k / k^2, for |z| <= 1/2."""
    total = mp.mpc(0)
    zk = z
    k = 1
    eps = _eps()
    while True:
        term = zk / (k * k)
        total += term
        if abs(term) < eps * max(abs(total), eps):
            return total
        k += 1
        zk *= z


@lru_cache(maxsize=16)
def _bernoulli_coeffs(prec: int, count: int) -> tuple:
    """B_n / (n+1)! for n = 0..count-1, at binary precision prec."""
    with mp.workprec(prec):
        return tuple(mp.bernoulli(n) / mp.factorial(n + 1) for n in range(count))


def _li2_bernoulli(z):
    """sum B_n u^(n+1)/(n+1)! with u = -ln(1-z); converges for |u| < 2 pi."""
    u = -mp.log(1 - z)
    eps = _eps()
    count = 64
    while True:
        coeffs = _bernoulli_coeffs(mp.mp.prec, count)
        total = mp.mpc(0)
        up = u
        small = 0
        for n, c in enumerate(coeffs):
            term = c * up
            total += term
            up *= u
            # odd Bernoulli numbers beyond B_1 vanish; count small even terms only
            if n >= 2 and n % 2 == 0:
                small = small + 1 if abs(term) < eps * max(abs(total), eps) else 0
                if small >= 2:
                    return total
        count *= 2


def dilog(z, digits: int = 30, side: str | None = None):
    """Principal-branch Li2(z), cut [1, inf).

    Points on the cut need ``side``: "+" for z + i0, "-" for z - i0.
    """
    with mp.workdps(digits + GUARD):
        z = mp.mpc(z)
        if z == 0:
            return mp.mpf(0)
        if z == 1:
            return mp.pi**2 / 6
        on_cut = z.imag == 0 and z.real > 1
        if on_cut and side not in ("+", "-"):
            raise PreconditionError("z lies on the branch cut [1, inf); pass side='+' or '-'")
        val = _li2(z, side if on_cut else None)
        if val.imag == 0 or (z.imag == 0 and z.real <= 1):
            val = mp.mpf(val.real)
    return +val


def _li2(z, side):
    if abs(z) <= 0.5:
        return _li2_series(z)
    if abs(z) > 1:
        # Li2(z) = -pi^2/6 - ln(-z)^2/2 - Li2(1/z)
        if side is None:
            lm = mp.log(-z)
        else:
            lm = mp.log(abs(z)) + (-1j if side == "+" else 1j) * mp.pi
        return -mp.pi**2 / 6 - lm**2 / 2 - _li2(1 / z, None)
    if abs(1 - z) <= 0.5 or z.real > 0.5:
        # Li2(z) = pi^2/6 - ln z ln(1-z) - Li2(1-z)
        w = 1 - z
        return mp.pi**2 / 6 - mp.log(z) * mp.log(w) - _li2(w, None)
    return _li2_bernoulli(z)


def clausen2(theta, digits: int = 30):
    """Cl2(theta) = Im Li2(e^{i theta}), theta reduced to [0, 2 pi)."""
    with mp.workdps(digits + GUARD):
        theta = mp.mpf(theta)
        twopi = 2 * mp.pi
        t = theta - twopi * mp.floor(theta / twopi)
        if t == 0 or abs(t - mp.pi) < _eps() * 4:
            return mp.mpf(0)
        if t > mp.pi:
            return -clausen2(twopi - t, digits)
        return mp.im(_li2(mp.expj(t), None))


# ---------------------------------------------------------------------------
# trigamma
# ---------------------------------------------------------------------------

def trigamma(x, digits: int = 30):
    """psi'(x) = sum_{k>=0} 1/(x+k)^2 for x > 0."""
    with mp.workdps(digits + GUARD):
        if isinstance(x, Fraction):
            x = mp.mpf(x.numerator) / x.denominator
        x = mp.mpf(x)
        if x <= 0:
            raise PreconditionError("trigamma needs x > 0")
        # shift until the asymptotic series reaches the working precision
        shift = max(0, int(mp.ceil(digits / 2 + 10 - x)))
        head = mp.fsum(1 / (x + k) ** 2 for k in range(shift))
        y = x + shift
        tail = 1 / y + 1 / (2 * y**2)
        eps = _eps()
        y2 = y * y
        yp = y**3
        k = 1
        while True:
            term = mp.bernoulli(2 * k) / yp
            tail += term
            if abs(term) < eps * tail:
                break
            k += 1
            yp *= y2
        return head + tail


# ---------------------------------------------------------------------------
# zeta(3), Catalan
# ---------------------------------------------------------------------------

def zeta3(digits: int = 30, method: str = "apery"):
    """zeta(3).

    ``apery``: 5/2 sum (-1)^(k+1) / (k^3 binom(2k, k)), ratio about -1/4.
    ``direct``: sum_{k<N} 1/k^3 plus an Euler-Maclaurin tail.
    """
    with mp.workdps(digits + GUARD):
        eps = _eps()
        if method == "apery":
            total = mp.mpf(0)
            binom = 1
            k = 1
            while True:
                binom = binom * 2 * (2 * k - 1) // k
                term = mp.mpf(1) / (k**3 * binom)
                total += term if k % 2 else -term
                if term < eps:
                    break
                k += 1
            return 5 * total / 2
        if method == "direct":
            N = int(digits / 2) + 20
            head = mp.fsum(mp.mpf(1) / k**3 for k in range(1, N))
            # sum_{k>=N} k^-3 = N^-2/2 + N^-3/2 + sum_j B_2j/(2j)! (3)_(2j-1) N^(-2-2j)
            n = mp.mpf(N)
            tail = 1 / (2 * n**2) + 1 / (2 * n**3)
            j = 1
            while True:
                rising = mp.rf(3, 2 * j - 1)
                term = mp.bernoulli(2 * j) / mp.factorial(2 * j) * rising / n ** (2 + 2 * j)
                tail += term
                if abs(term) < eps:
                    break
                j += 1
            return head + tail
        raise PreconditionError(f"unknown zeta(3) method {method!r}")


def catalan(digits: int = 30):
    """G = pi/8 ln(2+sqrt 3) + 3/8 sum 1/((2k+1)^2 binom(2k,k))."""
    with mp.workdps(digits + GUARD):
        eps = _eps()
        total = mp.mpf(0)
        binom = 1
        k = 0
        while True:
            term = mp.mpf(1) / ((2 * k + 1) ** 2 * binom)
            total += term
            if term < eps:
                break
            k += 1
            binom = binom * 2 * (2 * k - 1) // k
        return mp.pi / 8 * mp.log(2 + mp.sqrt(3)) + 3 * total / 8


# ---------------------------------------------------------------------------
# I3+ and I4-
# ---------------------------------------------------------------------------

def i3_plus_clausen(digits: int = 30):
    with mp.workdps(digits + GUARD):
        pi2 = mp.pi**2
        return (pi2 / 3 + 2 - 3 * mp.sqrt(3) * clausen2(mp.pi / 3, digits + GUARD)) / (2 * pi2)


def i3_plus_dilog(digits: int = 30):
    # written with dilog(x) = Li2(1 - x), evaluated at x = 1/2 - i sqrt(3)/2
    with mp.workdps(digits + GUARD):
        x = mp.mpc(mp.mpf(1) / 2, -mp.sqrt(3) / 2)
        pi2 = mp.pi**2
        im = mp.im(dilog(1 - x, digits + GUARD))
        return mp.mpf(1) / 6 + 1 / pi2 - 3 * mp.sqrt(3) / (2 * pi2) * im


def i3_plus_polygamma(digits: int = 30):
    with mp.workdps(digits + GUARD):
        d = digits + GUARD
        s = (trigamma(Fraction(2, 3), d) + trigamma(Fraction(5, 6), d)
             - trigamma(Fraction(1, 6), d) - trigamma(Fraction(1, 3), d))
        pi2 = mp.pi**2
        return s / (16 * pi2) + mp.mpf(1) / 6 + 1 / pi2


def i3_plus(digits: int = 30):
    return i3_plus_clausen(digits)


def i4_minus(digits: int = 30):
    """(4 pi^2/9 - 1/6 - 7 zeta(3)/2) / (16 pi^3)."""
    with mp.workdps(digits + GUARD):
        pi = mp.pi
        return (4 * pi**2 / 9 - mp.mpf(1) / 6 - 7 * zeta3(digits + GUARD) / 2) / (16 * pi**3)


def matches_printed(value, printed: str) -> bool:
    """True when ``value`` truncated or rounded to the printed decimals equals them."""
    whole, _, frac = printed.partition(".")
    d = len(frac)
    target = int(whole + frac)
    with mp.workdps(d + 20):
        scaled = mp.mpf(value) * mp.mpf(10) ** d
        return int(mp.floor(scaled)) == target or int(mp.nint(scaled)) == target


def i3_crosscheck(digits: int = 200) -> dict:
    """Pairwise residuals between the closed forms of I3+."""
    if digits < 50:
        raise PreconditionError("i3_crosscheck needs at least 50 digits")
    forms = {
        "clausen": i3_plus_clausen(digits),
        "dilog": i3_plus_dilog(digits),
        "polygamma": i3_plus_polygamma(digits),
    }
    names = list(forms)
    with mp.workdps(digits + GUARD):
        residuals = {f"{a}-{b}": abs(forms[a] - forms[b])
                     for i, a in enumerate(names) for b in names[i + 1:]}
    return {
        "digits": digits,
        "values": forms,
        "residuals": residuals,
        "barnes_g": "not evaluated",
        "reference_match": matches_printed(forms["clausen"], I3PLUS_REFERENCE),
    }


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def _with(f: Callable) -> Callable[[int], object]:
    def ev(digits: int):
        with mp.workdps(digits + GUARD):
            return +f()
    return ev


CONSTANTS: dict[str, tuple[Callable[[int], object], str]] = {
    "pi": (_with(lambda: +mp.pi), "pi"),
    "sqrt3": (_with(lambda: mp.sqrt(3)), "square root of 3"),
    "log2": (_with(lambda: +mp.ln2), "natural logarithm of 2"),
    "euler_gamma": (_with(lambda: +mp.euler), "Euler's constant"),
    "zeta3": (zeta3, "Apery's constant zeta(3)"),
    "catalan": (catalan, "Catalan's constant"),
    "I3plus": (i3_plus, "Ising constant I3+ (Clausen form)"),
    "I4minus": (i4_minus, "Ising constant I4-"),
    "clausen_pi_over_3": (lambda d: _clausen_pi3(d), "Cl2(pi/3)"),
    # products and powers used as recognition basis elements
    "one": (_with(lambda: mp.mpf(1)), "1"),
    "pi2": (_with(lambda: mp.pi**2), "pi^2"),
    "inv_pi": (_with(lambda: 1 / mp.pi), "1/pi"),
    "inv_pi2": (_with(lambda: 1 / mp.pi**2), "1/pi^2"),
    "sqrt3_over_pi": (_with(lambda: mp.sqrt(3) / mp.pi), "sqrt(3)/pi"),
    "pi_sqrt3": (_with(lambda: mp.pi * mp.sqrt(3)), "pi*sqrt(3)"),
}

PUBLIC_NAMES = ("pi", "sqrt3", "log2", "zeta3", "catalan", "euler_gamma", "I3plus", "I4minus",
                "clausen_pi_over_3")


def _clausen_pi3(digits: int):
    with mp.workdps(digits + GUARD):
        return clausen2(mp.pi / 3, digits)


def eval_constant(name: str, digits: int = 30):
    try:
        f, _ = CONSTANTS[name]
    except KeyError:
        raise PreconditionError(f"unknown constant {name!r}") from None
    with mp.workdps(digits + GUARD):
        return f(digits)


def basis_values(names, digits: int) -> dict:
    return {n: eval_constant(n, digits) for n in names}
