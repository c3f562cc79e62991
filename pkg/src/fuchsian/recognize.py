"""Recognition of high-precision numbers as rational combinations of constants.

Relations come from mpmath's PSLQ.  A relation is only accepted when it is
small (coefficients below 10^(P/4)), tight (residual below 10^(-P/2)) and
still holds when everything is recomputed with 20 more digits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath as mp

from .constants import CONSTANTS, eval_constant
from .errors import PreconditionError

VERIFY_EXTRA = 20
MIN_DIGITS = 30
MAX_LENGTH = 12

ALIASES = {
    "1": "one", "one": "one",
    "pi": "pi", "π": "pi",
    "pi^2": "pi2", "pi2": "pi2", "π²": "pi2",
    "1/pi": "inv_pi", "inv_pi": "inv_pi",
    "1/pi^2": "inv_pi2", "inv_pi2": "inv_pi2",
    "sqrt3/pi": "sqrt3_over_pi", "sqrt3_over_pi": "sqrt3_over_pi",
    "pi*sqrt3": "pi_sqrt3", "pi_sqrt3": "pi_sqrt3",
    "sqrt3": "sqrt3", "I3plus": "I3plus", "I3+": "I3plus", "I4minus": "I4minus",
}


def canonical_name(name: str) -> str:
    name = name.strip()
    if name in ALIASES:
        return ALIASES[name]
    if name in CONSTANTS:
        return name
    raise PreconditionError(f"unknown basis constant {name!r}")


def _is_evaluator(x) -> bool:
    # mpmath constants such as mp.pi are callable but are plain numbers here
    return callable(x) and not hasattr(x, "_mpf_")


def _value(x, digits: int):
    return x(digits) if _is_evaluator(x) else +x


def pslq(values: Sequence, digits: int, verify: bool = True) -> list[int] | None:
    """Integer relation among ``values`` (numbers or callables digits -> number).

    Returns the relation, or None when no acceptable relation exists.
    """
    if digits < MIN_DIGITS:
        raise PreconditionError("insufficient precision: PSLQ needs at least 30 digits")
    if len(values) > MAX_LENGTH:
        raise PreconditionError(f"at most {MAX_LENGTH} values")
    if len(values) < 2:
        raise PreconditionError("need at least two values")
    with mp.workdps(digits):
        v = [mp.re(mp.mpmathify(_value(x, digits))) for x in values]
        scale = max(abs(t) for t in v)
        if scale == 0:
            return None
        tol = mp.mpf(10) ** (-digits // 2) * scale
        maxcoeff = int(mp.mpf(10) ** (digits // 4))
        rel = mp.pslq(v, tol=tol, maxcoeff=maxcoeff, maxsteps=100000)
    if rel is None or max(abs(a) for a in rel) >= maxcoeff:
        return None
    if verify and not _holds(rel, values, digits + VERIFY_EXTRA, digits):
        return None
    return [int(a) for a in rel]


def _holds(rel, values, work: int, digits: int) -> bool:
    with mp.workdps(work):
        v = [mp.re(mp.mpmathify(_value(x, work))) for x in values]
        scale = max(max(abs(t) for t in v), mp.mpf(1))
        res = abs(mp.fsum(a * t for a, t in zip(rel, v)))
        return res < mp.mpf(10) ** (-digits // 2) * scale


@dataclass
class ConstantBasis:
    """Named constants with evaluators; values are cached per precision."""
    names: list
    evaluators: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_names(cls, names) -> "ConstantBasis":
        if isinstance(names, str):
            names = [n for n in names.split(",") if n.strip()]
        canon = [canonical_name(n) for n in names]
        if len(set(canon)) != len(canon):
            raise PreconditionError("repeated basis constant")
        return cls(canon)

    @classmethod
    def from_values(cls, values: dict) -> "ConstantBasis":
        """Custom basis: name -> number or callable digits -> number."""
        return cls(list(values), {k: (v if _is_evaluator(v) else (lambda d, v=v: +v))
                                  for k, v in values.items()})

    def evaluator(self, name: str) -> Callable[[int], object]:
        if name in self.evaluators:
            return self.evaluators[name]
        return lambda d, n=name: eval_constant(n, d)

    def values(self, digits: int) -> list:
        if digits not in self._cache:
            self._cache[digits] = [self.evaluator(n)(digits) for n in self.names]
        return self._cache[digits]

    def check_independent(self, digits: int):
        """Raise if PSLQ finds a relation among the basis values themselves."""
        if len(self.names) < 2:
            return
        vals = self.values(digits)
        rel = pslq([(lambda d, k=k: self.values(d)[k]) for k in range(len(vals))], digits)
        if rel is not None:
            terms = {n: a for n, a in zip(self.names, rel) if a}
            raise PreconditionError(f"basis constants are dependent: {terms}")


@dataclass
class Recognized:
    coefficients: dict            # name -> Fraction for the real part
    imaginary: dict | None = None  # same for the imaginary part, None when real

    def is_zero(self) -> bool:
        return not self.coefficients and not self.imaginary


def _denominator_bound(digits: int) -> int:
    return int(mp.mpf(10) ** (digits // 8))


def _recognize_real(x: Callable[[int], object], basis: ConstantBasis, digits: int):
    with mp.workdps(digits):
        xv = mp.re(mp.mpmathify(x(digits)))
        if abs(xv) < mp.mpf(10) ** (-(digits - 10)):
            return {}
    values = [x] + [(lambda d, k=k: mp.re(mp.mpmathify(basis.values(d)[k])))
                    for k in range(len(basis.names))]
    rel = pslq(values, digits)
    if rel is None or rel[0] == 0:
        return None
    a0 = rel[0]
    coeffs = {}
    for name, a in zip(basis.names, rel[1:]):
        if a:
            coeffs[name] = Fraction(-a, a0)
    if any(c.denominator > _denominator_bound(digits) for c in coeffs.values()):
        return None
    return coeffs


def recognize_value(x, basis: ConstantBasis, digits: int) -> Recognized | None:
    """x as sum c_i basis_i with rational c_i, or None (unresolved).

    ``x`` may be a number or a callable digits -> number; a callable lets the
    verification step recompute x at higher precision.
    """
    if digits < 50:
        raise PreconditionError("recognition needs at least 50 digits")
    fx = x if _is_evaluator(x) else (lambda d: x)
    with mp.workdps(digits):
        v = mp.mpmathify(fx(digits))
        im_part = mp.im(v) if isinstance(v, mp.mpc) else mp.mpf(0)
        tiny = mp.mpf(10) ** (-(digits - 10))
    re = _recognize_real(lambda d: mp.re(mp.mpmathify(fx(d))), basis, digits)
    if re is None:
        return None
    if abs(im_part) < tiny:
        return Recognized(re)
    im = _recognize_real(lambda d: mp.im(mp.mpmathify(fx(d))), basis, digits)
    if im is None:
        return None
    return Recognized(re, im)


def recognize_matrix(M, basis: ConstantBasis, digits: int):
    """Cellwise recognition.

    ``M`` is an mpmath matrix or a callable digits -> matrix.  Returns the
    grid of Recognized-or-None and the list of unresolved (row, col) cells.
    """
    fM = M if callable(M) else (lambda d: M)
    M0 = fM(digits)
    grid, unresolved = [], []
    for i in range(M0.rows):
        row = []
        for j in range(M0.cols):
            r = recognize_value(lambda d, i=i, j=j: fM(d)[i, j], basis, digits)
            if r is None:
                unresolved.append((i, j))
            row.append(r)
        grid.append(row)
    return grid, unresolved


def render(rec: Recognized, basis: ConstantBasis, digits: int):
    """Numeric value of a recognized combination."""
    with mp.workdps(digits):
        vals = dict(zip(basis.names, basis.values(digits)))
        re = mp.fsum(mp.mpf(c.numerator) / c.denominator * vals[n]
                     for n, c in rec.coefficients.items())
        if not rec.imaginary:
            return re
        im = mp.fsum(mp.mpf(c.numerator) / c.denominator * vals[n]
                     for n, c in rec.imaginary.items())
        return mp.mpc(re, im)
