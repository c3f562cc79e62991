"""Analytic continuation of fundamental systems and connection matrices.

Fundamental systems are carried as "divided jets": row i holds
y_i^(d)(z)/d! for d = 0..n-1, in the global variable w.  A connection
matrix C(p, q) satisfies B_p = C(p, q) B_q on the region where both local
bases are matched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp

from .errors import PrecisionError, PreconditionError
from .frobenius import (LocalBasis, _heads, _max_gap, _operator, compose_inverse, local_basis,
                        local_jets, radius)
from .ode import (INF, FuchsianODE, Point, _finite_singular_locations, nearest_singularity_distance,
                  parse_point, point_label, point_value)
from .kernel import complex_pair, to_mp

GUARD = 20
STEP_FACTOR = mp.mpf("0.5")
REROUTE_DISTANCE = mp.mpf("0.01")
MAX_STEP_FRACTION = mp.mpf("0.9")


@dataclass
class ConnectionMatrix:
    from_point: Point
    to_point: Point
    entries: mp.matrix
    precision_estimate: int
    path: list = field(default_factory=list)
    digits: int = 30
    condition: mp.mpf | None = None
    branch_from: object = None
    branch_to: object = None

    def to_dict(self) -> dict:
        n = self.entries.rows
        return {
            "from": point_label(self.from_point),
            "to": point_label(self.to_point),
            "digits": self.digits,
            "precision_estimate": self.precision_estimate,
            "entries": [[complex_pair(self.entries[i, j], self.digits) for j in range(n)]
                        for i in range(n)],
            "path": [complex_pair(z, 20) for z in self.path],
        }


# ---------------------------------------------------------------------------
# Taylor stepping between ordinary points
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _ordinary_basis(ode: FuchsianODE, z0_key: tuple, dps: int) -> LocalBasis:
    z0 = mp.mpc(*z0_key)
    return local_basis(ode, z0, T=ode.order, dps=dps)


def _key(z) -> tuple:
    z = mp.mpc(z)
    return (z.real, z.imag)


def _transition(ode: FuchsianODE, z0, z1, dps: int, order: int | None = None) -> list[list]:
    """Row k: divided jets at z1 of the solution whose divided jets at z0 are e_k."""
    n = ode.order
    order = order or n
    with mp.workdps(dps):
        z0 = mp.mpc(z0)
        z1 = mp.mpc(z1)
        dist = nearest_singularity_distance(ode, z0, dps)
        if dist == 0:
            raise PreconditionError("Taylor step from a singular point")
        if abs(z1 - z0) >= MAX_STEP_FRACTION * dist:
            raise PreconditionError("step too large: z1 is not well inside the disk "
                                    "of convergence at z0")
        if z1 == z0:
            return [[mp.mpf(1) if d == k else mp.mpf(0) for d in range(order)] for k in range(n)]
        basis = _ordinary_basis(ode, _key(z0), dps)
        return local_jets(basis, z1 - z0, mp.log(z1 - z0), order, dps)


def taylor_jets(ode: FuchsianODE, z0, z1, dps: int, order: int | None = None) -> list[list]:
    """Derivatives y^(d)(z1), d < order, of the solutions with y^(j)(z0) = delta_jk."""
    rows = _transition(ode, z0, z1, dps, order)
    order = len(rows[0])
    # divided initial data e_k corresponds to y^(k)(z0) = k!
    return [[rows[k][d] * math.factorial(d) / math.factorial(k) for d in range(order)]
            for k in range(len(rows))]


def taylor_step(ode: FuchsianODE, z0, z1, F: mp.matrix, digits: int) -> mp.matrix:
    """Transport a fundamental matrix (rows: solutions, columns: derivatives
    0..n-1 at z0) to z1."""
    dps = digits + GUARD
    with mp.workdps(dps):
        z0, z1 = mp.mpc(to_mp(z0)), mp.mpc(to_mp(z1))
        if abs(z1 - z0) > STEP_FACTOR * nearest_singularity_distance(ode, z0, dps):
            raise PreconditionError("step too large: |z1 - z0| exceeds half the distance "
                                    "to the nearest singularity")
        Tm = mp.matrix(taylor_jets(ode, z0, z1, dps))
        return mp.matrix(F) * Tm


def _divided_step(ode: FuchsianODE, z0, z1, J: mp.matrix, dps: int) -> mp.matrix:
    return J * mp.matrix(_transition(ode, z0, z1, dps))


def _walk(ode: FuchsianODE, start, vertices: list, J: mp.matrix, dps: int) -> tuple[mp.matrix, list]:
    """Chain Taylor steps along a polyline; returns final jets and the visited points."""
    z = mp.mpc(start)
    visited = [z]
    for v in vertices:
        v = mp.mpc(v)
        while abs(v - z) > mp.mpf(10) ** (-dps + 5):
            dist = nearest_singularity_distance(ode, z, dps)
            step = min(abs(v - z), STEP_FACTOR * dist)
            z1 = v if step >= abs(v - z) else z + (v - z) / abs(v - z) * step
            J = _divided_step(ode, z, z1, J, dps)
            z = z1
            visited.append(z)
    return J, visited


def _segment_distance(a, b, c):
    """Distance from c to the segment [a, b]."""
    ab = b - a
    if ab == 0:
        return abs(c - a)
    t = mp.re((c - a) * mp.conj(ab)) / abs(ab) ** 2
    t = min(max(t, 0), 1)
    return abs(a + t * ab - c)


def _check_path(ode: FuchsianODE, pts: list, dps: int):
    sing = [point_value(s, dps) for s in _finite_singular_locations(ode)]
    for a, b in zip(pts, pts[1:]):
        length = abs(b - a)
        if length == 0:
            continue
        for s in sing:
            d = _segment_distance(a, b, s)
            if d < REROUTE_DISTANCE * length:
                raise PreconditionError(
                    f"reroute: path segment passes within {mp.nstr(d, 5)} of singularity "
                    f"{mp.nstr(s, 10)}")


# ---------------------------------------------------------------------------
# evaluation of a local basis as divided jets in w
# ---------------------------------------------------------------------------

def _basis_for(ode: FuchsianODE, p: Point, dps: int) -> LocalBasis:
    # the tables only need to reach the largest exponent gap
    op = _operator(ode, p, dps)
    gap = _max_gap(_heads(op, dps))
    return local_basis(ode, p, T=max(gap, 1), dps=dps)


def global_jets(basis: LocalBasis, w, branch, dps: int) -> mp.matrix:
    """Divided jets in w of every basis solution at w, using ln(z) = Log(z/branch)."""
    n = basis.ode.order
    with mp.workdps(dps):
        w = mp.mpc(w)
        if basis.point is INF:
            z = 1 / w
        else:
            z = w - point_value(basis.point, dps)
        log0 = mp.log(z / branch)
        rows = local_jets(basis, z, log0, n, dps)
        if basis.point is INF:
            rows = [compose_inverse(r, w, n) for r in rows]
        return mp.matrix(rows)


def _unit(z):
    return z / abs(z)


def _local_direction(p: Point, w, dps: int):
    """Unit vector of the local coordinate of w at p."""
    if p is INF:
        return _unit(1 / mp.mpc(w))
    return _unit(mp.mpc(w) - point_value(p, dps))


def _solve_right(A: mp.matrix, B: mp.matrix) -> tuple[mp.matrix, mp.mpf]:
    """C with A = C B, plus the condition number of B."""
    Binv = mp.inverse(B)
    cond = mp.mnorm(B, 1) * mp.mnorm(Binv, 1)
    return A * Binv, cond


def _rel_residual(A: mp.matrix, B: mp.matrix) -> mp.mpf:
    num = mp.mnorm(A - B, 1)
    den = max(mp.mnorm(A, 1), mp.mpf(10) ** -mp.mp.dps)
    return num / den


def _digits_from(res) -> int:
    if res == 0:
        return mp.mp.dps
    return int(mp.floor(-mp.log10(res)))


# ---------------------------------------------------------------------------
# connection matrices
# ---------------------------------------------------------------------------

def _anchor(ode: FuchsianODE, p: Point, toward, frac, dps: int):
    """A point on the way from p toward ``toward`` inside p's disk."""
    toward = mp.mpc(toward)
    r = radius(ode, p, dps)
    if p is INF:
        R = 1 / r if r != mp.inf else mp.mpf(0)
        mod = abs(toward)
        target = max(R / frac, mod) if R > 0 else mod
        return toward / mod * target if mod > 0 else mp.mpc(target)
    pv = point_value(p, dps)
    d = abs(toward - pv)
    step = d if r == mp.inf else min(r * frac, d)
    return pv + (toward - pv) / d * step


def connect(ode: FuchsianODE, p, q, digits: int = 30, branch_from=None) -> ConnectionMatrix:
    """C(p, q) by matching both local bases at a point where both converge."""
    p, q = parse_point(p), parse_point(q)
    dps = digits + GUARD
    with mp.workdps(dps):
        m, m2 = _matching_points(ode, p, q, dps)
        Bp = _basis_for(ode, p, dps)
        Bq = _basis_for(ode, q, dps)
        up = _local_direction(p, m, dps) if branch_from is None else mp.mpc(to_mp(branch_from))
        uq = _local_direction(q, m, dps)
        Jp = global_jets(Bp, m, up, dps)
        Jq = global_jets(Bq, m, uq, dps)
        C, cond = _solve_right(Jp, Jq)
        if cond > mp.mpf(10) ** (dps // 2):
            raise PrecisionError(f"ill-conditioned matching system, condition ~ {mp.nstr(cond, 5)}")
        res = _rel_residual(global_jets(Bp, m2, up, dps), C * global_jets(Bq, m2, uq, dps))
        est = min(digits, _digits_from(res))
        return ConnectionMatrix(p, q, C, est, [m], digits, cond, up, uq)


def _matching_points(ode: FuchsianODE, p: Point, q: Point, dps: int):
    rp, rq = radius(ode, p, dps), radius(ode, q, dps)
    if p is INF or q is INF:
        fin, inf_first = (q, True) if p is INF else (p, False)
        rf = rq if p is INF else rp
        R = max_modulus(ode, dps)
        f = point_value(fin, dps)
        u = _unit(f) if f != 0 else mp.mpc(1)
        lo, hi = max(R - abs(f), mp.mpf(0)), rf
        if hi != mp.inf and lo >= hi:
            raise PreconditionError("disks do not overlap: use path_connect")
        if hi == mp.inf:
            hi = 2 * lo + 2
        m = f + u * (lo + hi) / 2
        m2 = f + u * (lo + 0.6 * (hi - lo))
        return m, m2
    pv, qv = point_value(p, dps), point_value(q, dps)
    d = abs(qv - pv)
    if d == 0:
        raise PreconditionError("identical points")
    if d >= rp + rq:
        raise PreconditionError("disks do not overlap: use path_connect")
    lo = max(mp.mpf(0), 1 - rq / d)
    hi = min(mp.mpf(1), rp / d)
    t = rp / (rp + rq) if rp != mp.inf and rq != mp.inf else (lo + hi) / 2
    t = min(max(t, lo + (hi - lo) * mp.mpf("0.05")), lo + (hi - lo) * mp.mpf("0.95"))
    t2 = t + mp.mpf("0.25") * (min(hi, mp.mpf("0.95")) - t) if t < mp.mpf("0.5") \
        else t - mp.mpf("0.25") * (t - max(lo, mp.mpf("0.05")))
    return pv + (qv - pv) * t, pv + (qv - pv) * t2


def max_modulus(ode: FuchsianODE, dps: int):
    locs = _finite_singular_locations(ode)
    return max((abs(point_value(s, dps)) for s in locs), default=mp.mpf(0))


def path_connect(ode: FuchsianODE, p, q, waypoints=(), digits: int = 30,
                 branch_from=None) -> ConnectionMatrix:
    """C(p, q) by continuation along p -> waypoints -> q."""
    p, q = parse_point(p), parse_point(q)
    wps = [mp.mpc(to_mp(parse_point(w) if isinstance(w, str) else w)) for w in waypoints]
    dps = digits + GUARD
    with mp.workdps(dps):
        if p == q and p is not INF and not wps or (p is INF and q is INF and not wps):
            n = ode.order
            return ConnectionMatrix(p, q, mp.eye(n), digits, [], digits, mp.mpf(1))
        if not wps:
            return connect(ode, p, q, digits, branch_from)
        start = _anchor(ode, p, wps[0], mp.mpf("0.5"), dps)
        end = _anchor(ode, q, wps[-1], mp.mpf("0.5"), dps)
        end2 = _anchor(ode, q, wps[-1], mp.mpf("0.6"), dps)
        polyline = [start] + wps + [end]
        _check_path(ode, polyline, dps)
        Bp = _basis_for(ode, p, dps)
        Bq = _basis_for(ode, q, dps)
        up = _local_direction(p, start, dps) if branch_from is None else mp.mpc(to_mp(branch_from))
        uq = _local_direction(q, end, dps)
        J = global_jets(Bp, start, up, dps)
        J, visited = _walk(ode, start, wps + [end], J, dps)
        Jq = global_jets(Bq, end, uq, dps)
        C, cond = _solve_right(J, Jq)
        if cond > mp.mpf(10) ** (dps // 2):
            raise PrecisionError(f"ill-conditioned matching system, condition ~ {mp.nstr(cond, 5)}")
        # residual at a second point of q's disk
        J2 = _divided_step(ode, end, end2, J, dps) if abs(end2 - end) <= \
            STEP_FACTOR * nearest_singularity_distance(ode, end, dps) else None
        if J2 is not None:
            res = _rel_residual(J2, C * global_jets(Bq, end2, uq, dps))
            est = min(digits, _digits_from(res))
        else:
            est = digits
        return ConnectionMatrix(p, q, C, est, visited, digits, cond, up, uq)
