"""Monodromy generators expressed in the local basis at a base point.

M_p(q) = C(p, q) Loc_q C(p, q)^-1: the loop leaves p along the path used
for C(p, q), winds once counterclockwise around q and comes back.  All
connections from p share one determination of ln(w - p), placed in the
widest angular gap between the outgoing paths so that no path crosses it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import mpmath as mp

from .errors import PreconditionError
from .frobenius import local_basis, local_monodromy
from .ode import INF, FuchsianODE, Point, _same_point, parse_point, point_label, point_value
from .transport import GUARD, ConnectionMatrix, _basis_for, connect, path_connect


@dataclass
class MonodromyGenerator:
    point: Point
    base_point: Point
    matrix: mp.matrix
    connection: ConnectionMatrix | None = None
    orientation: str = "counterclockwise"
    digits: int = 30

    def to_dict(self, digits: int = 30) -> dict:
        from .kernel import complex_pair
        n = self.matrix.rows
        return {
            "point": point_label(self.point),
            "base": point_label(self.base_point),
            "orientation": self.orientation,
            "matrix": [[complex_pair(self.matrix[i, j], digits) for j in range(n)]
                       for i in range(n)],
        }


def _first_direction(ode: FuchsianODE, p: Point, q: Point, waypoints, dps: int):
    """Unit direction in which the path to q leaves p (in p's local coordinate)."""
    target = waypoints[0] if waypoints else (None if q is INF else point_value(q, dps))
    if p is INF:
        if target is None:
            raise PreconditionError("loop from infinity to infinity")
        z = 1 / mp.mpc(target)
    else:
        pv = point_value(p, dps)
        if target is None:
            # straight out to infinity from p: direction away from the origin
            z = pv if pv != 0 else mp.mpc(1)
        else:
            z = mp.mpc(target) - pv
    return z / abs(z)


def base_branch(directions) -> mp.mpc:
    """Unit u such that the cut of Log(z/u) (the ray -u) bisects the widest gap
    between the given directions."""
    if not directions:
        return mp.mpc(1)
    angles = sorted(float(mp.arg(d)) % (2 * mp.pi) for d in directions)
    best, cut = -1.0, 0.0
    for a, b in zip(angles, angles[1:] + [angles[0] + 2 * mp.pi]):
        if b - a > best:
            best, cut = b - a, (a + b) / 2
    return -mp.expj(cut)


def monodromy_generators(ode: FuchsianODE, base, points, digits: int = 30,
                         paths: dict | None = None) -> list[MonodromyGenerator]:
    """One generator per point, in the order given.

    ``paths`` maps a point (label or value) to the waypoint list used to reach
    it from the base point; points without an entry are connected directly.
    """
    p = parse_point(base)
    pts = [parse_point(q) for q in points]
    paths = {point_label(parse_point(k)): list(v) for k, v in (paths or {}).items()}
    dps = digits + GUARD
    with mp.workdps(dps):
        routes = [paths.get(point_label(q), []) for q in pts]
        dirs = [_first_direction(ode, p, q, [mp.mpc(w) if not isinstance(w, str) else
                                            mp.mpc(complex(w.replace("i", "j"))) for w in r], dps)
                for q, r in zip(pts, routes) if not _same_point(p, q)]
        u = base_branch(dirs)
        out = []
        for q, route in zip(pts, routes):
            if _same_point(p, q):
                B = local_basis(ode, p, T=_basis_for(ode, p, dps).truncation, dps=dps)
                Loc = local_monodromy(B, "numeric", digits + GUARD // 2)
                out.append(MonodromyGenerator(q, p, Loc, digits=digits))
                continue
            if route:
                C = path_connect(ode, p, q, route, digits, branch_from=u)
            else:
                C = connect(ode, p, q, digits, branch_from=u)
            Bq = _basis_for(ode, q, dps)
            Loc = local_monodromy(Bq, "numeric", digits + GUARD // 2)
            M = C.entries * Loc * mp.inverse(C.entries)
            out.append(MonodromyGenerator(q, p, M, C, digits=digits))
    return out


def _max_abs(M: mp.matrix):
    return max((abs(M[i, j]) for i in range(M.rows) for j in range(M.cols)), default=mp.mpf(0))


def _product(mats):
    n = mats[0].rows
    acc = mp.eye(n)
    for M in mats:
        acc = acc * M
    return acc


@dataclass
class RelationReport:
    residual: mp.mpf
    best_shift: int
    best_residual: mp.mpf
    ordering: list

    def to_dict(self) -> dict:
        return {
            "residual": mp.nstr(self.residual, 5),
            "best_shift": self.best_shift,
            "best_residual": mp.nstr(self.best_residual, 5),
            "ordering": self.ordering,
        }


def product_relation(generators, ordering=None) -> RelationReport:
    """max-norm of M_1 ... M_k - Id for the given order (default: list order),
    together with the best cyclic shift of that order."""
    gens = list(generators)
    if not gens:
        raise PreconditionError("no generators")
    if ordering is not None:
        by_label = {point_label(g.point): g for g in gens}
        gens = [by_label[point_label(parse_point(o))] for o in ordering]
    mats = [g.matrix for g in gens]
    n = mats[0].rows
    residuals = []
    with mp.workdps(max(g.digits for g in gens) + GUARD):
        for s in range(len(mats)):
            shifted = mats[s:] + mats[:s]
            residuals.append(_max_abs(_product(shifted) - mp.eye(n)))
    best = min(range(len(residuals)), key=lambda s: residuals[s])
    labels = [point_label(g.point) for g in gens]
    return RelationReport(residuals[0], best, residuals[best], labels)


def search_orderings(generators) -> list[tuple[list, mp.mpf]]:
    """Residual of every ordering up to cyclic shift (first generator fixed)."""
    gens = list(generators)
    first, rest = gens[0], gens[1:]
    out = []
    n = first.matrix.rows
    with mp.workdps(max(g.digits for g in gens) + GUARD):
        for perm in itertools.permutations(rest):
            order = [first] + list(perm)
            res = _max_abs(_product([g.matrix for g in order]) - mp.eye(n))
            out.append(([point_label(g.point) for g in order], res))
    out.sort(key=lambda t: t[1])
    return out


def eigenvalue_check(generator: MonodromyGenerator, ode: FuchsianODE, digits: int) -> mp.mpf:
    """Distance between the eigenvalues of a generator and {exp(2 pi i rho)}."""
    from .ode import indicial_exponents
    from .kernel import to_mp
    with mp.workdps(digits + GUARD):
        expected = []
        for r in indicial_exponents(ode, generator.point):
            expected.append(mp.expj(2 * mp.pi * to_mp(r)))
        ev = mp.eig(generator.matrix, left=False, right=False)
        ev = list(ev)
        worst = mp.mpf(0)
        # greedy matching; multiplicities make the eigenvalues of a Jordan block
        # accurate only to about digits/size, which callers account for
        for e in expected:
            k = min(range(len(ev)), key=lambda i: abs(ev[i] - e))
            worst = max(worst, abs(ev[k] - e))
            ev.pop(k)
        return worst
