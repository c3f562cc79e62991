"""Command line front end.

Every command prints one JSON report (or writes it to --out).  Exit codes:
0 success, 2 bad input, 3 precision not reachable, 4 nothing found.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import mpmath as mp
import sympy

from . import constants, fixtures, guess as guess_mod, ising, monodromy, recognize, transport
from .errors import AmbiguousResultError, FuchsianError, PrecisionError, PreconditionError
from .frobenius import local_basis
from .kernel import complex_pair, decimal_str, format_rational
from .ode import FuchsianODE, is_fuchsian, parse_point, point_label, singular_points

EXIT_OK, EXIT_INPUT, EXIT_PRECISION, EXIT_NONE = 0, 2, 3, 4


class Unresolved(Exception):
    """Raised by a command whose report is complete but whose answer is empty."""

    def __init__(self, report: dict):
        super().__init__("unresolved")
        self.report = report


# ---------------------------------------------------------------------------
# input files
# ---------------------------------------------------------------------------

def _read(path: str, inputs: dict) -> str:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise PreconditionError(f"{path}: {exc.strerror}") from None
    inputs[path] = hashlib.sha256(data).hexdigest()
    return data.decode("utf-8")


def _json(path: str, inputs: dict):
    text = _read(path, inputs)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        msg = f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        raise PreconditionError(msg) from None


def load_ode(path: str, inputs: dict) -> FuchsianODE:
    data = _json(path, inputs)
    if not isinstance(data, dict):
        raise PreconditionError(f"{path}: expected an object with 'coeffs'")
    try:
        return FuchsianODE.from_dict(data)
    except PreconditionError as exc:
        raise PreconditionError(f"{path}: {exc}") from None


def load_matrix(path: str, inputs: dict, digits: int) -> mp.matrix:
    """Matrix JSON; entries are [re, im] decimal strings (a bare string is real)."""
    data = _json(path, inputs)
    # accept a bare matrix as well as the reports written by `connect` and `fixtures c014`
    for key in ("result", "matrix"):
        if isinstance(data, dict) and isinstance(data.get(key), dict):
            data = data[key]
    rows = data.get("entries") if isinstance(data, dict) else data
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise PreconditionError(f"{path}: 'entries' must be a list of rows")
    n = len(rows[0])
    M = mp.matrix(len(rows), n)
    with mp.workdps(digits + 20):
        for i, row in enumerate(rows):
            if len(row) != n:
                raise PreconditionError(f"{path}: row {i} has {len(row)} entries, expected {n}")
            for j, cell in enumerate(row):
                try:
                    if isinstance(cell, list):
                        M[i, j] = mp.mpc(mp.mpf(cell[0]), mp.mpf(cell[1]))
                    else:
                        M[i, j] = mp.mpf(cell)
                except (ValueError, IndexError, TypeError):
                    raise PreconditionError(f"{path}: entry ({i}, {j}) is not a number: {cell!r}") \
                        from None
    return M


def _waypoints(text: str | None) -> list:
    if not text:
        return []
    return [parse_point(w) for w in text.split(",") if w.strip()]


def _number(text: str, digits: int):
    """A numeric expression such as "(-3+I*sqrt(7))/8" or "0.25+0.5i", at full precision."""
    try:
        expr = sympy.sympify(text, locals={"i": sympy.I, "j": sympy.I})
        parts = expr.evalf(digits + 10).as_real_imag()
        with mp.workdps(digits + 10):
            re, im = (mp.mpf(str(sympy.Float(t, digits + 10))) for t in parts)
    except (sympy.SympifyError, TypeError, ValueError, SyntaxError):
        raise PreconditionError(f"cannot parse number {text!r}") from None
    return re if im == 0 else mp.mpc(re, im)


def _paths(items) -> dict:
    """--path LABEL=w1;w2 ..."""
    out = {}
    for item in items or []:
        if "=" not in item:
            raise PreconditionError(f"--path expects LABEL=w1;w2, got {item!r}")
        label, rest = item.split("=", 1)
        out[label.strip()] = [w for w in rest.split(";") if w.strip()]
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _exp(e) -> str:
    return format_rational(e) if not isinstance(e, (mp.mpc, mp.mpf)) else mp.nstr(e, 20)


def cmd_analyze(args, inputs):
    ode = load_ode(args.ode, inputs)
    ok, bad = is_fuchsian(ode)
    pts = []
    for sp in singular_points(ode):
        pts.append({"point": sp.label, "regular": sp.regular, "apparent": sp.apparent,
                    "exponents": [_exp(e) for e in sp.exponents] if sp.exponents else None,
                    "note": sp.note})
    return {"ode": ode.to_dict(), "fuchsian": ok, "irregular": [point_label(p) for p in bad],
            "singular_points": pts}


def cmd_frobenius(args, inputs):
    ode = load_ode(args.ode, inputs)
    B = local_basis(ode, args.point, T=args.order, dps=args.digits)
    return {"basis": B.to_dict(), "exact": B.exact}


def cmd_connect(args, inputs):
    ode = load_ode(args.ode, inputs)
    wps = _waypoints(args.waypoints)
    branch = parse_point(args.branch_from) if args.branch_from else None
    if wps:
        C = transport.path_connect(ode, args.source, args.target, wps, args.digits, branch)
    else:
        C = transport.connect(ode, args.source, args.target, args.digits, branch)
    return {"matrix": C.to_dict()}


def cmd_monodromy(args, inputs):
    ode = load_ode(args.ode, inputs)
    points = [p for p in args.points.split(",") if p.strip()]
    gens = monodromy.monodromy_generators(ode, args.base, points, args.digits, _paths(args.path))
    report = {"generators": [g.to_dict(args.digits) for g in gens]}
    rel = monodromy.product_relation(gens)
    report["relation"] = rel.to_dict()
    return report


def cmd_guess(args, inputs):
    series = guess_mod.SeriesData.from_text(_read(args.series, inputs), args.series)
    res = guess_mod.guess(series, args.max_order, args.max_degree, args.method)
    report = res.to_dict()
    report["terms"] = series.N + 1
    if res.ode is None:
        raise Unresolved(report)
    report["annihilated_through"] = guess_mod.verify_annihilation(res.ode, series)
    return report


def _rec_json(rec) -> dict | None:
    if rec is None:
        return None
    out = {"real": {n: format_rational(c) for n, c in rec.coefficients.items()}}
    if rec.imaginary:
        out["imag"] = {n: format_rational(c) for n, c in rec.imaginary.items()}
    return out


def cmd_recognize(args, inputs):
    basis = recognize.ConstantBasis.from_names(args.basis)
    if args.matrix:
        M = load_matrix(args.matrix, inputs, args.digits)
        grid, unresolved = recognize.recognize_matrix(M, basis, args.digits)
        report = {"basis": basis.names, "cells": [[_rec_json(r) for r in row] for row in grid],
                  "unresolved": [list(c) for c in unresolved]}
        if unresolved:
            raise Unresolved(report)
        return report
    x = _number(args.value, args.digits + 20)
    rec = recognize.recognize_value(x, basis, args.digits)
    report = {"basis": basis.names, "value": _rec_json(rec)}
    if rec is None:
        raise Unresolved(report)
    return report


def cmd_constants(args, inputs):
    if args.list:
        return {"constants": {n: constants.CONSTANTS[n][1] for n in sorted(constants.CONSTANTS)}}
    if args.crosscheck:
        P = args.digits
        chk = constants.i3_crosscheck(P)
        return {"crosscheck": {
            "values": {k: decimal_str(v, P) for k, v in chk["values"].items()},
            "residuals": {k: mp.nstr(v, 5) for k, v in chk["residuals"].items()},
            "reference_match": chk["reference_match"], "barnes_g": chk["barnes_g"]}}
    if not args.eval:
        raise PreconditionError("give --eval NAME, --crosscheck or --list")
    v = constants.eval_constant(args.eval, args.digits)
    out = {"name": args.eval, "value": decimal_str(v, args.digits)}
    if args.eval == "I3plus":
        out["matches_printed"] = constants.matches_printed(v, constants.I3PLUS_REFERENCE)
    return out


def cmd_ising(args, inputs):
    if args.ising_cmd == "nickel":
        pts = ising.nickel_singularities(args.n, args.digits)
        return {"n": args.n, "points": [
            {"k": p.k, "m": p.m, "sigma": str(p.sigma), "w": str(p.w),
             "w_value": "inf" if p.w is sympy.oo else decimal_str(p.w_value(args.digits),
                                                                          args.digits),
             "s_moduli": [decimal_str(x, args.digits) for x in p.s_moduli]} for p in pts]}
    if args.ising_cmd == "s-of-w":
        with mp.workdps(args.digits + 10):
            w = _number(args.w, args.digits)
            roots = ising.s_of_w(w, args.digits)
            return {"w": args.w, "s": [complex_pair(s, args.digits) for s in roots],
                    "moduli": [decimal_str(abs(s), args.digits) for s in roots]}
    series = ising.chi_tilde_series(args.n, args.order)
    text = series.to_text()
    if args.series_out:
        Path(args.series_out).write_text(text)
    return {"n": args.n, "order": args.order,
            "coefficients": [format_rational(c) for c in series.coefficients]}


def cmd_fixtures(args, inputs):
    if args.name == "chi3":
        if not args.check:
            M = fixtures.chi3_fixture()
            K = M.domain
            return {"matrix": [[str(K.to_sympy(M[i, j].element)) for j in range(6)]
                               for i in range(6)]}
        return {"checks": fixtures.chi3_fixture_checks()}
    cells = fixtures.c014_fixture()
    report = {"constants": list(fixtures.CONSTANT_NAMES),
              "cells": [[fixtures.cell_to_string(c) for c in row] for row in cells]}
    if args.digits:
        M = fixtures.c014_numeric(args.digits)
        report["digits"] = args.digits
        report["entries"] = [[complex_pair(M[i, j], args.digits) for j in range(6)]
                             for i in range(6)]
    return report


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fuchsian", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="singular points and exponents")
    p.add_argument("--ode", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("frobenius", parents=[common], help="local Frobenius basis")
    p.add_argument("--ode", required=True)
    p.add_argument("--point", default="0")
    p.add_argument("--order", type=int, default=20)
    p.add_argument("--digits", type=int, default=60)
    p.set_defaults(func=cmd_frobenius)

    p = sub.add_parser("connect", parents=[common], help="connection matrix C(from, to)")
    p.add_argument("--ode", required=True)
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("--waypoints", help="comma separated, e.g. 0.25+0.25i,0.5+0.2i")
    p.add_argument("--branch-from", help="unit direction fixing Log at the start point")
    p.add_argument("--digits", type=int, default=30)
    p.set_defaults(func=cmd_connect)

    p = sub.add_parser("monodromy", parents=[common], help="monodromy generators and their product")
    p.add_argument("--ode", required=True)
    p.add_argument("--base", default="0")
    p.add_argument("--points", required=True, help="comma separated, e.g. 0,1,inf")
    p.add_argument("--path", action="append", help="LABEL=w1;w2 waypoints to reach LABEL")
    p.add_argument("--digits", type=int, default=30)
    p.set_defaults(func=cmd_monodromy)

    p = sub.add_parser("guess", parents=[common], help="guess an ODE from a series file")
    p.add_argument("--series", required=True)
    p.add_argument("--max-order", type=int, default=4)
    p.add_argument("--max-degree", type=int, default=8)
    p.add_argument("--method", choices=("modular", "exact"), default="modular")
    p.set_defaults(func=cmd_guess)

    p = sub.add_parser("recognize", parents=[common], help="PSLQ recognition over a constant basis")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--matrix")
    g.add_argument("--value")
    p.add_argument("--basis", required=True, help="comma separated names, e.g. 1,pi,sqrt3_over_pi")
    p.add_argument("--digits", type=int, default=100)
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("constants", parents=[common], help="evaluate named constants")
    p.add_argument("--eval")
    p.add_argument("--digits", type=int, default=50)
    p.add_argument("--crosscheck", action="store_true", help="compare the three I3+ forms")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("ising", help="Nickel singularities, s(w), chi~ series")
    isub = p.add_subparsers(dest="ising_cmd", required=True)
    q = isub.add_parser("nickel", parents=[common])
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--digits", type=int, default=30)
    q = isub.add_parser("s-of-w", parents=[common])
    q.add_argument("--w", required=True)
    q.add_argument("--digits", type=int, default=50)
    q = isub.add_parser("series")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--order", type=int, required=True)
    q.add_argument("--out", dest="series_out", help="write the series file (k p/q per line)")
    p.set_defaults(func=cmd_ising)

    p = sub.add_parser("fixtures", parents=[common], help="published exact matrices")
    p.add_argument("name", choices=("chi3", "c014"))
    p.add_argument("--check", action="store_true")
    p.add_argument("--digits", type=int, help="c014: add a numeric rendering")
    p.set_defaults(func=cmd_fixtures)
    return ap


def _emit(report: dict, out: str | None):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    argv = list(sys.argv[1:] if argv is None else argv)
    inputs: dict = {}
    report = {"command": argv, "inputs": inputs, "digits": getattr(args, "digits", None)}
    code = EXIT_OK
    try:
        report["result"] = args.func(args, inputs)
    except Unresolved as exc:
        report["result"], code = exc.report, EXIT_NONE
    except AmbiguousResultError as exc:
        report["error"], code = str(exc), EXIT_NONE
    except PrecisionError as exc:
        report["error"], code = str(exc), EXIT_PRECISION
    except (PreconditionError, FuchsianError) as exc:
        report["error"], code = str(exc), EXIT_INPUT
    report["status"] = code
    _emit(report, getattr(args, "out", None))
    if "error" in report:
        print(f"fuchsian: {report['error']}", file=sys.stderr)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
