"""Command-line front-end.

Maps are given as ``tent``, ``skew:p/q``, ``homeo:PATH`` (a homeomorphism
whose push-forward of the tent map is used) or a path to a breakpoint file.
Exact quantities are written as integers or ``p/q``; lengths as decimals.

Exit codes: 0 success, 2 invalid input, 3 unmet precondition, 4 failed
internal identity check.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from .conjugacy import build_hn, eval_h, verify_semiconjugacy
from .derivative import classify_conjugacy, lr_limits, slope_sequence
from .errors import (
    CarcassError,
    DepthCapExceeded,
    InputError,
    InvariantViolation,
    NotFirmWithinBound,
)
from .expansion import encode, format_expansion
from .grids import DEFAULT_CAP, build_grid, level_rows
from .length import BINOMIAL_CAP, length_sequence
from .maps import (
    certify,
    format_rational,
    load_map,
    rational,
    skew_tent,
    tent,
)


def parse_map_spec(spec: str):
    """Resolve a ``--map`` value to a carcass map, certified when possible."""
    if spec == "tent":
        return tent()
    if spec.startswith("skew:"):
        return skew_tent(rational(spec[5:]))
    try:
        if spec.startswith("homeo:"):
            return load_map(spec[6:], homeomorphism=True)
        g = load_map(spec)
    except OSError as exc:
        raise InputError(f"cannot read map file {spec!r}: {exc.strerror}") from exc
    try:
        return certify(g)
    except NotFirmWithinBound:
        return g


def _writer(out):
    return csv.writer(out, lineterminator="\n")


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _check_depth(depth, cap=DEFAULT_CAP):
    if depth < 1:
        raise InputError("--depth must be positive")
    if depth > cap:
        raise DepthCapExceeded(f"--depth {depth} exceeds the cap {cap}")


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise InputError("missing " + ", ".join("--" + n.replace("_", "-") for n in missing))


GRID_HEADER = ["k", "numerator", "denominator", "width_numerator", "width_denominator"]


def _grid_identities(grid, N):
    g = grid.map
    for n in range(2, N + 1):
        lv, prev = grid.level(n), grid.level(n - 1)
        top = len(lv) - 1
        for k, mu in enumerate(lv):
            if g(mu) != prev[min(k, top - k)]:
                raise InvariantViolation(f"g(mu_{{{n},{k}}}) != mu_{{{n - 1},{min(k, top - k)}}}")


def cmd_grid(args):
    _require(args, "map", "depth")
    _check_depth(args.depth)
    grid = build_grid(parse_map_spec(args.map), args.depth)
    _grid_identities(grid, args.depth)
    if args.out and (os.path.isdir(args.out) or args.out.endswith(os.sep)):
        os.makedirs(args.out, exist_ok=True)
        for n in range(1, args.depth + 1):
            with open(os.path.join(args.out, f"level_{n:02d}.csv"), "w", newline="") as fh:
                w = _writer(fh)
                w.writerow(GRID_HEADER)
                w.writerows(level_rows(grid, n))
        return 0
    out, close = _open_out(args.out)
    try:
        w = _writer(out)
        w.writerow(GRID_HEADER)
        w.writerows(level_rows(grid, args.depth))
    finally:
        if close:
            out.close()
    return 0


def _pair(args):
    _require(args, "map", "map2")
    return parse_map_spec(args.map), parse_map_spec(args.map2)


def cmd_conjugate(args):
    if args.x is None:
        _require(args, "depth")
        _check_depth(args.depth)
    g1, g2 = _pair(args)
    out, close = _open_out(args.out)
    try:
        w = _writer(out)
        if args.x is not None:
            eps = rational(args.eps) if args.eps else rational("1/1000000")
            lo, hi = eval_h(g1, g2, rational(args.x), eps)
            w.writerow(["x", "h_lo", "h_hi", "width"])
            w.writerow([format_rational(rational(args.x)), format_rational(lo),
                        format_rational(hi), format_rational(hi - lo)])
            return 0
        h = build_hn(build_grid(g1, args.depth), build_grid(g2, args.depth), args.depth)
        report = verify_semiconjugacy(h)
        if not report.ok:
            raise InvariantViolation(
                f"semiconjugacy fails at {len(report.violations)} of {report.checked} grid points")
        w.writerow(["x_num", "x_den", "y_num", "y_den"])
        w.writerows(h.rows())
    finally:
        if close:
            out.close()
    print(f"semiconjugacy: {report.checked} grid points checked, 0 violations", file=sys.stderr)
    return 0


def cmd_expand(args):
    _require(args, "map", "x", "depth")
    _check_depth(args.depth + 1)
    grid = build_grid(parse_map_spec(args.map), args.depth + 1)
    e = encode(grid, rational(args.x), args.depth)
    out, close = _open_out(args.out)
    try:
        w = _writer(out)
        w.writerow(["x", "expansion", "finite", "k"])
        w.writerow([format_rational(rational(args.x)), format_expansion(e), int(e.finite),
                    e.k(args.depth) if e.finite or e.depth >= args.depth else ""])
    finally:
        if close:
            out.close()
    return 0


def cmd_derivative(args):
    _require(args, "x", "depth")
    g1, g2 = _pair(args)
    if args.depth < 1:
        raise InputError("--depth must be positive")
    x = rational(args.x)
    n0 = max(g1.n0, g2.n0)
    g1grid, g2grid = build_grid(g1, n0 + 1), build_grid(g2, n0 + 1)
    window = args.window
    if args.side == "both":
        L, R = lr_limits(g1grid, g2grid, x, args.depth, window)
        seqs = [L, R] if L.side != R.side else [L]
    else:
        seqs = [slope_sequence(g1grid, g2grid, x, args.side, args.depth, window)]
    out, close = _open_out(args.out)
    try:
        w = _writer(out)
        w.writerow(["n", "slope_num", "slope_den", "side", "classification"])
        for s in seqs:
            w.writerows(s.rows())
    finally:
        if close:
            out.close()
    return 0


def cmd_length(args):
    _require(args, "depth")
    mode = args.mode
    if args.v is not None:
        _check_depth(args.depth, BINOMIAL_CAP if mode in ("auto", "binomial") else DEFAULT_CAP)
        seq = length_sequence(rational(args.v), args.depth, args.precision, mode)
    else:
        _check_depth(args.depth)
        g1, g2 = _pair(args)
        seq = length_sequence((build_grid(g1, args.depth), build_grid(g2, args.depth)),
                              args.depth, args.precision, "polyline" if mode == "auto" else mode)
    out, close = _open_out(args.out)
    try:
        w = _writer(out)
        w.writerow(["n", "l_n", "monotone_flag", "bound_flag"])
        w.writerows(seq.rows())
    finally:
        if close:
            out.close()
    return 0


def cmd_classify(args):
    g1, g2 = _pair(args)
    depth = args.depth if args.depth is not None else 12
    _check_depth(depth + 1)
    verdict = classify_conjugacy(build_grid(g1, depth + 1), build_grid(g2, depth + 1), depth,
                                 args.window)
    out, close = _open_out(args.out)
    try:
        w = _writer(out)
        w.writerow(["verdict", "level", "x", "side", "classification"])
        if verdict.kind == "piecewise_linear":
            w.writerow([verdict.kind, verdict.level, "", "", ""])
        else:
            ev = verdict.evidence
            w.writerow([verdict.kind, "", format_rational(ev.x), ev.side, ev.classification])
    finally:
        if close:
            out.close()
    return 0


COMMANDS = {
    "grid": cmd_grid,
    "conjugate": cmd_conjugate,
    "expand": cmd_expand,
    "derivative": cmd_derivative,
    "length": cmd_length,
    "classify": cmd_classify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--map", help="tent | skew:p/q | homeo:PATH | PATH")
    common.add_argument("--map2", help="target map, same forms as --map")
    common.add_argument("--depth", type=int, help="grid level or sequence length")
    common.add_argument("--eps", help="target width for conjugacy evaluation, p/q")
    common.add_argument("--x", help="point of [0, 1] as p/q")
    common.add_argument("--side", choices=["left", "right", "both"], default="both")
    common.add_argument("--precision", type=int, default=128, help="bits for square roots")
    common.add_argument("--out", help="output file (or directory for grid); stdout if omitted")
    common.add_argument("--window", type=int, default=8, help="classification window")

    p = _Parser(prog="carcass", description="Conjugacies of piecewise-linear unimodal maps.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("grid", parents=[common], help="pre-image grid levels")
    sub.add_parser("conjugate", parents=[common], help="vertices of h_n, or h(x) with --x")
    sub.add_parser("expand", parents=[common], help="expansion of --x to --depth bits")
    sub.add_parser("derivative", parents=[common], help="slope sequences at --x")
    lp = sub.add_parser("length", parents=[common], help="graph length sequence")
    lp.add_argument("--v", help="skew tent parameter p/q (tent -> skew pair)")
    lp.add_argument("--mode", choices=["auto", "binomial", "polyline", "both"], default="auto")
    sub.add_parser("classify", parents=[common], help="piecewise linear or singular")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.precision < 8:
        print("carcass: error: --precision must be at least 8", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except CarcassError as exc:
        print(f"carcass: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
