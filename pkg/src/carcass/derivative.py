"""Slopes of the approximations ``h_n``, their product formulas and limits.

On ``I_{n+1,k_n}(g1)`` the slope of ``h_{n+1}`` is the ratio of the widths of
``I_{n+1,k_n}`` in the two grids, and each width factors over the bits of the
point (see :func:`carcass.grids.width_product`).  The one-sided slope
sequences at a point are therefore products of ratios of subdivision
ratios, which is what :func:`lr_limits` classifies.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpq

from .conjugacy import ConjugacyApprox, build_hn, eval_h
from .errors import (
    BitsTooShort,
    Inconclusive,
    IndexOutOfRange,
    InputError,
    NotFirm,
    SideUnavailable,
    TOnBoundary,
)
from .expansion import GExpansion, bits_to_index, encode, expand, p_index
from .grids import PreimageGrid, deltas, rot, width_product
from .maps import ONE, ZERO, format_rational, rational

TINY = mpq(1, 10**12)
HUGE = mpq(10**12)
SPREAD = mpq(1, 10**9)
WIGGLE = mpq(1, 10**6)

SIDES = ("left", "right")


def _check_side(side):
    if side not in SIDES:
        raise InputError(f"side must be 'left' or 'right', got {side!r}")


@dataclass(frozen=True)
class PointNeighborhood:
    """Grid points around ``x`` at level ``n``.

    ``hat = mu_{n+1,k_n}``, ``plus = mu_{n+1,k_n+1}``, ``pm = mu_{n+2,2k_n+1}``;
    ``minus = mu_{n+1,k_n-1}`` and ``mp = mu_{n+2,2k_n-1}`` when ``k_n >= 1``.
    """

    x: object
    n: int
    k: int
    hat: object
    plus: object
    pm: object
    minus: object = None
    mp: object = None

    def ordered(self) -> bool:
        pts = [p for p in (self.minus, self.mp, self.x, self.pm, self.plus) if p is not None]
        return all(a <= b for a, b in zip(pts, pts[1:])) and self.hat <= self.x


def neighborhood(grid: PreimageGrid, x, n: int) -> PointNeighborhood:
    x = rational(x)
    k = encode(grid, x, n).k(n) if x < 1 else (1 << n) - 1
    hat, plus = grid.point(n + 1, k), grid.point(n + 1, k + 1)
    pm = grid.point(n + 2, 2 * k + 1)
    minus = mp = None
    if k >= 1:
        minus = grid.point(n + 1, k - 1)
        mp = grid.point(n + 2, 2 * k - 1)
    return PointNeighborhood(x, n, k, hat, plus, pm, minus, mp)


def slope_hn(h: ConjugacyApprox, x, side: str = "right"):
    """Slope of the ``h_n`` segment on the given side of ``x``."""
    _check_side(side)
    x = rational(x)
    if (x == 0 and side == "left") or (x == 1 and side == "right"):
        raise SideUnavailable(f"no {side} slope at {format_rational(x)}")
    poly = h.polyline
    return poly.slope(poly.segment(x, side))


def _common_n0(g1grid, g2grid) -> int:
    return max(g1grid.n0, g2grid.n0)


def product_formula_general(g1grid: PreimageGrid, g2grid: PreimageGrid, bits):
    """Slope of ``h_{n+1}`` on ``I_{n+1,k_n}`` as a ratio of two width products.

    Both products use the larger of the two ``n0`` values, so their factors
    line up level by level.
    """
    bits = tuple(bits)
    n0 = _common_n0(g1grid, g2grid)
    if len(bits) < n0:
        raise BitsTooShort(f"need at least {n0} bits including x_0")
    return width_product(g2grid, bits, n0) / width_product(g1grid, bits, n0)


def ae(v, a: int, b: int):
    """``v`` if ``a == b`` else ``1 - v``."""
    return v if a == b else 1 - v


def product_formula_skew(v, bits):
    """Slope of ``h_n`` (``n = len(bits)``) from the tent map to the skew tent ``v``.

    The product runs over consecutive pairs starting with ``(x_0, x_1)``.
    """
    v = rational(v)
    bits = tuple(bits)
    out = ONE
    for i in range(1, len(bits)):
        out *= 2 * ae(v, bits[i], bits[i - 1])
    return out


def _left_neighbor_bits(e: GExpansion, n: int) -> tuple:
    """Bits of the level-(n+1) interval just left of a finite point."""
    m = e.depth
    if n < m:
        return e.prefix(n)
    head = e.bits[:m] + (0,)
    return (head + (1,) * (n - m + 1))[: n + 1]


def _bit_stream(g1grid, x, side, depth):
    """Bits ``(x_0..x_depth)`` selecting the one-sided interval at every level."""
    g = g1grid.map
    e = expand(g, x, depth)
    if side == "right":
        return e.prefix(depth)
    if x == 1:
        return (0,) + (1,) * depth
    if e.finite:
        return _left_neighbor_bits(e, depth)
    return e.prefix(depth)


def _width_stream(grid: PreimageGrid, bits, n0: int) -> list:
    """Widths of ``I_{m+1,k_m}`` for ``m = 0..len(bits)-1``.

    Levels up to ``n0`` are read from the grid; deeper ones are extended by
    one factor each, using only the level-n0 subdivision ratios.
    """
    n = len(bits) - 1
    out = [ONE]
    for m in range(1, min(n, n0 - 1) + 1):
        out.append(grid.width(m + 1, bits_to_index(bits[: m + 1])))
    if n >= n0:
        dn0 = deltas(grid, n0)
        w = out[-1]
        for i in range(n0, n + 1):
            w = w * rot(dn0[p_index(bits, i - 1, n0)], bits[i] + bits[i - n0])
            out.append(w)
    return out


def slope_sequence_values(g1grid, g2grid, x, side: str, depth: int) -> list:
    """Exact one-sided slopes of ``h_1, ..., h_depth`` at ``x``."""
    _check_side(side)
    x = rational(x)
    if (x == 0 and side == "left") or (x == 1 and side == "right"):
        raise SideUnavailable(f"no {side} slope at {format_rational(x)}")
    n0 = _common_n0(g1grid, g2grid)
    g1grid.extend(n0)
    g2grid.extend(n0)
    bits = _bit_stream(g1grid, x, side, depth - 1)
    w1 = _width_stream(g1grid, bits, n0)
    w2 = _width_stream(g2grid, bits, n0)
    return [b / a for a, b in zip(w1, w2)]


@dataclass(frozen=True)
class SlopeSequence:
    """One-sided slopes ``h_n'(x -/+)`` for ``n = 1..depth`` with a verdict.

    ``limit`` is set only for ``converges_finite``.
    """

    x: object
    side: str
    values: tuple
    classification: str
    limit: float | None = None
    period: int | None = None

    @property
    def label(self) -> str:
        if self.classification == "converges_finite":
            return f"converges_finite({self.limit:.12g})"
        return self.classification

    def rows(self):
        """CSV rows ``n, slope_num, slope_den, side, classification``."""
        big = 10**300
        for n, s in enumerate(self.values, 1):
            num, den = int(s.numerator), int(s.denominator)
            if abs(num) > big or den > big:
                yield [n, _float_text(s), "", self.side, self.label]
            else:
                yield [n, num, den, self.side, self.label]


def _float_text(q) -> str:
    with gmpy2.context(gmpy2.get_context(), precision=64):
        return format(gmpy2.mpfr(q), ".17g")


def _period(ratios, max_p):
    for p in range(1, max_p + 1):
        if all(ratios[i] == ratios[i + p] for i in range(len(ratios) - p)):
            return p
    return None


def classify_slopes(values, window: int = 8) -> tuple:
    """Verdict on the last ``window`` slopes: ``(label, limit, period)``.

    In order: all below 1e-12 or all above 1e12; an exactly periodic ratio
    pattern whose period product is not 1; relative spread below 1e-9; any
    other periodic pattern, or at least two ratios on each side of 1 by more
    than 1e-6, oscillates.
    """
    if window < 2 or len(values) < window:
        raise IndexOutOfRange(f"need at least {window} values for the window")
    tail = list(values[-window:])
    if all(t < TINY for t in tail):
        return "tends_to_zero", None, None
    if all(t > HUGE for t in tail):
        return "tends_to_infinity", None, None
    if any(t == 0 for t in tail):
        return "undetermined", None, None
    ratios = [b / a for a, b in zip(tail, tail[1:])]
    p = _period(ratios, (window - 1) // 2)
    if p is not None:
        prod = ONE
        for r in ratios[-p:]:
            prod *= r
        if prod < 1:
            return "tends_to_zero", None, p
        if prod > 1:
            return "tends_to_infinity", None, p
    hi, lo = max(tail), min(tail)
    if (hi - lo) / hi < SPREAD:
        return "converges_finite", float(tail[-1]), p
    if p is not None:
        return "oscillates", None, p
    ups = sum(r > 1 + WIGGLE for r in ratios)
    downs = sum(r < 1 - WIGGLE for r in ratios)
    if ups >= 2 and downs >= 2:
        return "oscillates", None, None
    return "undetermined", None, None


def slope_sequence(g1grid, g2grid, x, side: str, depth: int, window: int = 8) -> SlopeSequence:
    values = slope_sequence_values(g1grid, g2grid, x, side, depth)
    label, limit, period = classify_slopes(values, window)
    return SlopeSequence(rational(x), side, tuple(values), label, limit, period)


def lr_limits(g1grid, g2grid, x, depth: int, window: int = 8) -> tuple:
    """``(L, R)`` slope sequences at ``x``.

    At ``x = 0`` both use right slopes and at ``x = 1`` both use left slopes,
    following the one-sided convention for the endpoints.
    """
    if window < 4 or depth < window:
        raise IndexOutOfRange("need depth >= window >= 4")
    x = rational(x)
    left_side = "right" if x == 0 else "left"
    right_side = "left" if x == 1 else "right"
    L = slope_sequence(g1grid, g2grid, x, left_side, depth, window)
    R = slope_sequence(g1grid, g2grid, x, right_side, depth, window)
    return L, R


DeltaLR = namedtuple("DeltaLR", "left right left_err right_err")


def delta_LR(h: ConjugacyApprox, n: int, k: int, t, eps=None) -> DeltaLR:
    """Relative deviations of ``h`` from the chord ``h_n`` at ``t`` in ``I_{n,k}``.

    ``h(t)`` is known only as an enclosure from :func:`eval_h`; the deviations
    are evaluated at its midpoint and the enclosure half-width, scaled by the
    Lipschitz constant of each deviation, is reported as the error.
    """
    if n != h.level:
        h = build_hn(h.source_grid, h.target_grid, n)
    t = rational(t)
    a1, b1 = h.source_grid.interval(n, k)
    a2, b2 = h.target_grid.interval(n, k)
    if not a1 < t < b1:
        raise TOnBoundary(f"t = {format_rational(t)} is not inside I_{{{n},{k}}}")
    s = (b2 - a2) / (b1 - a1)
    if eps is None:
        eps = (b2 - a2) * mpq(1, 2**40)
    lo, hi = eval_h(h.source_grid, h.target_grid, t, eps)
    y, r = (lo + hi) / 2, (hi - lo) / 2
    cl, cr = 1 / (s * (t - a1)), 1 / (s * (b1 - t))
    left = abs((y - a2) * cl - 1)
    right = abs((b2 - y) * cr - 1)
    return DeltaLR(left, right, r * cl, r * cr)


@dataclass(frozen=True)
class Classification:
    """``piecewise_linear`` with the level of the witness, or ``singular``
    with the slope sequence that tends to 0 or infinity."""

    kind: str
    level: int | None = None
    evidence: SlopeSequence | None = field(default=None)

    def __str__(self):
        if self.kind == "piecewise_linear":
            return f"piecewise_linear(level={self.level})"
        ev = self.evidence
        return f"singular(x={format_rational(ev.x)}, side={ev.side}, {ev.classification})"


def refines_trivially(g1grid, g2grid, n: int) -> bool:
    """True when every vertex of ``h_{n+1}`` already lies on ``h_n``."""
    h = build_hn(g1grid, g2grid, n).polyline
    l1, l2 = g1grid.level(n + 1), g2grid.level(n + 1)
    return all(h(l1[j]) == l2[j] for j in range(1, len(l1), 2))


def classify_conjugacy(g1grid, g2grid, probe_depth: int = 12, window: int = 8) -> Classification:
    """Decide piecewise linear versus singular at a finite depth.

    ``h_{n+1} == h_n`` at some ``n >= n0`` forces every later refinement to be
    trivial as well, so the limit is ``h_n``.  Failing that, points of low
    level are probed for a one-sided slope sequence tending to 0 or infinity.
    """
    for grid in (g1grid, g2grid):
        if grid.map.firmness is None:
            raise NotFirm("classification needs firm maps")
    n0 = _common_n0(g1grid, g2grid)
    n = max(probe_depth, n0)
    if refines_trivially(g1grid, g2grid, n):
        return Classification("piecewise_linear", level=n)
    depth = max(probe_depth, n0 + window + 2)
    probes = [ZERO, ONE] + [p for m in range(2, n0 + 2) for p in g1grid.level(m)[1:-1]]
    seen = set()
    for x in probes:
        if x in seen:
            continue
        seen.add(x)
        for side in SIDES:
            if (x == 0 and side == "left") or (x == 1 and side == "right"):
                continue
            seq = slope_sequence(g1grid, g2grid, x, side, depth, window)
            if seq.classification in ("tends_to_zero", "tends_to_infinity"):
                return Classification("singular", evidence=seq)
    raise Inconclusive(f"no witness found at probe depth {probe_depth}")
