"""Polyline approximations ``h_n`` of the conjugacy between two firm carcass maps.

``h_n`` is the increasing polyline sending the level-n grid of ``g1`` onto the
level-n grid of ``g2``.  The conjugacy itself is the pointwise limit; it is
evaluated here only as a certified bracketing interval.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    DepthCapExceeded,
    InputError,
    LevelMissing,
    NotFirm,
    OutOfDomain,
    OutOfRange,
)
from .expansion import bits_to_index, expand
from .grids import PreimageGrid, grid_point
from .maps import ONE, ZERO, CarcassMap, evaluate, format_rational, rational

DEFAULT_MAX_DEPTH = 256


class Polyline:
    """An increasing piecewise-linear function given by exact vertices."""

    __slots__ = ("xs", "ys")

    def __init__(self, xs, ys):
        xs, ys = tuple(xs), tuple(ys)
        if len(xs) != len(ys) or len(xs) < 2:
            raise InputError("a polyline needs matching vertex lists of length >= 2")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InputError("polyline abscissas must increase")
        self.xs, self.ys = xs, ys

    @classmethod
    def identity(cls) -> "Polyline":
        return cls((ZERO, ONE), (ZERO, ONE))

    def __len__(self):
        return len(self.xs)

    def __eq__(self, other):
        if not isinstance(other, Polyline):
            return NotImplemented
        return self.xs == other.xs and self.ys == other.ys

    def __repr__(self):
        return f"Polyline({len(self.xs)} vertices)"

    @property
    def vertices(self):
        return list(zip(self.xs, self.ys))

    def segment(self, x, side: str = "right") -> int:
        """Index of the segment containing ``x``; at a vertex ``side`` decides."""
        x = rational(x)
        xs = self.xs
        if not xs[0] <= x <= xs[-1]:
            raise OutOfDomain(f"{format_rational(x)} is outside the polyline's domain")
        i = bisect_right(xs, x) - 1
        if side == "left" and xs[i] == x:
            i -= 1
        return min(max(i, 0), len(xs) - 2)

    def __call__(self, x):
        x = rational(x)
        xs, ys = self.xs, self.ys
        i = self.segment(x)
        if xs[i] == x:
            return ys[i]
        return ys[i] + (ys[i + 1] - ys[i]) * (x - xs[i]) / (xs[i + 1] - xs[i])

    def slope(self, i: int):
        return (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])

    def slopes(self) -> list:
        return [self.slope(i) for i in range(len(self.xs) - 1)]

    def is_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.ys, self.ys[1:]))


@dataclass(frozen=True)
class ConjugacyApprox:
    """``h_n`` between the maps of ``source_grid`` and ``target_grid``."""

    source_grid: PreimageGrid
    target_grid: PreimageGrid
    level: int

    @cached_property
    def polyline(self) -> Polyline:
        return Polyline(self.source_grid.level(self.level), self.target_grid.level(self.level))

    def __call__(self, x):
        return self.polyline(x)

    @property
    def vertices(self):
        return self.polyline.vertices

    def rows(self):
        """CSV rows ``x_num, x_den, y_num, y_den``."""
        for x, y in self.vertices:
            yield [int(x.numerator), int(x.denominator), int(y.numerator), int(y.denominator)]


def build_hn(g1grid: PreimageGrid, g2grid: PreimageGrid, n: int) -> ConjugacyApprox:
    for grid in (g1grid, g2grid):
        try:
            grid.extend(n)
        except DepthCapExceeded as exc:
            raise LevelMissing(str(exc)) from exc
    return ConjugacyApprox(g1grid, g2grid, n)


def eval_hn(h, x):
    return h(x)


@dataclass(frozen=True)
class SemiconjugacyReport:
    level: int
    checked: int
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_semiconjugacy(h: ConjugacyApprox) -> SemiconjugacyReport:
    """Check ``g2(h(mu)) == h(g1(mu))`` at every level-n grid point of ``g1``."""
    g1, g2 = h.source_grid.map, h.target_grid.map
    poly = h.polyline
    bad = []
    for mu, hmu in zip(poly.xs, poly.ys):
        lhs = evaluate(g2, hmu)
        rhs = poly(evaluate(g1, mu))
        if lhs != rhs:
            bad.append((mu, lhs, rhs))
    return SemiconjugacyReport(h.level, len(poly.xs), tuple(bad))


def _as_map(obj) -> CarcassMap:
    return obj.map if isinstance(obj, PreimageGrid) else obj


def eval_h(g1grid, g2grid, x, eps, max_depth: int = DEFAULT_MAX_DEPTH) -> tuple:
    """Certified enclosure ``(lo, hi)`` of the limit conjugacy at ``x``.

    The ``g1``-expansion of ``x`` picks the interval ``I_{n,k}(g1)`` holding
    ``x`` at each level; ``h`` maps it onto ``I_{n,k}(g2)``.  Levels deepen
    until that image is narrower than ``eps``.  Grid points of ``g1`` give a
    degenerate interval, as does any ``x`` when the two maps coincide.
    Accepts grids or maps; no grid is materialized.
    """
    g1, g2 = _as_map(g1grid), _as_map(g2grid)
    for g in (g1, g2):
        if g.firmness is None:
            raise NotFirm("conjugacy evaluation needs firm maps")
    x, eps = rational(x), rational(eps)
    if eps <= 0:
        raise InputError("eps must be positive")
    if x == 0 or x == 1 or g1 == g2:
        # equal maps are conjugated by the identity
        return x, x
    e = expand(g1, x, max_depth)
    if e.finite:
        p = grid_point(g2, e.depth + 1, bits_to_index(e.bits))
        return p, p
    for n in range(1, max_depth + 1):
        k = bits_to_index(e.bits[: n + 1])
        lo = grid_point(g2, n + 1, k)
        hi = grid_point(g2, n + 1, k + 1)
        if hi - lo < eps:
            return lo, hi
    raise DepthCapExceeded(f"width {format_rational(eps)} not reached within {max_depth} levels")


def functional_iteration(c1, c2, n: int) -> Polyline:
    """Apply ``phi -> (c2 phi(x/c1) | (c2-1) phi((x-1)/(c1-1)) + 1)`` ``n`` times.

    Starting from the identity, the result conjugates the skew tent maps with
    peaks ``c1`` and ``c2`` up to level ``n + 1``.
    """
    c1, c2 = rational(c1), rational(c2)
    if not (0 < c1 < 1 and 0 < c2 < 1):
        raise OutOfRange("c1 and c2 must lie in (0, 1)")
    if n < 0:
        raise InputError("n must be non-negative")
    xs, ys = [ZERO, ONE], [ZERO, ONE]
    for _ in range(n):
        left_x = [c1 * a for a in xs]
        left_y = [c2 * b for b in ys]
        right_x = [1 - (1 - c1) * a for a in reversed(xs)]
        right_y = [1 - (1 - c2) * b for b in reversed(ys)]
        xs = left_x + right_x[1:]
        ys = left_y + right_y[1:]
    return Polyline(xs, ys)
