"""Pre-image grids ``mu_{n,k}``: the ordered zeros of ``g^n`` on [0, 1].

Level 1 is ``{0, 1}`` and level ``n`` has ``2^(n-1) + 1`` points.  Level
``n + 1`` consists of the increasing-branch pre-images of level ``n`` followed
by the decreasing-branch pre-images in reverse order, so that
``g(mu_{n+1,k}) = mu_{n,k}`` on the left half and the right half mirrors it.

A grid stores only its deepest level; shallower levels are strided views,
since ``mu_{n,k} = mu_{n+1,2k}``.
"""

from __future__ import annotations

import threading
import weakref
from collections import namedtuple
from dataclasses import dataclass

from .errors import (
    BitsTooShort,
    DepthCapExceeded,
    IndexOutOfRange,
    InputError,
    NotFirm,
)
from .expansion import bits_to_index, p_index
from .maps import ONE, ZERO, CarcassMap, branch_inverses, rational

DEFAULT_CAP = 24

IntervalIndex = namedtuple("IntervalIndex", "k exact")


def rot(t, bit: int = 1):
    """``1 - t`` when ``bit`` is odd, ``t`` otherwise."""
    return 1 - t if bit & 1 else t


def _preimage_level(g: CarcassMap, level):
    inc, dec = branch_inverses(g)
    left = _branch_preimages(inc, level)
    right = _branch_preimages(dec, level)
    right.reverse()
    return left + right[1:]


def _branch_preimages(segments, ys):
    # ys ascending; segments ascending in y and covering [0, 1]
    out = []
    i = 0
    y_hi = segments[0][1]
    a, b = segments[0][2], segments[0][3]
    for y in ys:
        while y > y_hi:
            i += 1
            y_hi = segments[i][1]
            a, b = segments[i][2], segments[i][3]
        out.append(a * y + b)
    return out


class PreimageGrid:
    """Lazily deepened pre-image hierarchy of a firm carcass map.

    Levels are computed on demand up to ``cap``; extension is serialized by
    a lock while completed data is never mutated, so readers need no locking.
    """

    def __init__(self, g: CarcassMap, cap: int = DEFAULT_CAP):
        if g.firmness is None:
            raise NotFirm("pre-image grids need a firmness certificate")
        self.map = g
        self.cap = cap
        self._top = (ZERO, ONE)
        self._depth = 1
        self._levels = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"PreimageGrid(peak={self.map.peak}, depth={self._depth}, cap={self.cap})"

    @property
    def n0(self) -> int:
        return self.map.n0

    @property
    def depth(self) -> int:
        return self._depth

    def extend(self, n: int) -> "PreimageGrid":
        if n > self.cap:
            raise DepthCapExceeded(f"level {n} exceeds the grid cap {self.cap}")
        if n <= self._depth:
            return self
        with self._lock:
            top, depth = self._top, self._depth
            while depth < n:
                top = tuple(_preimage_level(self.map, top))
                depth += 1
            self._top, self._depth = top, depth
            self._levels = {}
        return self

    def level(self, n: int) -> tuple:
        if n < 1:
            raise IndexOutOfRange(f"levels start at 1, got {n}")
        self.extend(n)
        top, depth = self._top, self._depth
        if n == depth:
            return top
        cached = self._levels.get(n)
        if cached is None:
            cached = top[:: 1 << (depth - n)]
            self._levels[n] = cached
        return cached

    def point(self, n: int, k: int):
        if n < 1 or not 0 <= k <= 1 << (n - 1):
            raise IndexOutOfRange(f"mu_{{{n},{k}}} does not exist")
        self.extend(n)
        return self._top[k << (self._depth - n)]

    def interval(self, n: int, k: int) -> tuple:
        if not 0 <= k < 1 << (n - 1):
            raise IndexOutOfRange(f"I_{{{n},{k}}} does not exist")
        return self.point(n, k), self.point(n, k + 1)

    def width(self, n: int, k: int):
        a, b = self.interval(n, k)
        return b - a

    def widths(self, n: int) -> list:
        lv = self.level(n)
        return [b - a for a, b in zip(lv, lv[1:])]

    def interval_index(self, n: int, x) -> IntervalIndex:
        """Locate ``x`` at level ``n``.

        Returns ``(k, True)`` when ``x == mu_{n,k}`` and ``(k, False)`` when
        ``mu_{n,k} < x < mu_{n,k+1}``.
        """
        x = rational(x)
        if not 0 <= x <= 1:
            raise InputError("x must lie in [0, 1]")
        self.extend(n)
        top, shift = self._top, self._depth - n
        lo, hi = 0, 1 << (n - 1)
        # invariant: mu_{n,lo} <= x <= mu_{n,hi}
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if top[mid << shift] <= x:
                lo = mid
            else:
                hi = mid
        if x == top[hi << shift]:
            return IntervalIndex(hi, True)
        return IntervalIndex(lo, x == top[lo << shift])


_GRIDS: "weakref.WeakKeyDictionary[CarcassMap, PreimageGrid]" = weakref.WeakKeyDictionary()
_GRIDS_LOCK = threading.Lock()


def build_grid(g: CarcassMap, N: int, cap: int = DEFAULT_CAP) -> PreimageGrid:
    """Return the (shared, memoized) grid of ``g`` with at least ``N`` levels."""
    if g.firmness is None:
        raise NotFirm("pre-image grids need a firmness certificate")
    if N < 1:
        raise IndexOutOfRange("N must be positive")
    with _GRIDS_LOCK:
        grid = _GRIDS.get(g)
        if grid is None or grid.cap < cap:
            grid = PreimageGrid(g, cap)
            _GRIDS[g] = grid
    return grid.extend(N)


def grid_point(g: CarcassMap, n: int, k: int):
    """``mu_{n,k}`` computed without a grid, by walking the pre-image branches."""
    if n < 1 or not 0 <= k <= 1 << (n - 1):
        raise IndexOutOfRange(f"mu_{{{n},{k}}} does not exist")
    branches = []
    while n > 1:
        half = 1 << (n - 2)
        if k <= half:
            branches.append(0)
        else:
            branches.append(1)
            k = 2 * half - k
        n -= 1
    y = rational(k)
    for side in reversed(branches):
        y = g.preimages(y)[side]
    return y


def delta(grid: PreimageGrid, n: int, k: int):
    """Relative position of ``mu_{n+1,2k+1}`` inside ``I_{n,k}``."""
    if n < 1 or not 0 <= k < 1 << (n - 1):
        raise IndexOutOfRange(f"delta_{{{n},{k}}} does not exist")
    a, b = grid.interval(n, k)
    return (grid.point(n + 1, 2 * k + 1) - a) / (b - a)


def deltas(grid: PreimageGrid, n: int) -> list:
    lv, nxt = grid.level(n), grid.level(n + 1)
    return [(nxt[2 * k + 1] - a) / (b - a) for k, (a, b) in enumerate(zip(lv, lv[1:]))]


@dataclass(frozen=True)
class DeltaProfile:
    """The level-(n0-1) subdivision ratios and their extreme values."""

    n0: int
    values: tuple
    v_minus: object
    v_plus: object


def delta_profile(grid: PreimageGrid) -> DeltaProfile:
    n0 = grid.n0
    values = tuple(deltas(grid, n0 - 1))
    both = [t for v in values for t in (v, 1 - v)]
    return DeltaProfile(n0, values, min(both), max(both))


def delta_image_index(n: int, k: int) -> tuple:
    """``(k*, flip)`` with ``g(I_{n+1,k}) = I_{n,k*}``.

    ``flip`` is 1 when ``I_{n+1,k}`` lies on the decreasing branch, where
    ``g`` reverses orientation.
    """
    half = 1 << (n - 1)
    if not 0 <= k < 2 * half:
        raise IndexOutOfRange(f"I_{{{n + 1},{k}}} does not exist")
    if k < half:
        return k, 0
    return 2 * half - 1 - k, 1


def width_product(grid: PreimageGrid, bits, n0: int | None = None):
    """Width of ``I_{n+1,k_n}`` from the level-n0 ratios alone.

    ``bits = (x_0, ..., x_n)`` with ``n >= n0 - 1``.  The width of the
    level-n0 ancestor is multiplied by one factor per deeper level,

        prod_{i=n0}^{n} Rot^(x_i + x_{i-n0}) (delta_{n0, p_{i-1}}),

    where ``p_{i-1}`` is the orientation-corrected window index of the
    ``n0 - 1`` bits before ``x_i``.
    """
    if n0 is None:
        n0 = grid.n0
    bits = tuple(bits)
    n = len(bits) - 1
    if n < n0 - 1 or bits[:1] != (0,):
        raise BitsTooShort(f"need x_0 = 0 and at least {n0 - 1} more bits, got {bits}")
    w = grid.width(n0, bits_to_index(bits[:n0]))
    dn0 = deltas(grid, n0)
    for i in range(n0, n + 1):
        w *= rot(dn0[p_index(bits, i - 1, n0)], bits[i] + bits[i - n0])
    return w


@dataclass(frozen=True)
class WidthBoundsReport:
    n: int
    max_width: object
    bound: object
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations and self.max_width <= self.bound


def width_bounds_check(grid: PreimageGrid, n: int) -> WidthBoundsReport:
    """Check ``#I_{n0-1,p} v_-^e <= #I_{n,k} <= #I_{n0-1,p} v_+^e``, ``e = n-n0+1``.

    ``bound`` is the uniform upper estimate ``d v_+^e`` with ``d`` the largest
    level-(n0-1) width.  Violations are returned as ``(k, width)`` pairs.
    """
    n0 = grid.n0
    if n < n0:
        raise IndexOutOfRange(f"bounds apply from level n0 = {n0}")
    prof = delta_profile(grid)
    e = n - n0 + 1
    lo_f, hi_f = prof.v_minus ** e, prof.v_plus ** e
    parents = grid.widths(n0 - 1)
    ws = grid.widths(n)
    bad = []
    for k, w in enumerate(ws):
        d = parents[k >> e]
        if not d * lo_f <= w <= d * hi_f:
            bad.append((k, w))
    return WidthBoundsReport(n, max(ws), max(parents) * hi_f, tuple(bad))


def skew_tent_next_level(level, v) -> tuple:
    """Level ``n + 1`` of a skew tent map from level ``n`` by direct subdivision.

    Even-indexed intervals are split at relative position ``v`` and
    odd-indexed ones at ``1 - v``.
    """
    v = rational(v)
    out = [level[0]]
    for j, (a, b) in enumerate(zip(level, level[1:])):
        out.append(a + rot(v, j) * (b - a))
        out.append(b)
    return tuple(out)


def level_rows(grid: PreimageGrid, n: int):
    """CSV rows ``k, numerator, denominator, width_numerator, width_denominator``."""
    lv = grid.level(n)
    for k, mu in enumerate(lv):
        row = [k, int(mu.numerator), int(mu.denominator)]
        if k + 1 < len(lv):
            w = lv[k + 1] - mu
            row += [int(w.numerator), int(w.denominator)]
        else:
            row += ["", ""]
        yield row
