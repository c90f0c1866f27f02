"""Piecewise-linear unimodal ("carcass") maps on [0, 1] with exact rational data.

A carcass map is stored as its breakpoints.  It rises from (0, 0) to a single
peak (v, 1) and falls back to (1, 0), linearly between breakpoints.  All
coordinates are ``gmpy2.mpq`` rationals, which are always in lowest terms.
"""

from __future__ import annotations

import re
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import mpq, mpz

from .errors import (
    DuplicateAbscissa,
    InputError,
    NonDyadicKink,
    NotFirm,
    NotFirmWithinBound,
    NotHomeomorphism,
    NotUnimodal,
    OutOfDomain,
    OutOfRange,
)

Rational = type(mpq(0))

ZERO = mpq(0)
ONE = mpq(1)

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")

DEFAULT_FIRMNESS_BOUND = 32


def rational(value) -> Rational:
    """Convert ``value`` to an exact rational.

    Accepts integers, ``Fraction``/``mpq`` instances, ``(p, q)`` pairs and
    strings of the form ``"p/q"`` or ``"p"``.  Floats are rejected: map data
    is exact by design.
    """
    if isinstance(value, Rational):
        return value
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, (int, type(mpz(0)))):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, tuple) and len(value) == 2:
        p, q = value
        if int(q) <= 0:
            raise InputError(f"denominator must be positive: {value!r}")
        return mpq(int(p), int(q))
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if not m:
            raise InputError(f"cannot parse rational {value!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den == 0:
            raise InputError(f"zero denominator in {value!r}")
        return mpq(num, den)
    raise InputError(f"not an exact rational: {value!r}")


def format_rational(q) -> str:
    q = rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def is_dyadic(q) -> bool:
    d = int(rational(q).denominator)
    return d & (d - 1) == 0


@dataclass(frozen=True)
class Firmness:
    """Certificate that every interior kink reaches 0 under iteration.

    ``kink_orbits`` pairs each interior kink with the minimal number of
    iterations sending it to 0; ``n0`` is the largest of those counts.
    """

    n0: int
    kink_orbits: tuple


@dataclass(frozen=True)
class CarcassMap:
    """A validated carcass map.  Build instances with :func:`make_carcass`.

    Equality and hashing look only at the breakpoints; the firmness
    certificate is metadata.
    """

    xs: tuple
    ys: tuple
    firmness: Firmness | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        xs, ys = self.xs, self.ys
        if len(xs) != len(ys) or len(xs) < 3:
            raise NotUnimodal("a carcass map needs at least three breakpoints")
        for a, b in zip(xs, xs[1:]):
            if a == b:
                raise DuplicateAbscissa(f"repeated abscissa {format_rational(a)}")
            if b < a:
                raise NotUnimodal("abscissas must increase")
        if xs[0] != 0 or ys[0] != 0 or xs[-1] != 1 or ys[-1] != 0:
            raise NotUnimodal("the graph must start at (0,0) and end at (1,0)")
        peaks = [i for i, y in enumerate(ys) if y == 1]
        if len(peaks) != 1:
            raise NotUnimodal("exactly one breakpoint must have y = 1")
        p = peaks[0]
        if any(not 0 <= y <= 1 for y in ys):
            raise NotUnimodal("values must lie in [0, 1]")
        if any(a >= b for a, b in zip(ys[: p], ys[1 : p + 1])):
            raise NotUnimodal("values must strictly increase up to the peak")
        if any(a <= b for a, b in zip(ys[p:], ys[p + 1 :])):
            raise NotUnimodal("values must strictly decrease after the peak")
        object.__setattr__(self, "peak_index", p)
        slopes = tuple(
            (y1 - y0) / (x1 - x0) for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:])
        )
        object.__setattr__(self, "slopes", slopes)

    # -- shape ------------------------------------------------------------

    @property
    def breakpoints(self):
        return tuple(zip(self.xs, self.ys))

    @property
    def peak(self) -> Rational:
        return self.xs[self.peak_index]

    @property
    def kinks(self) -> tuple:
        """Interior breakpoints where the slope actually changes."""
        return tuple(
            self.xs[i]
            for i in range(1, len(self.xs) - 1)
            if self.slopes[i - 1] != self.slopes[i]
        )

    @property
    def n0(self) -> int:
        if self.firmness is None:
            raise NotFirm("map carries no firmness certificate")
        return self.firmness.n0

    # -- evaluation -------------------------------------------------------

    def __call__(self, x) -> Rational:
        return evaluate(self, x)

    def preimages(self, y):
        """The pre-images of ``y`` on the increasing and decreasing branch."""
        y = rational(y)
        if not 0 <= y <= 1:
            raise OutOfDomain(f"{format_rational(y)} is outside [0, 1]")
        return _left_inverse(self, y), _right_inverse(self, y)

    def with_firmness(self, firmness: Firmness) -> "CarcassMap":
        return replace(self, firmness=firmness)


def make_carcass(breakpoints: Iterable) -> CarcassMap:
    """Validate ``breakpoints`` and return an uncertified :class:`CarcassMap`.

    Interior points lying on the segment through their neighbours are
    dropped, so the stored breakpoints are exactly the endpoints, the peak
    and the kinks.
    """
    pts = [(rational(x), rational(y)) for x, y in breakpoints]
    if len(pts) < 3:
        raise NotUnimodal("a carcass map needs at least three breakpoints")
    xs = [p[0] for p in pts]
    for a, b in zip(xs, xs[1:]):
        if a == b:
            raise DuplicateAbscissa(f"repeated abscissa {format_rational(a)}")
    pts = _drop_collinear(pts)
    return CarcassMap(tuple(p[0] for p in pts), tuple(p[1] for p in pts))


def _drop_collinear(pts):
    out = [pts[0]]
    for i in range(1, len(pts) - 1):
        (x0, y0), (x1, y1), (x2, y2) = out[-1], pts[i], pts[i + 1]
        if (y1 - y0) * (x2 - x1) == (y2 - y1) * (x1 - x0):
            continue
        out.append(pts[i])
    out.append(pts[-1])
    return out


def tent() -> CarcassMap:
    return skew_tent(mpq(1, 2))


def skew_tent(v) -> CarcassMap:
    """The two-segment map rising to (v, 1); certified firm with n0 = 2."""
    v = rational(v)
    if not 0 < v < 1:
        raise OutOfRange(f"skew tent parameter must lie in (0, 1), got {format_rational(v)}")
    g = CarcassMap((ZERO, v, ONE), (ZERO, ONE, ZERO))
    return g.with_firmness(Firmness(2, ((v, 2),)))


def evaluate(g: CarcassMap, x) -> Rational:
    x = rational(x)
    if not 0 <= x <= 1:
        raise OutOfDomain(f"{format_rational(x)} is outside [0, 1]")
    xs = g.xs
    i = bisect_right(xs, x) - 1
    if xs[i] == x:
        return g.ys[i]
    return g.ys[i] + g.slopes[i] * (x - xs[i])


def iterate(g: CarcassMap, x, n: int) -> Rational:
    x = rational(x)
    if not 0 <= x <= 1:
        raise OutOfDomain(f"{format_rational(x)} is outside [0, 1]")
    for _ in range(n):
        x = evaluate(g, x)
    return x


def _left_inverse(g, y):
    p = g.peak_index
    ys = g.ys
    i = bisect_left(ys, y, 0, p + 1)
    if ys[i] == y:
        return g.xs[i]
    i -= 1
    return g.xs[i] + (y - ys[i]) / g.slopes[i]


def _right_inverse(g, y):
    p = g.peak_index
    ys = g.ys
    # ys[p:] is strictly decreasing; search on the negated values
    lo, hi = p, len(ys) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if ys[mid] > y:
            lo = mid + 1
        else:
            hi = mid
    if ys[lo] == y:
        return g.xs[lo]
    i = lo - 1
    return g.xs[i] + (y - ys[i]) / g.slopes[i]


def branch_inverses(g: CarcassMap):
    """Per-segment affine inverses ``(y_lo, y_hi, a, b)`` with x = a*y + b.

    Returned as two lists: the increasing branch ordered by rising y, and the
    decreasing branch ordered by rising y as well.
    """
    p = g.peak_index
    inc, dec = [], []
    for i in range(len(g.xs) - 1):
        s = g.slopes[i]
        a = 1 / s
        b = g.xs[i] - g.ys[i] * a
        y0, y1 = g.ys[i], g.ys[i + 1]
        if i < p:
            inc.append((y0, y1, a, b))
        else:
            dec.append((y1, y0, a, b))
    dec.reverse()
    return inc, dec


def check_firmness(g: CarcassMap, max_iter: int = DEFAULT_FIRMNESS_BOUND) -> Firmness:
    """Certify firmness by exact iteration of every interior kink.

    Raises :class:`NotFirmWithinBound` if some kink fails to reach 0 within
    ``max_iter`` steps; that does not prove the map is not firm.
    """
    orbits = []
    for kink in g.kinks:
        y = kink
        for m in range(1, max_iter + 1):
            y = evaluate(g, y)
            if y == 0:
                orbits.append((kink, m))
                break
        else:
            raise NotFirmWithinBound(kink, max_iter)
    return Firmness(max(m for _, m in orbits), tuple(orbits))


def certify(g: CarcassMap, max_iter: int = DEFAULT_FIRMNESS_BOUND) -> CarcassMap:
    if g.firmness is not None:
        return g
    return g.with_firmness(check_firmness(g, max_iter))


def _validate_homeomorphism(vertices):
    pts = [(rational(x), rational(y)) for x, y in vertices]
    if len(pts) < 2 or pts[0] != (0, 0) or pts[-1] != (1, 1):
        raise NotHomeomorphism("polyline must run from (0,0) to (1,1)")
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if not (x0 < x1 and y0 < y1):
            raise NotHomeomorphism("polyline must be strictly increasing")
    return pts


def _pl_eval(xs, ys, x):
    i = bisect_right(xs, x) - 1
    if xs[i] == x:
        return ys[i]
    return ys[i] + (ys[i + 1] - ys[i]) * (x - xs[i]) / (xs[i + 1] - xs[i])


def conjugate_by(g: CarcassMap, phi_vertices: Sequence,
                 max_iter: int = DEFAULT_FIRMNESS_BOUND) -> CarcassMap:
    """Return phi o g o phi^-1 for an increasing piecewise-linear homeomorphism phi.

    The result is certified only when ``check_firmness`` succeeds within
    ``max_iter``; otherwise it is returned without a certificate.
    """
    pts = _validate_homeomorphism(phi_vertices)
    pxs = tuple(p[0] for p in pts)
    pys = tuple(p[1] for p in pts)
    # abscissas t where g or phi or phi^-1 may bend, before mapping through phi
    ts = set(g.xs) | set(pxs)
    for c in pxs:
        ts.update(g.preimages(c))
    verts = sorted((_pl_eval(pxs, pys, t), _pl_eval(pxs, pys, evaluate(g, t))) for t in ts)
    out = make_carcass(verts)
    try:
        return out.with_firmness(check_firmness(out, max_iter))
    except NotFirmWithinBound:
        return out


def generate_firm_from_homeomorphism(phi_vertices: Sequence) -> CarcassMap:
    """Push the tent map forward through phi; phi's kinks must be dyadic."""
    pts = _validate_homeomorphism(phi_vertices)
    for x, _ in pts[1:-1]:
        if not is_dyadic(x):
            raise NonDyadicKink(f"kink abscissa {format_rational(x)} is not dyadic")
    # a kink at a/2^m reaches 0 after at most m + 2 steps of the pushed-forward map
    depth = max(int(x.denominator).bit_length() for x, _ in pts)
    g = conjugate_by(tent(), pts, max_iter=max(DEFAULT_FIRMNESS_BOUND, depth + 2))
    return certify(g)


def parse_map_text(text: str) -> list:
    """Parse "p/q r/s" breakpoint lines; '#' starts a comment line."""
    pts = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"line {lineno}: expected two rationals, got {raw!r}")
        pts.append((rational(parts[0]), rational(parts[1])))
    return pts


def format_map_text(points) -> str:
    return "".join(f"{format_rational(x)} {format_rational(y)}\n" for x, y in points)


def load_map(path, homeomorphism: bool = False) -> CarcassMap:
    with open(path) as fh:
        pts = parse_map_text(fh.read())
    if homeomorphism:
        return generate_firm_from_homeomorphism(pts)
    return make_carcass(pts)
