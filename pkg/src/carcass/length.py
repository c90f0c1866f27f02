"""Length of the graph of ``h_n``, geometrically and by the binomial closed form.

Segment components are exact rationals; only the square roots are rounded,
using MPFR at the requested precision plus guard bits, and the terms are
added with a correctly rounded sum.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import comb

import gmpy2
from gmpy2 import mpfr, mpq

from .conjugacy import ConjugacyApprox, Polyline, build_hn
from .errors import DepthCapExceeded, InputError
from .grids import PreimageGrid, build_grid
from .maps import rational, skew_tent, tent

DEFAULT_PRECISION = 128
GUARD_BITS = 32
BINOMIAL_CAP = 2000


def _ctx(precision: int):
    return gmpy2.context(gmpy2.get_context(), precision=precision)


def _sum_sqrt(weighted, precision: int):
    """``sum w * sqrt(q)`` over ``(q, w)`` pairs of exact rationals and integers."""
    with _ctx(precision + GUARD_BITS):
        terms = [w * gmpy2.sqrt(mpfr(q)) for q, w in weighted]
        terms.sort(reverse=True)
        total = gmpy2.fsum(terms)
    with _ctx(precision):
        return +total


def _polyline_of(h) -> Polyline:
    return h.polyline if isinstance(h, ConjugacyApprox) else h


def polyline_length(h, precision: int = DEFAULT_PRECISION):
    """Sum of the segment lengths of ``h`` (a polyline or ``h_n``)."""
    poly = _polyline_of(h)
    xs, ys = poly.xs, poly.ys
    counts = Counter(
        (x1 - x0) ** 2 + (y1 - y0) ** 2 for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:])
    )
    return _sum_sqrt(counts.items(), precision)


def binomial_length(v, n: int, precision: int = DEFAULT_PRECISION):
    """``2^-n sum_k C(n,k) sqrt(1 + (2^n v^k (1-v)^(n-k))^2)``.

    This is the length of ``h_{n+1}`` from the tent map to the skew tent map
    with peak ``v``: ``h_{n+1}`` has ``C(n,k)`` segments of width ``2^-n``
    and slope ``2^n v^k (1-v)^(n-k)``.  Powers follow ``0^0 = 1``.
    """
    v = rational(v)
    if not 0 <= v <= 1:
        raise InputError("v must lie in [0, 1]")
    if n < 0:
        raise InputError("n must be non-negative")
    if n > BINOMIAL_CAP:
        raise DepthCapExceeded(f"n = {n} exceeds the cap {BINOMIAL_CAP}")
    w = 1 - v
    scale = mpq(2) ** n
    weighted = []
    for k in range(n + 1):
        t = scale * v**k * w ** (n - k)
        weighted.append((1 + t * t, comb(n, k)))
    total = _sum_sqrt(weighted, precision + n)
    with _ctx(precision):
        return total / 2**n


def refinement_is_monotone(coarse, fine) -> bool:
    """Exact check that ``fine`` is no shorter than ``coarse``.

    Requires every vertex of ``coarse`` to be a vertex of ``fine``; then each
    coarse segment is compared with the fine path between its ends using
    ``sqrt(a) + sqrt(b) >= sqrt(c)`` in squared form for two-piece splits,
    and the triangle inequality in general.
    """
    coarse, fine = _polyline_of(coarse), _polyline_of(fine)
    pos = {x: i for i, x in enumerate(fine.xs)}
    for x0, x1, y0, y1 in zip(coarse.xs, coarse.xs[1:], coarse.ys, coarse.ys[1:]):
        i, j = pos.get(x0), pos.get(x1)
        if i is None or j is None or fine.ys[i] != y0 or fine.ys[j] != y1:
            return False
        if j - i == 2:
            a = (fine.xs[i + 1] - x0) ** 2 + (fine.ys[i + 1] - y0) ** 2
            b = (x1 - fine.xs[i + 1]) ** 2 + (y1 - fine.ys[i + 1]) ** 2
            c = (x1 - x0) ** 2 + (y1 - y0) ** 2
            d = c - a - b
            if d > 0 and 4 * a * b < d * d:
                return False
    return True


@dataclass(frozen=True)
class LengthSequence:
    """Lengths ``l_n`` for ``n = first, first+1, ...`` with sanity flags.

    ``monotone[i]`` compares ``values[i]`` with its predecessor (True for the
    first entry); ``bounded[i]`` states ``1 <= l_n <= 2``.  ``residuals`` holds
    binomial-minus-polyline differences when both were computed.
    """

    first: int
    values: tuple
    formula_used: str
    descriptor: str
    monotone: tuple
    bounded: tuple
    residuals: tuple = ()

    @property
    def levels(self):
        return range(self.first, self.first + len(self.values))

    def strictly_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.values, self.values[1:]))

    def rows(self):
        """CSV rows ``n, l_n, monotone_flag, bound_flag`` with 30 significant digits."""
        for n, l, m, b in zip(self.levels, self.values, self.monotone, self.bounded):
            yield [n, format(l, ".30g"), int(m), int(b)]


def _flags(values, exact_monotone=None):
    mono = [True]
    for i in range(1, len(values)):
        if exact_monotone is not None:
            mono.append(exact_monotone[i])
        else:
            mono.append(values[i] >= values[i - 1])
    bounded = [1 <= v <= 2 for v in values]
    return tuple(mono), tuple(bounded)


def length_sequence(source, N: int, precision: int = DEFAULT_PRECISION,
                    mode: str = "auto", first: int = 2) -> LengthSequence:
    """``l_n`` for ``first <= n <= N``.

    ``source`` is either a skew tent parameter ``v`` (lengths of ``h_n`` from
    the tent map to that skew tent map) or a pair of grids ``(g1grid, g2grid)``.
    ``mode`` picks ``binomial``, ``polyline`` or ``both``; ``auto`` means
    binomial for a parameter and polyline for a pair.
    """
    if N < first:
        raise InputError(f"N must be at least {first}")
    if isinstance(source, tuple) and len(source) == 2 and isinstance(source[0], PreimageGrid):
        if mode not in ("auto", "polyline"):
            raise InputError("a pair of general maps supports only polyline mode")
        g1grid, g2grid = source
        hs = [build_hn(g1grid, g2grid, n).polyline for n in range(first, N + 1)]
        values = tuple(polyline_length(h, precision) for h in hs)
        exact = [True] + [refinement_is_monotone(a, b) for a, b in zip(hs, hs[1:])]
        mono, bounded = _flags(values, exact)
        return LengthSequence(first, values, "polyline", "pair", mono, bounded)

    v = rational(source)
    if mode == "auto":
        mode = "binomial"
    if mode not in ("binomial", "polyline", "both"):
        raise InputError(f"unknown mode {mode!r}")
    desc = f"tent->skew({v.numerator}/{v.denominator})"
    if mode == "binomial":
        values = tuple(binomial_length(v, n - 1, precision) for n in range(first, N + 1))
        mono, bounded = _flags(values)
        return LengthSequence(first, values, "binomial", desc, mono, bounded)

    g1grid, g2grid = build_grid(tent(), N), build_grid(skew_tent(v), N)
    poly = length_sequence((g1grid, g2grid), N, precision, "polyline", first)
    if mode == "polyline":
        return LengthSequence(first, poly.values, "polyline", desc, poly.monotone, poly.bounded)
    binom = [binomial_length(v, n - 1, precision) for n in range(first, N + 1)]
    with _ctx(precision):
        residuals = tuple(b - p for b, p in zip(binom, poly.values))
    return LengthSequence(first, poly.values, "both", desc, poly.monotone, poly.bounded, residuals)
