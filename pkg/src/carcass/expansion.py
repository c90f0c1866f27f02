"""Generalized binary expansions relative to a map's pre-image hierarchy.

Bit ``x_i`` (``i >= 1``) records which child interval contains the point at
level ``i + 1``; ``x_0 = 0`` is always prepended.  For the tent map these are
the ordinary binary digits.

Two routes produce the same bits: :func:`encode` locates the point in an
explicit grid, while :func:`expand` reads the itinerary of the point under the
map and never touches a grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering

from .errors import BitsExhausted, InputError, OutOfDomain, WindowOutOfRange
from .maps import CarcassMap, evaluate, format_rational, rational


@total_ordering
@dataclass(frozen=True)
class GExpansion:
    """Bits ``(x_0, x_1, ..., x_n)`` plus a finiteness flag.

    ``finite`` means the point is the left end of the level-(n+1) interval
    selected by the bits, so every later bit is 0.  Otherwise the bits are a
    truncation of an infinite expansion.  Ordering is lexicographic with the
    implicit zero tail of finite expansions.
    """

    bits: tuple
    finite: bool
    source: CarcassMap | None = None

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits or bits[0] != 0:
            raise InputError("an expansion starts with x_0 = 0")
        if any(b not in (0, 1) for b in bits):
            raise InputError("bits must be 0 or 1")
        if self.finite:
            while len(bits) > 1 and bits[-1] == 0:
                bits = bits[:-1]
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return len(self.bits)

    @property
    def depth(self) -> int:
        return len(self.bits) - 1

    def bit(self, i: int) -> int:
        if i < len(self.bits):
            return self.bits[i]
        if self.finite:
            return 0
        raise BitsExhausted(f"bit {i} lies beyond the truncation depth {self.depth}")

    def prefix(self, n: int) -> tuple:
        """``(x_0, ..., x_n)``, padding finite expansions with zeros."""
        return tuple(self.bit(i) for i in range(n + 1))

    def k(self, n: int) -> int:
        return bits_to_index(self.prefix(n))

    def __eq__(self, other):
        if not isinstance(other, GExpansion):
            return NotImplemented
        return self.bits == other.bits and self.finite == other.finite

    def __hash__(self):
        return hash((self.bits, self.finite))

    def __lt__(self, other):
        return lex_compare(self, other) < 0

    def __str__(self):
        return format_expansion(self)


def bits_to_index(bits) -> int:
    """``k_n = sum x_i 2^(n-i)`` for ``bits = (x_0, ..., x_n)``."""
    k = 0
    for b in bits[1:]:
        k = 2 * k + b
    return k


def index_to_bits(k: int, n: int) -> tuple:
    """The inverse of :func:`bits_to_index`: ``(0, x_1, ..., x_n)``."""
    if not 0 <= k < 1 << n:
        raise InputError(f"index {k} does not fit in {n} bits")
    return (0,) + tuple((k >> (n - i)) & 1 for i in range(1, n + 1))


def expand(g: CarcassMap, x, n: int) -> GExpansion:
    """Expansion of ``x`` to depth ``n`` from its itinerary under ``g``.

    Bit ``x_{i+1}`` equals ``x_i`` when ``g^i(x)`` lies left of the peak and
    its flip when right of it.  Hitting the peak exactly ends a finite
    expansion with a 1.
    """
    x = rational(x)
    if not 0 <= x <= 1:
        raise OutOfDomain(f"{format_rational(x)} is outside [0, 1]")
    if x == 0:
        return GExpansion((0,), True, g)
    if x == 1:
        return GExpansion((0,) + (1,) * n, False, g)
    peak = g.peak
    bits = [0]
    y = x
    for _ in range(n):
        if y == peak:
            bits.append(1)
            return GExpansion(tuple(bits), True, g)
        bits.append(bits[-1] ^ (y > peak))
        y = evaluate(g, y)
    # all n bits consumed; finite only if the remaining bits are all 0
    return GExpansion(tuple(bits), False, g)


def encode(grid, x, n: int) -> GExpansion:
    """Expansion of ``x`` to depth ``n`` by locating it in the level-(n+1) grid."""
    x = rational(x)
    if not 0 <= x <= 1:
        raise OutOfDomain(f"{format_rational(x)} is outside [0, 1]")
    if x == 1:
        return GExpansion((0,) + (1,) * n, False, grid.map)
    k, exact = grid.interval_index(n + 1, x)
    return GExpansion(index_to_bits(k, n), exact, grid.map)


def decode(grid, e: GExpansion, n: int) -> tuple:
    """The closed level-(n+1) interval selected by the first ``n`` bits.

    A finite expansion whose bits fit within ``n`` decodes to the degenerate
    interval at its point.
    """
    if e.finite and e.depth <= n:
        p = grid.point(e.depth + 1, bits_to_index(e.bits))
        return p, p
    if e.depth < n and not e.finite:
        raise BitsExhausted(f"expansion has {e.depth} bits, {n} requested")
    k = bits_to_index(e.prefix(n))
    return grid.point(n + 1, k), grid.point(n + 1, k + 1)


def shift(e: GExpansion) -> GExpansion:
    """Expansion of ``g(x)``: drop ``x_1`` and flip the rest when ``x_1 = 1``."""
    if len(e.bits) < 2:
        if e.finite:
            return e
        raise BitsExhausted("shift needs at least one bit after x_0")
    rest = e.bits[2:]
    if not e.bits[1]:
        return GExpansion((0,) + rest, e.finite, e.source)
    rest = tuple(1 - b for b in rest)
    if not e.finite:
        return GExpansion((0,) + rest, False, e.source)
    # the flipped zero tail became 0.r111..., the right end of the interval
    # selected by r; rewrite it as the left end of the next interval
    k = bits_to_index((0,) + rest) + 1
    if k == 1 << len(rest):
        return GExpansion((0,) + (1,) * len(rest), False, e.source)
    return GExpansion(index_to_bits(k, len(rest)), True, e.source)


def lex_compare(a: GExpansion, b: GExpansion) -> int:
    """-1, 0 or 1 according to the lexicographic order of the bit sequences.

    Finite expansions continue with zeros.  Comparing two truncated
    expansions that agree on their common prefix returns 0.
    """
    n = max(a.depth, b.depth)
    for i in range(1, n + 1):
        try:
            x, y = a.bit(i), b.bit(i)
        except BitsExhausted:
            return 0
        if x != y:
            return -1 if x < y else 1
    return 0


def alpha_parity(bits, m: int | None = None) -> int:
    """``sum_{i=1}^m |x_i - x_{i-1}| mod 2`` (``m`` defaults to the last index)."""
    if m is None:
        m = len(bits) - 1
    if not 0 <= m < len(bits):
        raise WindowOutOfRange(f"prefix length {m} out of range for {len(bits)} bits")
    return sum(bits[i] ^ bits[i - 1] for i in range(1, m + 1)) & 1


def p_index(bits, i: int, n0: int) -> int:
    """Window index ``p_i = sum_{j=i-n0+2}^{i} (x_j xor x_{i+1-n0}) 2^(i-j)``.

    It reads the ``n0 - 1`` bits ending at ``x_i``, flipped when the bit just
    before the window is 1.
    """
    lo = i + 1 - n0
    if n0 < 2 or lo < 0 or i >= len(bits):
        raise WindowOutOfRange(f"window for p_{i} with n0 = {n0} needs bits 0..{i}")
    flip = bits[lo]
    p = 0
    for j in range(lo + 1, i + 1):
        p = 2 * p + (bits[j] ^ flip)
    return p


def format_expansion(e: GExpansion) -> str:
    body = "".join(str(b) for b in e.bits[1:]) or "0"
    return f"0.{body}" if e.finite else f"0.{body}..."


def parse_expansion(text: str, source: CarcassMap | None = None) -> GExpansion:
    """Inverse of :func:`format_expansion`; a trailing ``...`` marks truncation."""
    s = text.strip()
    finite = not s.endswith("...")
    if not finite:
        s = s[:-3]
    if not s.startswith("0.") or any(c not in "01" for c in s[2:]):
        raise InputError(f"cannot parse expansion {text!r}")
    digits = s[2:]
    bits = (0,) + tuple(int(c) for c in digits)
    if finite and digits == "0":
        bits = (0,)
    return GExpansion(bits, finite, source)


__all__ = [
    "GExpansion",
    "alpha_parity",
    "bits_to_index",
    "decode",
    "encode",
    "expand",
    "format_expansion",
    "index_to_bits",
    "lex_compare",
    "p_index",
    "parse_expansion",
    "shift",
]
