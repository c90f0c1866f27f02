import itertools
import random
from fractions import Fraction

import pytest
from gmpy2 import mpq

from carcass import build_grid, decode, delta_profile, encode, expand, lex_compare, shift, skew_tent, tent
from carcass.errors import BitsExhausted, WindowOutOfRange
from carcass.expansion import (
    GExpansion,
    alpha_parity,
    format_expansion,
    index_to_bits,
    p_index,
    parse_expansion,
)

from oracles import locate, tent_binary_bits

Q = mpq


def E(*bits, finite=True):
    return GExpansion(tuple(bits), finite)


def test_encode_examples():
    t = build_grid(tent(), 8)
    e = encode(t, Q(3, 8), 5)
    assert e.bits == (0, 0, 1, 1) and e.finite
    one = encode(t, 1, 6)
    assert one.bits == (0,) + (1,) * 6 and not one.finite
    s = build_grid(skew_tent(Q(1, 3)), 4)
    e = encode(s, Q(1, 2), 2)
    assert e.bits == (0, 1, 0) and not e.finite
    assert e.k(2) == 2


def test_expand_agrees_with_encode(grids):
    rng = random.Random(3)
    for name, grid in grids.items():
        for _ in range(150):
            x = Q(rng.randint(0, 4096), 4096) if rng.random() < 0.5 else Q(rng.randint(0, 999), 999)
            n = rng.randint(1, 12)
            assert expand(grid.map, x, n) == encode(grid, x, n), (name, x, n)
        for n in range(1, 7):
            for mu in grid.level(n):
                assert expand(grid.map, mu, 12) == encode(grid, mu, 12)


def test_tent_expansion_is_binary():
    t = build_grid(tent(), 14)
    for k in range(4096):
        x = Fraction(k, 4096)
        e = encode(t, Q(k, 4096), 12)
        assert e.finite
        assert list(e.prefix(12)[1:]) == tent_binary_bits(x, 12)
    rng = random.Random(11)
    for _ in range(500):
        x = Fraction(rng.randint(0, 10**9 - 1), 10**9)
        e = encode(t, Q(x.numerator, x.denominator), 12)
        assert list(e.prefix(12)[1:]) == tent_binary_bits(x, 12)


def test_grid_point_has_binary_index_expansion(grids):
    for grid in grids.values():
        for n in range(1, 8):
            for k, mu in enumerate(grid.level(n + 1)[:-1]):
                e = encode(grid, mu, 10)
                assert e.finite
                assert e.prefix(n) == index_to_bits(k, n)


def test_encode_matches_brute_force_location(grids):
    rng = random.Random(5)
    for grid in grids.values():
        pts = grid.level(9)
        for _ in range(100):
            x = Q(rng.randint(0, 10**6 - 1), 10**6)
            assert encode(grid, x, 8).k(8) == locate(pts, x)


def test_decode_examples():
    t = build_grid(tent(), 6)
    assert decode(t, E(0, 1, finite=False), 1) == (Q(1, 2), 1)
    assert decode(t, E(0, 1, 0, finite=False), 2) == (Q(1, 2), Q(3, 4))
    s = build_grid(skew_tent(Q(1, 3)), 6)
    mu = s.point(4, 3)
    e = encode(s, mu, 5)
    assert decode(s, e, 5) == (mu, mu)
    with pytest.raises(BitsExhausted):
        decode(t, E(0, 1, finite=False), 4)


def test_decode_encode_roundtrip(grids):
    rng = random.Random(13)
    for grid in grids.values():
        p = delta_profile(grid)
        d = max(grid.widths(grid.n0 - 1))
        for _ in range(500):
            x = Q(rng.randint(1, 10**6 - 1), 10**6)
            n = rng.randint(grid.n0, 12)
            lo, hi = decode(grid, encode(grid, x, n), n)
            assert lo <= x <= hi
            # the level-(n+1) interval obeys the geometric bound with exponent n - n0 + 2
            assert hi - lo <= d * p.v_plus ** (n - grid.n0 + 2)


def test_shift_examples():
    assert shift(E(0, 0, 1, 1)).bits == (0, 1, 1)
    assert shift(E(0, 1, 0, 1, finite=False)).bits == (0, 1, 0)
    with pytest.raises(BitsExhausted):
        shift(E(0, finite=False))


def test_shift_commutes_with_map(grids):
    rng = random.Random(17)
    for name in ("skew1/3", "skew7/10", "genB"):
        grid = grids[name]
        g = grid.map
        for _ in range(200):
            x = Q(rng.randint(0, 10**5), 10**5)
            n = rng.randint(2, 12)
            assert shift(encode(grid, x, n)) == encode(grid, g(x), n - 1), (name, x, n)


def test_lex_compare_examples():
    assert lex_compare(E(0, 0, 1), E(0, 1)) == -1
    assert lex_compare(E(0, 1), E(0, 1, 1)) == -1
    assert lex_compare(E(0, 1, 1), E(0, 1, 1)) == 0
    assert E(0, 0, 1) < E(0, 1)


def test_lex_order_matches_numeric_order(grids):
    rng = random.Random(19)
    for grid in grids.values():
        for _ in range(500):
            x, y = (Q(rng.randint(0, 10**4), 10**4) for _ in range(2))
            ex, ey = encode(grid, x, 12), encode(grid, y, 12)
            c = lex_compare(ex, ey)
            if c:
                lo_x, hi_x = decode(grid, ex, 12)
                lo_y, hi_y = decode(grid, ey, 12)
                assert (c < 0) == ((lo_x + hi_x) < (lo_y + hi_y))
                assert (c < 0) == (x < y)
            else:
                k = ex.k(12)
                assert grid.point(13, k) <= min(x, y) and max(x, y) <= grid.point(13, k + 1)


def test_alpha_parity_examples():
    assert alpha_parity((0, 1, 0, 1), 3) == 1
    assert alpha_parity((0, 1, 0, 1), 2) == 0
    with pytest.raises(WindowOutOfRange):
        alpha_parity((0, 1), 3)


def test_alpha_parity_equals_last_bit_exhaustive():
    for m in range(1, 13):
        for tail in itertools.product((0, 1), repeat=m):
            bits = (0,) + tail
            assert alpha_parity(bits) == bits[-1]


def test_p_index():
    bits = (0, 1, 1, 0, 1)
    for i in range(1, 5):
        assert p_index(bits, i, 2) == bits[i] ^ bits[i - 1]
    assert p_index((0, 1, 0, 1), 3, 3) == 0b10
    assert p_index((0, 0, 0, 1), 3, 3) == 0b01
    with pytest.raises(WindowOutOfRange):
        p_index(bits, 1, 3)


def test_text_form_roundtrip():
    for e in [E(0, 0, 1, 1), E(0, 1, 0, finite=False), E(0), E(0, 1, 1, 1, finite=False)]:
        assert parse_expansion(format_expansion(e)) == e
    assert format_expansion(E(0, 0, 1, 1)) == "0.011"
    assert format_expansion(E(0)) == "0.0"
