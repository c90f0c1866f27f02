import gmpy2
import pytest
from gmpy2 import mpfr, mpq

from carcass import (
    Polyline,
    binomial_length,
    build_grid,
    build_hn,
    length_sequence,
    polyline_length,
    skew_tent,
    tent,
)
from carcass.errors import InputError
from carcass.length import refinement_is_monotone

Q = mpq
TOL = mpfr(2) ** -120


def close(a, b, rel=TOL):
    with gmpy2.context(gmpy2.get_context(), precision=256):
        return abs(mpfr(a) - mpfr(b)) <= rel * abs(mpfr(b))


def reference(expr):
    with gmpy2.context(gmpy2.get_context(), precision=256):
        return expr()


def test_polyline_length_examples():
    sqrt2 = reference(lambda: gmpy2.sqrt(2))
    assert close(polyline_length(Polyline.identity()), sqrt2)
    t, s = build_grid(tent(), 3), build_grid(skew_tent(Q(1, 3)), 3)
    # h_2 = (0,0) (1/2,1/3) (1,1): sqrt(1/4+1/9) + sqrt(1/4+4/9) = (sqrt13 + 5)/6
    ref = reference(lambda: (5 + gmpy2.sqrt(13)) / 6)
    assert close(polyline_length(build_hn(t, s, 2)), ref)
    assert close(binomial_length(Q(1, 3), 1), ref)


def test_binomial_half_is_sqrt2():
    sqrt2 = reference(lambda: gmpy2.sqrt(2))
    for n in (0, 1, 7, 64, 100):
        assert close(binomial_length(Q(1, 2), n), sqrt2)


def test_binomial_matches_polyline():
    t = build_grid(tent(), 13)
    for v in (Q(1, 3), Q(2, 5), Q(7, 10)):
        s = build_grid(skew_tent(v), 13)
        for n in range(0, 12):
            assert close(binomial_length(v, n), polyline_length(build_hn(t, s, n + 1)))


def test_symmetry():
    for v in (Q(1, 3), Q(1, 7), Q(2, 5)):
        for n in (1, 5, 40):
            assert close(binomial_length(v, n), binomial_length(1 - v, n))


def test_binomial_rejects():
    with pytest.raises(InputError):
        binomial_length(Q(3, 2), 4)
    with pytest.raises(InputError):
        binomial_length(Q(1, 3), -1)


def test_precision_is_honoured():
    a = binomial_length(Q(1, 3), 30, precision=64)
    b = binomial_length(Q(1, 3), 30, precision=256)
    assert a.precision == 64 and b.precision == 256
    assert close(a, b, mpfr(2) ** -62)


def test_refinement_is_monotone_exact(grids):
    g1, g2 = grids["genB"], grids["skew7/10"]
    for n in range(1, 12):
        assert refinement_is_monotone(build_hn(g1, g2, n), build_hn(g1, g2, n + 1))
    coarse = Polyline([0, 1], [0, 1])
    assert not refinement_is_monotone(coarse, Polyline([0, 1], [0, Q(1, 2)]))


def test_sequence_for_a_skew_parameter():
    seq = length_sequence(Q(7, 10), 40)
    assert list(seq.levels) == list(range(2, 41))
    assert seq.strictly_increasing()
    assert all(seq.monotone) and all(seq.bounded)
    assert all(v < 2 for v in seq.values)
    rows = list(seq.rows())
    assert rows[0][0] == 2 and len(rows[0][1].replace(".", "")) <= 31


def test_sequence_both_modes_agree():
    seq = length_sequence(Q(2, 5), 12, mode="both")
    assert seq.formula_used == "both"
    assert all(abs(r) <= TOL * 2 for r in seq.residuals)


def test_sequence_for_a_general_pair(grids):
    seq = length_sequence((grids["genC"], grids["skew1/3"]), 12)
    assert seq.formula_used == "polyline"
    assert all(seq.monotone)
    assert all(1 < v < 2 for v in seq.values)
    # tent and genA are conjugated by a fixed polyline, so the lengths settle
    flat = length_sequence((grids["tent"], grids["genA"]), 12)
    assert flat.values[-1] == flat.values[-2]


def test_sequence_rejects():
    with pytest.raises(InputError):
        length_sequence(Q(1, 3), 1)
    with pytest.raises(InputError):
        length_sequence(Q(1, 3), 5, mode="bogus")
