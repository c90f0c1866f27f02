import random

import pytest
from gmpy2 import mpq

from carcass import (
    Polyline,
    build_grid,
    build_hn,
    eval_h,
    eval_hn,
    functional_iteration,
    skew_tent,
    tent,
    verify_semiconjugacy,
)
from carcass.errors import DepthCapExceeded, LevelMissing, OutOfRange

Q = mpq


@pytest.fixture(scope="module")
def tent_skew():
    return build_grid(tent(), 14), build_grid(skew_tent(Q(1, 3)), 14)


def test_identity_pair_gives_identity(grids):
    g = grids["genB"]
    for n in range(1, 10):
        h = build_hn(g, g, n)
        assert all(x == y for x, y in h.vertices)


def test_hn_examples(tent_skew):
    t, s = tent_skew
    assert build_hn(t, s, 2).vertices == [(0, 0), (Q(1, 2), Q(1, 3)), (1, 1)]
    h3 = build_hn(t, s, 3)
    assert [x for x, _ in h3.vertices] == [0, Q(1, 4), Q(1, 2), Q(3, 4), 1]
    assert [y for _, y in h3.vertices] == [0, Q(1, 9), Q(1, 3), Q(7, 9), 1]


def test_eval_hn(tent_skew, grids):
    t, s = tent_skew
    assert eval_hn(build_hn(t, s, 2), Q(1, 4)) == Q(1, 6)
    assert eval_hn(build_hn(t, s, 5), Q(3, 16)) == s.point(5, 3)
    g = grids["skew7/10"]
    assert eval_hn(build_hn(g, g, 6), Q(2, 7)) == Q(2, 7)


def test_level_missing():
    from carcass import PreimageGrid

    a = PreimageGrid(tent(), cap=4)
    with pytest.raises(LevelMissing):
        build_hn(a, a, 5)


def test_semiconjugacy_examples(tent_skew, grids):
    t, s = tent_skew
    for n in range(1, 11):
        assert verify_semiconjugacy(build_hn(t, s, n)).ok
    g = grids["genC"]
    assert verify_semiconjugacy(build_hn(g, g, 8)).violations == ()


def test_semiconjugacy_detects_a_broken_polyline(tent_skew):
    t, s = tent_skew
    h = build_hn(t, s, 4)
    ys = list(h.polyline.ys)
    ys[3] = (ys[2] + ys[3]) / 2
    object.__setattr__(h, "polyline", Polyline(h.polyline.xs, ys))
    assert not verify_semiconjugacy(h).ok


def test_eval_h_examples(tent_skew):
    t, s = tent_skew
    assert eval_h(t, s, Q(1, 2), Q(1, 100)) == (Q(1, 3), Q(1, 3))
    lo, hi = eval_h(t, s, Q(1, 3), Q(1, 10**4))
    assert hi - lo < Q(1, 10**4)
    # oracle: h_n at the grid neighbours of x brackets every deeper value
    for n in range(2, 13):
        k, _ = t.interval_index(n, Q(1, 3))
        assert s.point(n, k) <= lo and hi <= s.point(n, k + 1)


def test_eval_h_identity_contains_x(grids):
    g = grids["genA"]
    rng = random.Random(1)
    for _ in range(30):
        x = Q(rng.randint(1, 999), 1000)
        lo, hi = eval_h(g, g, x, Q(1, 10**6))
        assert lo <= x <= hi


def test_eval_h_depth_cap(tent_skew):
    t, s = tent_skew
    with pytest.raises(DepthCapExceeded):
        eval_h(t, s, Q(1, 3), Q(1, 10**30), max_depth=20)


def test_functional_iteration():
    assert functional_iteration(Q(1, 2), Q(1, 3), 0) == Polyline.identity()
    assert functional_iteration(Q(1, 2), Q(1, 3), 1).vertices == [(0, 0), (Q(1, 2), Q(1, 3)), (1, 1)]
    for c1, c2 in [(Q(1, 2), Q(1, 3)), (Q(2, 5), Q(7, 10)), (Q(2, 3), Q(1, 4))]:
        a, b = build_grid(skew_tent(c1), 10), build_grid(skew_tent(c2), 10)
        for n in range(9):
            assert functional_iteration(c1, c2, n) == build_hn(a, b, n + 1).polyline
    with pytest.raises(OutOfRange):
        functional_iteration(0, Q(1, 2), 1)


def test_vertex_correspondence_and_monotonicity(grids):
    names = list(grids)
    for a in names:
        for b in names:
            for n in (1, 5, 12):
                h = build_hn(grids[a], grids[b], n)
                assert h.polyline.is_increasing()
                assert h(0) == 0 and h(1) == 1
                for k, x in enumerate(grids[a].level(n)):
                    assert h(x) == grids[b].point(n, k)


def test_nesting(grids):
    a, b = grids["skew1/3"], grids["genC"]
    for n in range(1, 12):
        hn, hn1 = build_hn(a, b, n), build_hn(a, b, n + 1)
        assert all(hn1(x) == hn(x) for x in a.level(n))


def test_composition_and_inverse(grids):
    g1, g2, g3 = grids["skew1/3"], grids["genB"], grids["skew7/10"]
    n = 10
    h12, h23, h13 = build_hn(g1, g2, n), build_hn(g2, g3, n), build_hn(g1, g3, n)
    h21 = build_hn(g2, g1, n)
    for mu in g1.level(n):
        assert h13(mu) == h23(h12(mu))
        assert h21(h12(mu)) == mu


def test_bracketing(tent_skew):
    t, s = tent_skew
    rng = random.Random(2)
    for _ in range(40):
        x = Q(rng.randint(1, 10**6 - 1), 10**6)
        n = rng.randint(2, 8)
        k, _ = t.interval_index(n, x)
        lo, hi = s.point(n, k), s.point(n, k + 1)
        for m in range(n + 1, 13):
            assert lo <= build_hn(t, s, m)(x) <= hi
