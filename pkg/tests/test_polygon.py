"""Polygon calculus: spec examples, oracles, and property tests."""

import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rzcell.errors import DomainError
from rzcell.polygon import (
    ConcavePolygon,
    contact_points,
    default_slope_admissible,
    dual,
    enumerate_newton_set,
    envelope,
    hodge_unitary,
    leq,
    normalize,
    stratification_coincidence_check,
)


def random_polygon(rng, width, nblocks=3, denom=6):
    cuts = sorted(rng.sample(range(1, width * denom), nblocks - 1))
    widths = []
    prev = 0
    for c in cuts + [width * denom]:
        widths.append(Q(c - prev, denom))
        prev = c
    slopes = sorted(
        {Q(rng.randrange(-3 * denom, 3 * denom), denom) for _ in widths},
        reverse=True,
    )
    while len(slopes) < len(widths):
        slopes.append(slopes[-1] - 1)
    return ConcavePolygon.from_slopes(list(zip(slopes, widths)))


# -- envelope ---------------------------------------------------------------


def test_envelope_no_points_is_line():
    P = envelope([], 2, 1)
    assert P.breaks == ((Q(0), Q(0)), (Q(2), Q(1)))


def test_envelope_single_dominating_point():
    P = envelope([(1, 1)], 2, 1)
    assert P.breaks == ((Q(0), Q(0)), (Q(1), Q(1)), (Q(2), Q(1)))
    assert P.slopes() == [(Q(1), Q(1)), (Q(0), Q(1))]


def chord_oracle_envelope(points, width, height):
    """All-pairs chord check: an edge survives iff no point lies above it."""
    best = {Q(0): Q(0), Q(width): Q(height)}
    for x, y in points:
        x, y = Q(x), Q(y)
        if x not in best or y > best[x]:
            best[x] = y
    pts = sorted(best.items())
    hull_pts = set()
    for i, (xi, yi) in enumerate(pts):
        for xj, yj in pts[i + 1 :]:
            ok = True
            for xk, yk in pts:
                # above the full line through (xi,yi)-(xj,yj)?
                if (yk - yi) * (xj - xi) > (yj - yi) * (xk - xi):
                    ok = False
                    break
            if ok:
                hull_pts.add((xi, yi))
                hull_pts.add((xj, yj))
    return ConcavePolygon(sorted(hull_pts))


def test_envelope_matches_chord_oracle():
    pts = [(1, Q(3, 5)), (1, Q(2, 5)), (2, 1)]
    P = envelope(pts, 3, Q(3, 2))
    assert P == chord_oracle_envelope(pts, 3, Q(3, 2))
    assert P.breaks == ((Q(0), Q(0)), (Q(1), Q(3, 5)), (Q(3), Q(3, 2)))
    rng = random.Random(3)
    for _ in range(50):
        pts = [
            (Q(rng.randrange(0, 13), 3), Q(rng.randrange(-4, 9), 4))
            for _ in range(6)
        ]
        pts = [(x, y) for x, y in pts if x > 0 or y <= 0]
        pts = [(x, y) for x, y in pts if x < 4 or y <= 2]
        P = envelope(pts, 4, 2)
        assert P == chord_oracle_envelope(pts, 4, 2)
        for x, y in pts:
            assert P(x) >= y  # domination, exactly


def test_envelope_domain_errors():
    with pytest.raises(DomainError):
        envelope([(5, 0)], 2, 1)
    with pytest.raises(DomainError):
        envelope([(-1, 0)], 2, 1)


def test_envelope_idempotent_on_breaks():
    rng = random.Random(5)
    for _ in range(40):
        P = random_polygon(rng, 4)
        assert envelope(P.breaks[1:-1], P.width, P.height) == P


# -- leq ---------------------------------------------------------------------


def test_leq_examples():
    line = ConcavePolygon.line(Q(1, 2), 2)
    ordn = ConcavePolygon.from_slopes([(1, 1), (0, 1)])
    assert leq(line, ordn)
    assert not leq(ordn, line)
    assert leq(line, line)
    with pytest.raises(DomainError):
        leq(line, ConcavePolygon.line(Q(1, 2), 3))


def test_leq_against_dense_sampling():
    rng = random.Random(9)
    for _ in range(30):
        P = random_polygon(rng, 4)
        R = random_polygon(rng, 4)
        expected = all(
            P(Q(k, 64)) <= R(Q(k, 64)) for k in range(0, 4 * 64 + 1)
        )
        # dense sampling at denominator 64 is exact for these polygons
        # only when it agrees at all break abscissas too
        xs = {x for x, _ in P.breaks} | {x for x, _ in R.breaks}
        expected = expected and all(P(x) <= R(x) for x in xs)
        assert leq(P, R) == expected


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_leq_partial_order(pyrng):
    P = random_polygon(pyrng, 3)
    R = random_polygon(pyrng, 3)
    S = random_polygon(pyrng, 3)
    assert leq(P, P)
    if leq(P, R) and leq(R, P):
        assert P == R
    if leq(P, R) and leq(R, S):
        assert leq(P, S)


# -- normalize / dual ---------------------------------------------------------


def test_normalize():
    P = ConcavePolygon.from_slopes([(1, 2), (0, 2)])
    assert normalize(P, 1) == P
    N = normalize(P, 2)
    assert N.width == 2 and N.height == 1
    assert N.slopes() == [(Q(1), Q(1)), (Q(0), Q(1))]
    n = 3
    P2 = ConcavePolygon.line(Q(1, 2), 2 * n)
    N2 = normalize(P2, 2)
    assert (N2.width, N2.height) == (Q(n), Q(n, 2))
    rng = random.Random(2)
    for _ in range(20):
        P = random_polygon(rng, 6)
        assert normalize(normalize(P, 2), 3) == normalize(P, 6)


def test_dual():
    assert dual(ConcavePolygon.line(Q(1, 2), 2)) == ConcavePolygon.line(Q(1, 2), 2)
    P = ConcavePolygon.from_slopes([(1, 1), (0, 1)])
    assert dual(P) == P
    P2 = ConcavePolygon.from_slopes([(1, 1), (Q(2, 3), 3)])
    assert dual(P2) == ConcavePolygon.from_slopes([(Q(1, 3), 3), (0, 1)])
    with pytest.raises(DomainError):
        dual(ConcavePolygon.from_slopes([(2, 1)]))
    rng = random.Random(4)
    for _ in range(40):
        P = random_polygon(rng, 3)
        smin = min(s for s, _ in P.slopes())
        smax = max(s for s, _ in P.slopes())
        if smin < 0 or smax > 1:
            continue
        assert dual(dual(P)) == P
        assert sorted(s for s, _ in dual(P).slopes()) == sorted(
            1 - s for s, _ in P.slopes()
        )


# -- contact points -------------------------------------------------------------


def contact_oracle(P, R, denom=48):
    on = [
        Q(k, denom)
        for k in range(0, int(P.width) * denom + 1)
        if P(Q(k, denom)) == R(Q(k, denom))
    ]
    return set(on)


def test_contact_points():
    line = ConcavePolygon.line(Q(1, 2), 4)
    assert contact_points(line, line) == [(Q(0), Q(4))]
    hodge = hodge_unitary(4)
    cps = contact_points(line, hodge)
    assert cps == [(Q(0), Q(0)), (Q(4), Q(4))]
    pts = contact_oracle(line, hodge)
    assert pts == {Q(0), Q(4)}
    # interval + endpoint mix: a polygon equal to hodge on [0,2]
    P = ConcavePolygon([(0, 0), (1, 1), (2, Q(3, 2)), (4, 2)])
    cps = contact_points(P, hodge)
    assert cps[0] == (Q(0), Q(2))
    assert cps[-1] == (Q(4), Q(4))
    sample = contact_oracle(P, hodge)
    for x in sample:
        assert any(a <= x <= b for a, b in cps)


# -- hodge polygon and the Newton set -----------------------------------------


def test_hodge_unitary():
    assert hodge_unitary(1) == ConcavePolygon.line(Q(1, 2), 1)
    assert hodge_unitary(2) == ConcavePolygon.from_slopes([(1, 1), (0, 1)])
    assert hodge_unitary(3) == ConcavePolygon.from_slopes(
        [(1, 1), (Q(1, 2), 1), (0, 1)]
    )
    with pytest.raises(DomainError):
        hodge_unitary(0)


def oracle_newton_set(n):
    """Corridor search over strictly-decreasing slope sequences."""
    hodge = hodge_unitary(n)
    pool = sorted(
        {
            Q(num, den)
            for den in range(1, 2 * n + 1)
            for num in range(0, den + 1)
        },
        reverse=True,
    )
    out = []

    def feasible_prefix(w, h):
        if h < Q(w, 2) - Q(0):
            pass
        return h <= hodge(w)

    def rec(blocks, w, h, last):
        if w == n:
            if h != Q(n, 2):
                return
            mult = {s: m for s, m in blocks}  # slopes strictly decrease
            if any(mult.get(1 - s) != m for s, m in mult.items()):
                return
            P = ConcavePolygon.from_slopes(blocks)
            if leq(ConcavePolygon.line(Q(1, 2), n), P) and leq(P, hodge):
                out.append(P)
            return
        for s in pool:
            if s >= last:
                continue
            for m in range(1, n - w + 1):
                if not default_slope_admissible(s, m):
                    continue
                h2 = h + s * m
                w2 = w + m
                if h2 > hodge(w2):
                    continue
                if h2 + (n - w2) * s < Q(n, 2):
                    # slopes only decrease; cannot recover the height
                    continue
                rec(blocks + [(s, m)], w2, h2, s)

    rec([], 0, Q(0), Q(2))
    return sorted(out, key=lambda P: sorted((-s, w) for s, w in P.slopes()))


@pytest.mark.parametrize("n,card", [(1, 1), (2, 2), (3, 2)])
def test_newton_set_small(n, card):
    got = enumerate_newton_set(n)
    assert len(got) == card
    assert ConcavePolygon.line(Q(1, 2), n) in got
    assert hodge_unitary(n) in got


@pytest.mark.parametrize("n", range(1, 7))
def test_newton_set_matches_oracle(n):
    assert enumerate_newton_set(n) == oracle_newton_set(n)


def test_newton_set_extremes():
    for n in range(1, 9):
        polys = enumerate_newton_set(n)
        line = ConcavePolygon.line(Q(1, 2), n)
        basics = [P for P in polys if P == line]
        assert len(basics) == 1
        maxima = [P for P in polys if all(leq(Q_, P) for Q_ in polys)]
        assert maxima == [hodge_unitary(n)]


@pytest.mark.parametrize("n", range(1, 9))
def test_stratification_coincidence(n):
    assert stratification_coincidence_check(n)


def test_json_roundtrip():
    P = ConcavePolygon.from_slopes([(Q(3, 5), 1), (Q(1, 2), 2)])
    assert ConcavePolygon.from_json(P.to_json()) == P
