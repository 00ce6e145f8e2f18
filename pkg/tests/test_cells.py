"""Index-set combinatorics: actions, metric, balls, fixed points."""

import random
from fractions import Fraction as Q

import pytest

from rzcell.cells import (
    CellContext,
    CellIndex,
    GammaElement,
    ball_indices,
    displacement_growth_check,
    enumerate_dominant,
    fixed_point_count,
    gamma_act,
    index_distance_sq,
    kappa,
    locally_finite_certificate,
    phi,
    quasi_isogeny_distance,
    sqrt_leq_sum,
    unitary_basis_element,
    vpc,
    x_classes_within,
)
from rzcell.errors import DomainError, Exceeds
from rzcell.gmatrix import mat_identity, mat_mul
from rzcell.ring import Zq


@pytest.fixture(scope="module")
def ctx():
    return CellContext(2, 3, precision=12)


@pytest.fixture(scope="module")
def elliptic_pair(ctx):
    # h with trace 1, det 1: char poly t^2 - t + 1, disc -3 of odd
    # valuation, hence elliptic; unit det so h normalizes G(Z_p).
    from rzcell.cells import norm_root

    R = ctx.ring
    half = R.from_int(pow(2, -1, R.mod))
    x = (half[0], 1)
    target = R.sub(R.one, R.make(R.norm(x), 0))
    y = norm_root(R, target)
    assert y is not None
    h = ctx.g_element(((x, y), (R.neg(R.conj(y)), R.conj(x))), 0)
    # J-side: a regular unit-similitude of diag(1, p)
    d = R.mul(R.make(0, 1), R.unit_inv(R.conj(R.make(0, 1))))
    g = ctx.j_element(((R.one, R.zero), (R.zero, d)), 0)
    return GammaElement(ctx, h, g)


@pytest.fixture(scope="module")
def odd_elliptic_h(ctx):
    # trace 0, det 3: disc -12, elliptic with v_p(det) = 1 (does not
    # normalize K; used for counting only)
    from rzcell.cells import norm_root

    R = ctx.ring
    u = R.make(0, 1)
    y = norm_root(R, R.from_int(5))
    assert y is not None
    return ctx.g_element(((u, y), (R.neg(R.conj(y)), R.conj(u))), 0)


# -- coweights ---------------------------------------------------------------


def brute_dominant(n, bound):
    import itertools

    out = []
    for w in itertools.product(range(-bound, bound + 1), repeat=n):
        if all(a >= b for a, b in zip(w, w[1:])) and all(
            w[i] + w[n - 1 - i] == w[0] + w[n - 1] for i in range(n)
        ):
            out.append(w)
    return sorted(out)


@pytest.mark.parametrize("n,bound", [(1, 2), (2, 1), (2, 2), (3, 1), (4, 1)])
def test_enumerate_dominant_oracle(n, bound):
    got = enumerate_dominant(n, bound)
    assert got == brute_dominant(n, bound)
    for w in got:
        assert all(a >= b for a, b in zip(w, w[1:]))
        assert len({w[i] + w[n - 1 - i] for i in range(n)}) == 1


def test_vpc_kappa():
    assert vpc((0, 0, 0)) == 0
    assert vpc((1, 0)) == 1
    assert kappa(4, 2) == -2
    n = 3
    assert kappa(2 * n * 2, n) == -4
    with pytest.raises(DomainError):
        kappa(5, 3)
    with pytest.raises(DomainError):
        kappa(3, 3)  # odd n needs an even value


# -- indices and phi ------------------------------------------------------------


def test_phi_basics(ctx):
    o = ctx.identity_index()
    assert phi(o) == 0
    # n = 2: v_p(det T) = 1, v_p(det g') = 0 -> phi = -1
    idx = CellIndex(ctx, o.xmat, Q(2 * 1, 2), Q(0), o.y)
    assert phi(idx) == -1


def test_phi_central_invariance(ctx):
    o = ctx.identity_index()
    # [T z, j + 2 v_p(z), g']: shift s and t oppositely-compatibly
    shifted = CellIndex(ctx, o.xmat, o.s + 2, o.t - 2, o.y)
    assert phi(shifted) == phi(o)
    assert shifted == o


def test_gamma_actions(ctx, elliptic_pair):
    R = ctx.ring
    o = ctx.identity_index()
    ident = GammaElement(ctx, mat_identity(R, 2), mat_identity(R, 2))
    assert gamma_act(ident, o) == o
    # central (z, z^-1)
    pmat = tuple(
        tuple(R.ppow(1) if i == j else R.zero for j in range(2))
        for i in range(2)
    )
    central = GammaElement(ctx, (pmat, 0), (pmat, 2))
    assert gamma_act(central, o) == o
    # composition gamma1 compose gamma2 on sampled indices
    g1 = elliptic_pair
    g2 = central
    composed = GammaElement(
        ctx,
        mat_mul(R, g2.h, g1.h),
        mat_mul(R, g1.g, g2.g),
    )
    for idx in ball_indices(o, Q(2), cap=4)[:6]:
        assert gamma_act(composed, idx) == gamma_act(g1, gamma_act(g2, idx))


def test_gamma_fiber_preservation(ctx, elliptic_pair):
    o = ctx.identity_index()
    assert elliptic_pair.vdet_h + elliptic_pair.vdet_g == 0
    for idx in ball_indices(o, Q(2), cap=4)[:8]:
        assert phi(gamma_act(elliptic_pair, idx)) == phi(idx)
    # h-side-only action never changes the building coordinate's type
    R = ctx.ring
    honly = GammaElement(ctx, elliptic_pair.h, mat_identity(R, 2))
    for idx in ball_indices(o, Q(2), cap=4)[:8]:
        assert gamma_act(honly, idx).y.t == idx.y.t


# -- metric ------------------------------------------------------------------------


def test_metric_axioms(ctx):
    o = ctx.identity_index()
    ball = ball_indices(o, Q(4), cap=4)
    assert index_distance_sq(o, o) == 0
    rng = random.Random(3)
    pts = [rng.choice(ball) for _ in range(30)]
    for a in pts:
        for b in pts[:10]:
            dab = index_distance_sq(a, b)
            assert dab == index_distance_sq(b, a)
            assert (dab == 0) == (a == b)
    for _ in range(60):
        a, b, c = (rng.choice(ball) for _ in range(3))
        assert sqrt_leq_sum(
            index_distance_sq(a, c),
            index_distance_sq(a, b),
            index_distance_sq(b, c),
        )


def test_gamma_isometry(ctx, elliptic_pair):
    o = ctx.identity_index()
    ball = ball_indices(o, Q(2), cap=4)
    rng = random.Random(5)
    for _ in range(25):
        a, b = rng.choice(ball), rng.choice(ball)
        da = index_distance_sq(a, b)
        assert da == index_distance_sq(
            gamma_act(elliptic_pair, a), gamma_act(elliptic_pair, b)
        )


def test_quasi_isogeny_distance(ctx):
    R = ctx.ring
    L0 = ctx.base_lattice
    assert quasi_isogeny_distance(L0, L0) == 0
    # relative invariant (1, -1) -> n (a_1 - a_n) = 4
    rows = ((R.ppow(1), R.zero), (R.zero, R.one))
    L = ctx.x_lattice((rows, 0)).rescale(1)  # exponents (2, 0)? normalize:
    L = ctx.x_lattice(((rows[0], rows[1]), 0))
    diag = ctx.x_lattice((((R.ppow(1), R.zero), (R.zero, R.one)), 0))
    # inv(base, p^-? diag): base -> diag has invariant (0, -1); shift to (1, -1)
    cand = diag.rescale(-1)  # exponents: p^-1 (pR + R) = R + p^-1 R
    inv = L0.relative_position(cand)
    assert inv == (1, 0) or inv == (0, -1) or inv == (1, -1)
    two_sided = ctx.x_lattice(
        (((R.ppow(2), R.zero), (R.zero, R.one)), 1)
    )  # p^-1 (p^2 R + R): exponents (-1, 1)
    assert L0.relative_position(two_sided) in ((1, -1), (-1, 1))
    assert quasi_isogeny_distance(L0, two_sided) == 4


def quasi_isogeny_oracle(inv):
    """min over central shifts of q(rho) + q(rho^-1), from the invariant."""
    n = len(inv)
    best = None
    lo, hi = min(inv), max(inv)
    for k in range(lo - 1, hi + 2):
        shifted = [a - k for a in inv]
        nr = max(0, max(shifted))
        q1 = sum(nr - a for a in shifted)
        inv2 = sorted((-a for a in shifted), reverse=True)
        nr2 = max(0, max(inv2))
        q2 = sum(nr2 - a for a in inv2)
        tot = q1 + q2
        if best is None or tot < best:
            best = tot
    return best


def test_quasi_isogeny_against_height_bookkeeping(ctx):
    R = ctx.ring
    rng = random.Random(7)
    L0 = ctx.base_lattice
    from rzcell.hermitian import _lattices_between

    for cand in _lattices_between(L0.rescale(2), L0.rescale(-1))[:60]:
        inv = L0.relative_position(cand)
        assert quasi_isogeny_distance(L0, cand) == len(inv) * (
            inv[0] - inv[-1]
        )
        assert quasi_isogeny_oracle(inv) == len(inv) * (inv[0] - inv[-1])


# -- balls -------------------------------------------------------------------------


def test_ball_basics(ctx):
    o = ctx.identity_index()
    assert ball_indices(o, Q(0)) == [o]
    b1 = ball_indices(o, Q(1), cap=4)
    b2 = ball_indices(o, Q(2), cap=4)
    assert set(i.key() for i in b1) <= set(i.key() for i in b2)
    assert o in b1


def test_ball_gamma_stable(ctx, elliptic_pair):
    # gamma fixing the center maps A_rho to itself
    o = ctx.identity_index()
    gam = elliptic_pair
    if gamma_act(gam, o) == o:
        ball = ball_indices(o, Q(2), phi_value=0, cap=4)
        moved = {gamma_act(gam, idx).key() for idx in ball}
        assert moved == {idx.key() for idx in ball}


def test_locally_finite_certificate(ctx):
    o = ctx.identity_index()
    sample = ball_indices(o, Q(2), phi_value=0, cap=4)
    rep0 = locally_finite_certificate(sample, Q(0))
    assert all(v == 1 for v in rep0["per_index"].values())
    rep = locally_finite_certificate(sample, Q(2))
    assert rep["max_neighbors"] <= len(sample)
    assert rep["max_neighbors"] >= 1


def test_displacement_growth(ctx, odd_elliptic_h):
    o = ctx.identity_index()
    R = ctx.ring
    ident = GammaElement(ctx, mat_identity(R, 2), mat_identity(R, 2))
    rep = displacement_growth_check(ident, o, [1, 2], cap=4)
    for _, disp, size in rep:
        if size:
            assert disp == 0
    # the odd pair: v_p(det h) = 1, v_p(det g) = -1 moves lattice classes
    godd = ctx.j_element(((R.zero, R.one), (R.ppow(1), R.zero)), 1)
    gam = GammaElement(ctx, odd_elliptic_h, godd)
    assert gam.vdet_h + gam.vdet_g == 0
    rep2 = displacement_growth_check(gam, o, [1, 2], cap=4)
    disps = [d for _, d, s in rep2 if s and d is not None]
    assert disps and all(d > 0 for d in disps)


# -- fixed points ----------------------------------------------------------------


def test_fixed_point_trivial_identity(ctx, odd_elliptic_h):
    R = ctx.ring
    from rzcell.gmatrix import mat_inverse

    h = odd_elliptic_h
    h_rep = mat_inverse(R, h)
    count, stab = fixed_point_count(ctx, h_rep, h, radius=1)
    assert count >= 1


def test_fixed_point_valuation_obstruction(ctx, odd_elliptic_h):
    R = ctx.ring
    # conjugates of h_rep keep v_p(c) odd; h^-1 K has it even: count 0
    h_rep = odd_elliptic_h
    ident = mat_identity(R, 2)
    count, stab = fixed_point_count(ctx, h_rep, ident, radius=2)
    assert count == 0 and stab


def test_fixed_point_stabilization(ctx, odd_elliptic_h):
    R = ctx.ring
    from rzcell.gmatrix import mat_inverse

    h = odd_elliptic_h
    h_rep = mat_inverse(R, h)
    counts = {}
    for rad in (1, 2, 3):
        counts[rad], _ = fixed_point_count(ctx, h_rep, h, radius=rad)
    assert counts[1] >= 1
    assert counts[2] == counts[3]


def test_unitary_basis_element_roundtrip(ctx):
    for L, _ in x_classes_within(ctx, Q(4)):
        g = unitary_basis_element(ctx, L)
        assert g is not None
        assert ctx.x_lattice(g) == L
