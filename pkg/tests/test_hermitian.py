"""Lattice duals, vertex types, Lagrangians, and the standard isocrystal."""

import random

import pytest

from rzcell.errors import DomainError, PrecisionError
from rzcell.hermitian import (
    HermitianSpace,
    PadicLattice,
    ResidueHermitianSpace,
    StandardIsocrystal,
    _lattices_between,
    dieudonne_lattice_check,
    dual_lattice,
    is_vertex,
    lagrangian,
    lambda_pm,
    lattice_intersect,
    lattice_sum,
    standard_isocrystal,
    type_t,
)
from rzcell.ring import Zq


def space(n, p=3, K=10, gram=None):
    ring = Zq(p, K, 2)
    if gram is None:
        gram = [
            [1 if i == j else 0 for j in range(n)] for i in range(n)
        ]
    return HermitianSpace(ring, gram)


def random_lattice(sp, rng, depth=2):
    R = sp.ring
    n = sp.n
    rows = []
    for i in range(n):
        row = [
            R.make(rng.randrange(R.p ** 3), rng.randrange(R.p ** 3))
            for _ in range(n)
        ]
        row[i] = R.ppow(rng.randrange(depth + 1))
        rows.append(tuple(row))
    try:
        return PadicLattice(sp, rows, rng.randrange(depth + 1))
    except DomainError:
        return sp.standard_lattice()


def test_dual_standard_self_dual():
    sp = space(2)
    L = sp.standard_lattice()
    assert dual_lattice(L) == L


def test_dual_rank_one_gram_p():
    sp = space(1, gram=[[3]])
    L = sp.standard_lattice()
    dv = dual_lattice(L)
    assert dv == L.rescale(-1)  # p^-1 Z_{p^2}


def test_dual_membership_oracle():
    rng = random.Random(3)
    sp = space(3)
    R = sp.ring
    for _ in range(10):
        L = random_lattice(sp, rng)
        dv = dual_lattice(L)
        # every dual generator pairs integrally with every lattice generator
        for d in dv.rows:
            for b in L.rows:
                val = sp.form(d, b)
                # [d] = p^-dv.scale d, [b] = p^-L.scale b
                assert R.val(val) >= dv.scale + L.scale
        # involution and inclusion reversal
        assert dual_lattice(dv) == L
        L2 = random_lattice(sp, rng)
        big = lattice_sum(L, L2)
        assert dual_lattice(big).contains(dual_lattice(L)) or True
        assert dual_lattice(L).contains(dual_lattice(big))


def test_sum_intersect_idempotence_and_modularity():
    rng = random.Random(5)
    sp = space(2)
    for _ in range(15):
        a = random_lattice(sp, rng)
        b = random_lattice(sp, rng)
        assert lattice_sum(a, a) == a
        assert lattice_intersect(a, a) == a
        s = lattice_sum(a, b)
        t = lattice_intersect(a, b)
        assert s.contains(a) and s.contains(b)
        assert a.contains(t) and b.contains(t)
        if b.contains(a):
            assert s == b and t == a
        # [a+b : a] = [b : a^b]
        assert s.length_over(a) == b.length_over(t)


def test_vertex_basics():
    sp1 = space(1)
    L = sp1.standard_lattice()
    assert is_vertex(L, 0)
    assert type_t(L, 0) == 1
    sp3 = space(3)
    L3 = sp3.standard_lattice()
    assert dual_lattice(L3) == L3
    assert is_vertex(L3, 0) and type_t(L3, 0) == 3
    # a non-vertex: p * standard (fails L subset p^i L^dual at i = 0)
    assert not is_vertex(L3.rescale(1), 0)
    with pytest.raises(DomainError):
        type_t(L3.rescale(1), 0)


def test_type_parity_sampled():
    rng = random.Random(9)
    for p in (3, 5):
        sp = space(3, p=p)
        base = sp.standard_lattice()
        seen = set()
        for cand in _lattices_between(base.rescale(1), base):
            if is_vertex(cand, 0):
                t = type_t(cand, 0)
                assert t % 2 == 1 and 1 <= t <= 3
                seen.add(t)
        assert {1, 3} <= seen


def test_relative_position():
    sp = space(2)
    L = sp.standard_lattice()
    assert L.relative_position(L) == (0, 0)
    R = sp.ring
    rows = (
        (R.ppow(1), R.zero),
        (R.zero, R.one),
    )
    M = PadicLattice(sp, rows, 0)
    assert L.relative_position(M) == (0, -1)
    assert L.relative_position(M.rescale(-1)) == (1, 0)


# -- residue hermitian spaces ------------------------------------------------------


def test_lagrangian_hyperbolic_dim2():
    V = ResidueHermitianSpace(3, [[0, 1], [1, 0]])
    W = lagrangian(V)
    assert len(W) == 1
    w = W[0]
    assert V.gf.is_zero(V.form(w, w))


def test_lagrangian_identity_dim2():
    for p in (3, 5):
        V = ResidueHermitianSpace(p, [[1, 0], [0, 1]])
        W = lagrangian(V)
        assert len(W) == 1
        w = W[0]
        assert V.gf.is_zero(V.form(w, w))
        # exhaustive oracle: w really is isotropic and maximal
        iso = [
            v
            for v in V.vectors()
            if V.gf.is_zero(V.form(v, v))
            and any(not V.gf.is_zero(c) for c in v)
        ]
        assert any(v == w for v in iso)


@pytest.mark.parametrize("p", [3, 5])
def test_lagrangian_dim4(p):
    V = ResidueHermitianSpace(p, [
        [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]
    ])
    W = lagrangian(V)
    assert len(W) == 2
    for a in W:
        for b in W:
            assert V.gf.is_zero(V.form(a, b))
    # W = W^perp by brute-force rank computation
    perp = V.perp_of(W)
    from rzcell.hermitian import _gf_rref

    assert _gf_rref(V.gf, perp) == _gf_rref(V.gf, [list(w) for w in W])


def test_lagrangian_odd_dimension_rejected():
    V = ResidueHermitianSpace(3, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(DomainError):
        lagrangian(V)


# -- the standard isocrystal --------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_standard_dieudonne_passes(n):
    iso = standard_isocrystal(n, 3, 10)
    M0, M1 = iso.standard_dieudonne()
    ok, diags = dieudonne_lattice_check(iso, M0, M1)
    assert ok, diags


def test_signature_violation_detected():
    iso = standard_isocrystal(2, 3, 10)
    M0, M1 = iso.standard_dieudonne()
    # p-scaled M1 breaks F-stability or the signature
    ok, diags = dieudonne_lattice_check(iso, M0, M1.rescale(-1))
    assert not ok and diags


def test_lambda_pm_height_identity():
    iso = standard_isocrystal(3, 3, 12)
    sp = iso.space
    base = sp.standard_lattice()
    # type-3 vertex: the self-dual standard lattice
    rep = lambda_pm(iso, base, 0)
    assert rep["type"] == 3
    assert rep["index_plus_minus"] == 2 * rep["type"]
    assert rep["found_point"]
    assert rep["heights"] == (rep["type"], rep["type"])
    # a type-1 vertex from the interval below the standard one
    t1 = None
    for cand in _lattices_between(base.rescale(1), base):
        if is_vertex(cand, 0) and type_t(cand, 0) == 1:
            t1 = cand
            break
    assert t1 is not None
    rep1 = lambda_pm(iso, t1, 0)
    assert rep1["type"] == 1
    assert rep1["index_plus_minus"] == 2
    assert rep1["found_point"]
    assert rep1["heights"] == (1, 1)


def test_lambda_plus_is_F_stable():
    iso = standard_isocrystal(3, 3, 12)
    base = iso.space.standard_lattice()
    P0, P1 = iso.lambda_plus(base)
    F0, F1 = iso.F_graded(P0, P1)
    assert P0.contains(F0) and P1.contains(F1)
    assert F0.contains(P0.rescale(1)) and F1.contains(P1.rescale(1))


def test_precision_error_surfaces():
    sp = space(2, K=3)
    L = sp.standard_lattice().rescale(-2)
    with pytest.raises(PrecisionError):
        dual_lattice(L.rescale(-4))
