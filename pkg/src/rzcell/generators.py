"""Instance generators: every output is validated by construction or by
rejection against the exhaustive validator.

Level-model generators: uniform semistable, split multi-slope, height
profile, rejection-sampled random.  Tower generators: the supersingular
(1,2) family driven by exact Hasse-invariant dynamics, and polarized
"bump" towers whose excess degree sits on the isotropic tube of a chosen
scran.
"""

from __future__ import annotations

import random
from fractions import Fraction as Q

from .errors import DomainError
from .hncore import FlatGroupModel, PDivTower, validate
from .pgroup import Module, Pairing, Subgroup, standard_symplectic_gram
from .ring import Zq


# ---------------------------------------------------------------------------
# level-pairing plumbing


def antidiag_hermitian_gram(ring: Zq, n: int):
    return tuple(
        tuple(ring.one if j == n - 1 - i else ring.zero for j in range(n))
        for i in range(n)
    )


def identity_gram(ring: Zq, n: int):
    return tuple(
        tuple(ring.one if j == i else ring.zero for j in range(n))
        for i in range(n)
    )


def make_level_form(module: Module, gram, sesquilinear=None):
    """(perp_factory, pair_value) for a tower with a perfect ambient form.

    The level-j pairing on A[p^j] is the K-level form evaluated against
    p^-(K-j)-divided generators — the compatible Weil-style tower of
    pairings.  pair_value(x, y, j) returns the level-j value in R mod p^j.
    """
    pairing = Pairing(module, gram, module.ring.K, sesquilinear=sesquilinear)
    K = module.ring.K
    R = module.ring

    def factory(j: int):
        tors = module.torsion(j)

        def perp(B: Subgroup) -> Subgroup:
            if not B.rows:
                return tors
            divided = [
                tuple(R.divp(x, K - j) for x in row) for row in B.rows
            ]
            dsub = module.subgroup(divided)
            return module.intersect(pairing.perp(dsub), tors)

        return perp

    def pair_value(x, y, j: int):
        xd = tuple(R.divp(c, K - j) for c in x)
        return R.mod_ppow(R.divp(pairing(xd, y), K - j), j)

    return factory, pair_value


def make_perp_factory(module: Module, gram, sesquilinear=None):
    return make_level_form(module, gram, sesquilinear)[0]


# ---------------------------------------------------------------------------
# level-model generators


def uniform_semistable_model(p: int, exps, mu, ring_deg: int = 1) -> FlatGroupModel:
    """deg = mu * ht on the full lattice."""
    mu = Q(mu)
    if mu < 0 or mu > 1:
        raise DomainError("slope must lie in [0,1]")
    module = Module(Zq(p, max(exps), ring_deg), tuple(exps))
    t = tuple(sorted(exps, reverse=True))
    return FlatGroupModel(
        module, lambda B: mu * B.ht, generic_type=t, special_type=t
    )


def split_multislope_model(p: int, parts, ring_deg: int = 1) -> FlatGroupModel:
    """Direct sum of semistable blocks, parts = [(exps_i, mu_i), ...].

    deg follows the layer formula along the partial-sum filtration; with the
    mu_i strictly decreasing the HN filtration is that filtration.
    """
    exps: list[int] = []
    mus: list[Q] = []
    ends: list[int] = []
    for part_exps, mu in parts:
        exps.extend(part_exps)
        mus.append(Q(mu))
        ends.append(len(exps))
    module = Module(Zq(p, max(exps), ring_deg), tuple(exps))
    filt = [
        module.subgroup([module.basis_vector(i) for i in range(end)])
        for end in ends
    ]

    def deg(B: Subgroup) -> Q:
        total = Q(0)
        prev = 0
        for mu, F in zip(mus, filt):
            cap = module.intersect(B, F).ht
            total += mu * (cap - prev)
            prev = cap
        return total

    return FlatGroupModel(module, deg)


def height_profile_model(p: int, exps, increments, ring_deg: int = 1) -> FlatGroupModel:
    """deg(B) = f(ht B) for f given by per-step increments in [0, 1].

    Validity of the join axiom needs f(h)/h maximized on a top suffix;
    nondecreasing increments (convex f) guarantee that.
    """
    incs = [Q(i) for i in increments]
    if any(i < 0 or i > 1 for i in incs):
        raise DomainError("profile increments must lie in [0,1]")
    module = Module(Zq(p, max(exps), ring_deg), tuple(exps))
    total_ht = module.ring.deg * sum(exps)
    if len(incs) != total_ht:
        raise DomainError("need exactly one increment per height step")
    prefix = [Q(0)]
    for i in incs:
        prefix.append(prefix[-1] + i)
    return FlatGroupModel(module, lambda B: prefix[B.ht])


def random_perturbed_model(
    p: int,
    exps,
    rng: random.Random,
    d_max: int = 24,
    tries: int = 400,
    ring_deg: int = 1,
) -> FlatGroupModel:
    """Rejection-sampled random valid degree table.

    A random polymatroid base deg(B) = mu ht(B) + sum_j w_j ht(B ^ F_j)
    (submodular by construction, like genuine degree functions) gets small
    random perturbations and is rejected against the full validator WITH
    the submodularity inequality: submodularity is what makes the
    semistable-decreasing chain unique, and it implies the join axiom.
    """
    module = Module(Zq(p, max(exps), ring_deg), tuple(exps))
    subs = module.all_submodules()
    pos = [B for B in subs if B.ht > 0]
    full = module.full_subgroup()
    for _ in range(tries):
        nblocks = rng.randint(0, 3)
        blocks = [rng.choice(pos) for _ in range(nblocks)]
        cuts = sorted(rng.randint(0, d_max) for _ in range(nblocks + 1))
        weights = [Q(cuts[0], d_max)] + [
            Q(b - a, d_max) for a, b in zip(cuts, cuts[1:])
        ]
        mu = weights[0]
        wts = weights[1:]
        degs = {}
        for B in subs:
            val = mu * B.ht
            for F, w in zip(blocks, wts):
                val += w * module.intersect(B, F).ht
            degs[B.key()] = val
        # a couple of tiny downward perturbations, then reject-validate
        for _ in range(rng.randint(0, 2)):
            B = rng.choice(pos)
            if B == full:
                continue
            eps = Q(1, d_max)
            if degs[B.key()] - eps >= 0:
                degs[B.key()] -= eps
        model = FlatGroupModel(module, degs, lattice=subs)
        ok, _ = validate(model, check_submodular=True)
        if ok:
            return model
    raise DomainError("rejection sampling produced no valid model")


# ---------------------------------------------------------------------------
# supersingular (1,2) towers via Hasse-invariant dynamics


class _CurveNode:
    __slots__ = ("W", "h", "can")

    def __init__(self, W: Subgroup, h: Q, can):
        self.W = W
        self.h = h
        self.can = can  # Subgroup over W of relative height 1, or None (lazy)


def hasse_curve_tower(p: int, K: int, h0) -> PDivTower:
    """Basic (d,h) = (1,2) tower modelled on exact canonical-subgroup
    dynamics with Hodge height h0 in (0, p/(p+1)].

    States evolve by h -> p*h below 1/(p+1), h -> 1-h on [1/(p+1), p/(p+1)];
    the tower is semistable iff h0 >= 1/2.
    """
    h0 = Q(h0)
    if not (0 < h0 <= Q(p, p + 1)):
        raise DomainError("Hodge height must lie in (0, p/(p+1)]")
    R = Zq(p, K, 1)
    module = Module(R, (K, K))
    thresh = Q(1, p + 1)
    root_can = module.subgroup([module.basis_vector(0, K - 1)])
    root = _CurveNode(module.zero_subgroup(), h0, root_can)
    nodes: dict = {}
    memo: dict = {}

    def lines_over(W: Subgroup):
        T1 = module.preimage_p(W, 1)
        out = []
        for B in _interval_subgroups(module, W, T1):
            if B.ht == W.ht + 1:
                out.append(B)
        return sorted(out, key=lambda s: s.rows)

    def get_can(node: _CurveNode, T1: Subgroup) -> Subgroup:
        if node.can is None:
            for X in lines_over(node.W):
                if X != T1:
                    node.can = X
                    break
        return node.can

    def child(node: _CurveNode, L: Subgroup, kind: str, T1: Subgroup) -> _CurveNode:
        key = (L.rows, kind, node.W.rows, node.h)
        if key in nodes:
            return nodes[key]
        if kind == "full":
            nxt = _CurveNode(T1, node.h, module.preimage_p(get_can(node, T1), 0 + 1))
        elif kind == "can":
            if node.h < thresh:
                nxt = _CurveNode(L, p * node.h, None)  # canonical chosen lazily
            else:
                nxt = _CurveNode(L, 1 - node.h, T1)
        else:  # non-canonical line
            nxt = _CurveNode(L, node.h / p, T1)
        nodes[key] = nxt
        return nxt

    def node_deg(node: _CurveNode, B: Subgroup) -> Q:
        if B == node.W:
            return Q(0)
        mkey = (id(node), B.rows)
        if mkey in memo:
            return memo[mkey]
        T1 = module.preimage_p(node.W, 1)
        B1 = module.intersect(B, T1)
        rel = B1.ht - node.W.ht
        if rel == 2:
            d1 = Q(1)
            nxt = child(node, T1, "full", T1)
        elif rel == 1:
            if B1 == get_can(node, T1):
                d1 = 1 - node.h
                nxt = child(node, B1, "can", T1)
            else:
                d1 = node.h / p
                nxt = child(node, B1, "noncan", T1)
        else:
            raise DomainError("nonzero subgroup with zero p-torsion")
        val = d1 + node_deg(nxt, B)
        memo[mkey] = val
        return val

    def deg(B: Subgroup) -> Q:
        return node_deg(root, B)

    perp_factory, pair_value = make_level_form(
        module, standard_symplectic_gram(2), sesquilinear=False
    )
    return PDivTower(
        module,
        1,
        deg,
        basic=True,
        unitary=True,  # h = 2n, d = n with n = 1; principally polarized
        perp_factory=perp_factory,
        pair_value=pair_value,
        label=f"ss-curve p={p} K={K} h={h0}",
    )


def _interval_subgroups(module: Module, W: Subgroup, T: Subgroup):
    """Subgroups W <= B <= T, via the quotient presentation."""
    from .pgroup import QuotientPresentation

    pres = QuotientPresentation(T, W)
    return [pres.lift_subgroup(S) for S in pres.module.all_submodules()]


# ---------------------------------------------------------------------------
# polarized bump towers


def bump_unitary_tower(
    p: int,
    n: int,
    K: int,
    scran_vector,
    scran_exp: int = 1,
    excess=Q(1, 2),
    gram=None,
    label: str = "",
) -> PDivTower:
    """Unitary (n, 2n) tower whose level models are uniform slope 1/2 plus
    an excess supported near the isotropic scran E = R p^(K-s) w.

    deg(B) = ht(B)/2 + eps * max(0, ht(B^E) + ht(B^E_perp) - ht(B)) where
    eps = excess / ht(E) and the perp is taken at level exp(B).  The scran
    vector w must satisfy <w, w> = 0 mod p^K.  Validity is asserted level
    by level (exhaustively for small lattices).
    """
    R = Zq(p, K, 2)
    module = Module(R, (K,) * n)
    if gram is None:
        gram = identity_gram(R, n)
    pairing = Pairing(module, gram, K)
    w = module.vreduce(tuple(scran_vector))
    if not R.is_zero(pairing(w, w)):
        raise DomainError("scran vector must be isotropic mod p^K")
    if scran_exp != 1 or K != 2:
        # the excess functional is validated for this envelope only; the
        # level-3 polarization identity fails outside it
        raise DomainError("bump towers support scran_exp = 1, K = 2")
    egen = module.vscale(R.ppow(K - scran_exp), w)
    E = module.subgroup([egen])
    eps = Q(excess) / E.ht
    if not (0 < Q(excess) <= Q(E.ht, 2)):
        raise DomainError("excess must lie in (0, ht(E)/2]")
    perp_factory, pair_value = make_level_form(module, gram)
    perp_cache: dict = {}

    def e_perp(j: int) -> Subgroup:
        # annihilator at level j of the j-torsion part of the scran tube
        if j not in perp_cache:
            perp_cache[j] = perp_factory(j)(
                module.intersect(E, module.torsion(j))
            )
        return perp_cache[j]

    def deg(B: Subgroup) -> Q:
        if B.ht == 0:
            return Q(0)
        j = B.exponent
        phi = (
            module.intersect(B, E).ht
            + module.intersect(B, e_perp(j)).ht
            - B.ht
        )
        excess_part = eps * max(0, phi)
        return Q(B.ht, 2) + excess_part

    return PDivTower(
        module,
        n,
        deg,
        basic=True,
        unitary=True,
        perp_factory=perp_factory,
        pair_value=pair_value,
        label=label or f"bump n={n} p={p} K={K}",
    )
