"""Weighted subgroup lattices and Harder-Narasimhan combinatorics.

A ``FlatGroupModel`` is the computable stand-in for a finite flat group
scheme: a submodule lattice over Z_p or Z_{p^2} with a degree weighting
subject to the slope axioms.  ``PDivTower`` models p-divisible torsion: one
ambient at depth K_max whose p^k-torsion sublattices give the level models,
weighted by a single intrinsic degree function.

Degrees are Fractions, heights are p-heights (a Z_{p^2}-length counts
twice), slopes live in [0, 1] on valid models.  Everything here is exact.
"""

from __future__ import annotations

from fractions import Fraction as Q
from typing import Callable, Optional

from .errors import DepthExhausted, DomainError, NotGroupLike
from .pgroup import Module, Pairing, QuotientPresentation, Subgroup
from .polygon import ConcavePolygon, leq, normalize
from .ring import Zq


class FlatGroupModel:
    """Weighted subgroup lattice; ``ambient_sub`` may be a torsion piece."""

    def __init__(
        self,
        module: Module,
        deg: Callable[[Subgroup], Q] | dict,
        ambient_sub: Optional[Subgroup] = None,
        lattice: Optional[list] = None,
        perp: Optional[Callable[[Subgroup], Subgroup]] = None,
        generic_type: Optional[tuple] = None,
        special_type: Optional[tuple] = None,
    ):
        self.module = module
        self._deg = deg
        self.ambient_sub = (
            ambient_sub if ambient_sub is not None else module.full_subgroup()
        )
        self._lattice = lattice
        self.perp = perp
        self.generic_type = generic_type
        self.special_type = special_type

    @property
    def ht_ambient(self) -> int:
        return self.ambient_sub.ht

    def deg(self, B: Subgroup) -> Q:
        if isinstance(self._deg, dict):
            return self._deg[B.key()]
        return Q(self._deg(B))

    def lattice(self) -> list[Subgroup]:
        if self._lattice is None:
            if self.ambient_sub != self.module.full_subgroup():
                raise DomainError("sub-ambient models need an explicit lattice")
            self._lattice = self.module.all_submodules()
        return self._lattice

    def slope(self, B: Subgroup) -> Q:
        if B.ht == 0:
            raise DomainError("slope of the zero subgroup is undefined")
        return self.deg(B) / B.ht

    def quotient_slope(self, small: Subgroup, big: Subgroup) -> Q:
        if big.ht == small.ht:
            raise DomainError("slope of a trivial quotient is undefined")
        return (self.deg(big) - self.deg(small)) / (big.ht - small.ht)

    def freeze(self) -> "FlatGroupModel":
        """Snapshot the degree function into a table over the lattice."""
        table = {B.key(): self.deg(B) for B in self.lattice()}
        return FlatGroupModel(
            self.module,
            table,
            ambient_sub=self.ambient_sub,
            lattice=self._lattice,
            perp=self.perp,
            generic_type=self.generic_type,
            special_type=self.special_type,
        )


def slope(model: FlatGroupModel, B: Subgroup) -> Q:
    return model.slope(B)


def validate(model: FlatGroupModel, check_submodular: bool = False):
    """Exhaustive axiom check; returns (ok, violations), never raises.

    ``check_submodular`` adds the optional (not paper-stated) inequality
    deg(B+C) + deg(B∧C) >= deg(B) + deg(C); it is off by default.
    """
    v: list[str] = []
    subs = model.lattice()
    m = model.module
    degs = {B.key(): model.deg(B) for B in subs}
    zero = m.zero_subgroup()
    if degs.get(zero.key(), 0) != 0:
        v.append("deg(0) != 0")
    by_ht = sorted(subs, key=lambda B: (B.ht, B.rows))
    for i, B1 in enumerate(by_ht):
        d1 = degs[B1.key()]
        if d1 < 0:
            v.append(f"deg < 0 at ht {B1.ht}")
        for B2 in by_ht[i + 1 :]:
            if B2.ht == B1.ht or not B1 <= B2:
                continue
            gap = degs[B2.key()] - d1
            if gap < 0:
                v.append(f"deg decreases along pair ht {B1.ht} <= {B2.ht}")
            elif gap > B2.ht - B1.ht:
                v.append(f"subquotient slope > 1 at pair ht {B1.ht} <= {B2.ht}")
    nonzero = [B for B in subs if B.ht > 0]
    if nonzero:
        mu = max(degs[B.key()] / B.ht for B in nonzero)
        maxers = [B for B in nonzero if degs[B.key()] / B.ht == mu]
        for i, B1 in enumerate(maxers):
            for B2 in maxers[i + 1 :]:
                j = m.sum_(B1, B2)
                if j.key() not in degs or degs[j.key()] / j.ht != mu:
                    v.append("max-slope subgroups not join-closed")
                    break
    if model.perp is not None:
        htA = model.ht_ambient
        degA = degs[model.ambient_sub.key()]
        for B in subs:
            Bp = model.perp(B)
            if Bp.ht != htA - B.ht:
                v.append(f"perp height wrong at ht {B.ht}")
                continue
            if degs[Bp.key()] != (htA - degA) - (B.ht - degs[B.key()]):
                v.append(f"perp degree identity fails at ht {B.ht}")
            if model.perp(Bp) != B:
                v.append("perp is not an involution")
        for i, B1 in enumerate(by_ht):
            for B2 in by_ht[i + 1 :]:
                if B1 <= B2 and not model.perp(B2) <= model.perp(B1):
                    v.append("perp is not order-reversing")
    if check_submodular:
        for i, B1 in enumerate(subs):
            for B2 in subs[i + 1 :]:
                s = m.sum_(B1, B2)
                t = m.intersect(B1, B2)
                if degs[s.key()] + degs[t.key()] < degs[B1.key()] + degs[B2.key()]:
                    v.append("submodularity fails")
    return (not v, v)


def mu_max(model: FlatGroupModel) -> Q:
    nonzero = [B for B in model.lattice() if B.ht > 0]
    if not nonzero:
        raise DomainError("zero ambient has no slopes")
    return max(model.slope(B) for B in nonzero)


def first_scran(model: FlatGroupModel) -> Subgroup:
    """Maximal subgroup achieving the maximal slope (slope, then height)."""
    nonzero = [B for B in model.lattice() if B.ht > 0]
    if not nonzero:
        raise DomainError("zero ambient has no scran")
    mu = max(model.slope(B) for B in nonzero)
    maxers = [B for B in nonzero if model.slope(B) == mu]
    top_ht = max(B.ht for B in maxers)
    tops = [B for B in maxers if B.ht == top_ht]
    if len(tops) != 1:
        raise NotGroupLike("no unique maximal max-slope subgroup")
    top = tops[0]
    for B in maxers:
        if not B <= top:
            raise NotGroupLike("max-slope subgroups not join-closed")
    return top


def hn_filtration(model: FlatGroupModel) -> list[Subgroup]:
    """0 = G_0 < G_1 < ... < G_r = ambient, greedy by maximal slope."""
    m = model.module
    subs = model.lattice()
    top = model.ambient_sub
    if top.ht == 0:
        raise DomainError("ambient is the zero group")
    chain = [m.zero_subgroup()]
    while chain[-1] != top:
        base = chain[-1]
        over = [B for B in subs if B.ht > base.ht and base <= B]
        mu = max(model.quotient_slope(base, B) for B in over)
        maxers = [B for B in over if model.quotient_slope(base, B) == mu]
        top_ht = max(B.ht for B in maxers)
        tops = [B for B in maxers if B.ht == top_ht]
        if len(tops) != 1 or any(not B <= tops[0] for B in maxers):
            raise NotGroupLike("quotient max-slope subgroups not join-closed")
        chain.append(tops[0])
    return chain


def hn_polygon(model: FlatGroupModel) -> ConcavePolygon:
    chain = hn_filtration(model)
    return ConcavePolygon([(B.ht, model.deg(B)) for B in chain])


def hn_slopes(model: FlatGroupModel) -> list[Q]:
    chain = hn_filtration(model)
    return [model.quotient_slope(a, b) for a, b in zip(chain, chain[1:])]


def is_semistable(model: FlatGroupModel) -> bool:
    return len(hn_filtration(model)) == 2


def mu_min(model: FlatGroupModel) -> Q:
    chain = hn_filtration(model)
    return model.quotient_slope(chain[-2], chain[-1])


def dieudonne_type_check(model: FlatGroupModel) -> bool:
    """Semi-stable models must have equal generic and special type."""
    if model.generic_type is None or model.special_type is None:
        raise DomainError("model carries no type annotations")
    if not is_semistable(model):
        return True
    return tuple(model.generic_type) == tuple(model.special_type)


def duality_pairing(module: Module) -> Pairing:
    """A perfect duality on ⊕ R/p^{m_i}: Gram diag(p^{amax - m_i})."""
    amax = max(module.exps)
    R = module.ring
    gram = [
        [R.ppow(amax - module.exps[i]) if i == j else R.zero
         for j in range(module.rank)]
        for i in range(module.rank)
    ]
    return Pairing(module, gram, amax, sesquilinear=False)


def dualize(model: FlatGroupModel) -> FlatGroupModel:
    """Cartier-dual model: poset reversed through a perfect duality."""
    m = model.module
    if model.ambient_sub != m.full_subgroup():
        raise DomainError("dualize expects a full-ambient model")
    duality = duality_pairing(m)
    htA = model.ht_ambient
    degA = model.deg(m.full_subgroup())

    def ddeg(B: Subgroup) -> Q:
        ann = duality.perp(B)
        return (htA - ann.ht) - (degA - model.deg(ann))

    dual_perp = None
    if model.perp is not None:
        base_perp = model.perp

        def dual_perp(B: Subgroup) -> Subgroup:
            return duality.perp(base_perp(duality.perp(B)))

    return FlatGroupModel(
        m,
        ddeg,
        lattice=model._lattice,
        perp=dual_perp,
        generic_type=model.special_type,
        special_type=model.generic_type,
    )


# ---------------------------------------------------------------------------
# towers


def torsion_lattice(module: Module, k: int) -> list[Subgroup]:
    """All submodules of A[p^k], in ambient coordinates."""
    R = module.ring
    abstract = Module(R, tuple(min(e, k) for e in module.exps))
    shifts = [max(0, e - k) for e in module.exps]
    out = []
    for S in abstract.all_submodules():
        rows = [
            tuple(
                R.mul(x, R.ppow(sh)) if sh else x
                for x, sh in zip(v, shifts)
            )
            for v in S.rows
        ]
        out.append(module.howell(rows))
    return sorted(set(out), key=lambda s: (s.ht, s.rows))


class PDivTower:
    """Torsion tower of a p-divisible group model.

    ``deg`` is intrinsic on submodules of the depth-K_max ambient
    (constant exponents); level-k models are the p^k-torsion sublattices.
    """

    def __init__(
        self,
        module: Module,
        d: int,
        deg: Callable[[Subgroup], Q] | dict,
        basic: bool = False,
        unitary: bool = False,
        perp_factory: Optional[Callable[[int], Callable]] = None,
        pair_value: Optional[Callable] = None,
        label: str = "",
    ):
        if any(e != module.exps[0] for e in module.exps):
            raise DomainError("tower ambient must have constant exponents")
        self.module = module
        self.h = module.ring.deg * module.rank
        self.d = d
        self.K_max = module.exps[0]
        self.p = module.ring.p
        self._deg = deg
        self.basic = basic
        self.unitary = unitary
        self.perp_factory = perp_factory
        self.pair_value = pair_value
        self.label = label
        self._levels: dict[int, FlatGroupModel] = {}
        self._deg_memo: dict = {}
        if unitary and (self.h % 2 or self.d * 2 != self.h):
            raise DomainError("unitary towers need h = 2n, d = n")

    def deg(self, B: Subgroup) -> Q:
        if isinstance(self._deg, dict):
            return self._deg[B.key()]
        memo = self._deg_memo
        key = B.key()
        if key not in memo:
            memo[key] = Q(self._deg(B))
        return memo[key]

    def mu(self) -> Q:
        return Q(self.d, self.h)

    def level_perp(self, k: int):
        if self.perp_factory is None:
            return None
        return self.perp_factory(k)

    def level_model(self, k: int) -> FlatGroupModel:
        if not 1 <= k <= self.K_max:
            raise DepthExhausted(
                f"level {k} beyond tower depth {self.K_max}"
            )
        if k not in self._levels:
            tors = self.module.torsion(k)
            latt = torsion_lattice(self.module, k)
            self._levels[k] = FlatGroupModel(
                self.module,
                lambda B: self.deg(B),
                ambient_sub=tors,
                lattice=latt,
                perp=self.level_perp(k),
            )
        return self._levels[k]

    def level_full(self, k: int) -> Subgroup:
        return self.module.torsion(k)

    def validate_level(self, k: int):
        ok, v = validate(self.level_model(k))
        if self.deg(self.level_full(k)) != k * self.d:
            ok = False
            v = v + [f"deg(H[p^{k}]) != {k}*d"]
        return ok, v

    def validate_all(self):
        problems = []
        for k in range(1, self.K_max + 1):
            ok, v = self.validate_level(k)
            if not ok:
                problems += [f"level {k}: {msg}" for msg in v]
        return (not problems, problems)


def tower_mu_max(tower: PDivTower) -> Q:
    mus = {mu_max(tower.level_model(k)) for k in range(1, tower.K_max + 1)}
    if len(mus) != 1:
        raise NotGroupLike("mu_max varies across tower levels")
    return mus.pop()


def scran_tube_step(tower: PDivTower, prev: Subgroup, k: int) -> Subgroup:
    """The level-k first scran, searched inside [prev, p^-1 prev].

    Sound for valid models by the torsion laws: the level-k scran G_k is
    semistable of the maximal slope, so p G_k (same slope) sits inside
    G_(k-1) and G_k contains G_(k-1); hence G_k lies in the tube.  The
    equality with the full-lattice search is exercised on small levels by
    the test suite.
    """
    m = tower.module
    top = m.preimage_p(prev, 1)
    pres = QuotientPresentation(top, prev)
    cands = [pres.lift_subgroup(S) for S in pres.module.all_submodules()]
    best_mu = None
    maxers = []
    for B in cands:
        if B.ht == 0:
            continue
        mu = tower.deg(B) / B.ht
        if best_mu is None or mu > best_mu:
            best_mu = mu
            maxers = [B]
        elif mu == best_mu:
            maxers.append(B)
    top_ht = max(B.ht for B in maxers)
    tops = [B for B in maxers if B.ht == top_ht]
    if len(tops) != 1 or any(not B <= tops[0] for B in maxers):
        raise NotGroupLike("tube scran search found no unique maximal member")
    return tops[0]


def first_scran_tower(tower: PDivTower):
    """Stabilized first scran Phi_H.

    Returns (Phi, k0, semistable_flag); for semi-stable towers Phi is the
    deepest full level and k0 = 0.  Raises DepthExhausted when stabilization
    cannot be certified within the depth, NotGroupLike when the scrans
    violate the torsion-compatibility law G_j = G_i[p^j].
    """
    if is_semistable(tower.level_model(1)):
        return tower.level_full(tower.K_max), 0, True
    if tower.K_max < 2:
        raise DepthExhausted(
            "depth 1 cannot certify scran stabilization", partial=None
        )
    scrans = {1: first_scran(tower.level_model(1))}
    for k in range(2, tower.K_max + 1):
        scrans[k] = scran_tube_step(tower, scrans[k - 1], k)
        cut = tower.module.intersect(scrans[k], tower.module.torsion(k - 1))
        if cut != scrans[k - 1]:
            raise NotGroupLike(f"scrans violate G_j = G_(j+1)[p^j] at j={k-1}")
        if scrans[k] == scrans[k - 1]:
            return scrans[k], k - 1, False
    raise DepthExhausted(
        f"first scran not stabilized within depth {tower.K_max}",
        partial=scrans,
    )


def hn_polygon_limit(tower: PDivTower):
    """Deepest normalized level polygon plus convergence diagnostics.

    Asserts the normalized level polygons are pointwise nonincreasing in
    the level (NotGroupLike otherwise).
    """
    polys = []
    for m in range(1, tower.K_max + 1):
        polys.append(normalize(hn_polygon(tower.level_model(m)), m))
    gaps = []
    for P1, P2 in zip(polys, polys[1:]):
        if not leq(P2, P1):
            raise NotGroupLike("normalized HN polygons are not decreasing")
        xs = sorted({x for x, _ in P1.breaks} | {x for x, _ in P2.breaks})
        gaps.append(max(P1(x) - P2(x) for x in xs))
    diag = {
        "levels": len(polys),
        "gaps": gaps,
        "converged": (len(polys) == 1) or (gaps and gaps[-1] == 0),
    }
    return polys[-1], diag


def check_hn_newton(tower: PDivTower, newton: ConcavePolygon) -> bool:
    limit, _ = hn_polygon_limit(tower)
    if limit.width != newton.width:
        raise DomainError("newton polygon width mismatch")
    return leq(limit, newton)
