"""Quotient-by-first-scran iteration on towers and its polarized variant.

``run_algorithm`` repeatedly quotients a basic tower by its stabilized
first scran until the level-1 model is semistable or the depth runs out;
``run_pel`` post-processes the total kernel with the orthogonal chain,
the slope-1/2 filtration ("claim loop") and, when needed, a Lagrangian
lift in the hermitian residue space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as Q
from typing import Optional

from .errors import DepthExhausted, DomainError, NotGroupLike, StateError
from .hncore import (
    FlatGroupModel,
    PDivTower,
    first_scran_tower,
    hn_filtration,
    is_semistable,
    mu_max,
    torsion_lattice,
)
from .pgroup import Module, QuotientPresentation, Subgroup


def quotient_tower(tower: PDivTower, W: Subgroup):
    """The tower H/W, depth-shifted; returns (tower', presentation)."""
    kq = tower.K_max - W.exponent
    if kq < 1:
        raise DepthExhausted(
            f"no depth left after quotient by an exponent-{W.exponent} kernel"
        )
    num = tower.module.preimage_p(W, kq)
    pres = QuotientPresentation(num, W)
    qmod = pres.module
    if qmod.exps != (kq,) * qmod.rank or qmod.rank * qmod.ring.deg != tower.h:
        raise NotGroupLike(
            f"quotient by W is not an honest torsion tower (type {qmod.exps})"
        )
    degW = tower.deg(W)

    def qdeg(S: Subgroup) -> Q:
        return tower.deg(pres.lift_subgroup(S)) - degW

    qt = PDivTower(
        qmod,
        tower.d,
        qdeg,
        basic=tower.basic,
        label=f"{tower.label}/W(ht={W.ht})",
    )
    return qt, pres


@dataclass
class AlgorithmTrace:
    tower: PDivTower
    status: str  # "semi-stable" | "depth-exhausted"
    kernel_chain: list = field(default_factory=list)  # E_1 < ... < E_r, base coords
    slopes: list = field(default_factory=list)  # mu_i = mu(ker phi_i)
    mu_max_seq: list = field(default_factory=list)
    stages: int = 0
    remaining_depth: int = 0

    @property
    def total_kernel_sub(self) -> Subgroup:
        if self.kernel_chain:
            return self.kernel_chain[-1]
        return self.tower.module.zero_subgroup()

    @property
    def N(self) -> int:
        return self.total_kernel_sub.exponent


def run_algorithm(tower: PDivTower) -> AlgorithmTrace:
    """Iterate H -> H/Phi_H until semistable or out of depth."""
    if not tower.basic:
        raise DomainError("the quotient iteration is only run on basic towers")
    trace = AlgorithmTrace(tower=tower, status="running")
    current = tower
    lifts: list[QuotientPresentation] = []

    def to_base(B: Subgroup) -> Subgroup:
        for pres in reversed(lifts):
            B = pres.lift_subgroup(B)
        return B

    while True:
        trace.mu_max_seq.append(mu_max(current.level_model(1)))
        if is_semistable(current.level_model(1)):
            trace.status = "semi-stable"
            trace.remaining_depth = current.K_max
            break
        try:
            phi, k0, ss = first_scran_tower(current)
        except DepthExhausted:
            trace.status = "depth-exhausted"
            trace.remaining_depth = current.K_max
            break
        mu_phi = current.deg(phi) / phi.ht
        trace.slopes.append(mu_phi)
        trace.kernel_chain.append(to_base(phi))
        trace.stages += 1
        try:
            current, pres = quotient_tower(current, phi)
        except DepthExhausted:
            trace.status = "depth-exhausted"
            trace.remaining_depth = 0
            break
        lifts.append(pres)
    # invariants of the finished trace
    mu = tower.mu()
    for s1, s2 in zip(trace.slopes, trace.slopes[1:]):
        if not s1 > s2:
            raise NotGroupLike("kernel slopes fail strict decrease")
    if trace.status == "semi-stable" and any(s <= mu for s in trace.slopes):
        raise NotGroupLike("kernel slope fails mu_i > d/h")
    for m1, m2 in zip(trace.mu_max_seq, trace.mu_max_seq[1:]):
        if not m2 < m1:
            raise NotGroupLike("mu_max fails strict decrease across stages")
    return trace


def total_kernel(trace: AlgorithmTrace):
    """(E, N) for a terminated trace; asserts E is an HN scran of H[p^N]
    whose subquotient slopes reread the kernel slopes."""
    if trace.status != "semi-stable":
        raise StateError("total kernel needs a terminated (semi-stable) trace")
    E = trace.total_kernel_sub
    if E.ht == 0:
        return E, 0
    N = E.exponent
    tower = trace.tower
    levelN = tower.level_model(N)
    chain = hn_filtration(levelN)
    if E not in chain:
        raise NotGroupLike("total kernel is not an HN scran of H[p^N]")
    sub = FlatGroupModel(
        tower.module,
        lambda B: tower.deg(B),
        ambient_sub=E,
        lattice=[B for B in levelN.lattice() if B <= E],
    )
    echain = hn_filtration(sub)
    if echain != [tower.module.zero_subgroup()] + trace.kernel_chain:
        raise NotGroupLike("HN filtration of E does not match the kernel chain")
    slopes = [
        sub.quotient_slope(a, b) for a, b in zip(echain, echain[1:])
    ]
    if slopes != trace.slopes:
        raise NotGroupLike("HN slopes of E do not reread the kernel slopes")
    return E, N


@dataclass
class PredicateResult:
    value: Optional[bool]
    reason: str

    def __bool__(self):
        if self.value is None:
            raise StateError(f"indeterminate predicate: {self.reason}")
        return self.value


def in_C(tower: PDivTower) -> PredicateResult:
    """Terminates semistable with N <= 1 (the N=0 convention for M^ss)."""
    try:
        trace = run_algorithm(tower)
    except DepthExhausted as ex:
        return PredicateResult(None, f"depth exhausted: {ex}")
    if trace.status != "semi-stable":
        return PredicateResult(
            None, f"not terminated within depth (mu_max={trace.mu_max_seq})"
        )
    E, N = total_kernel(trace)
    return PredicateResult(N <= 1, f"N={N}")


def in_hecke_orbit_C(tower: PDivTower) -> PredicateResult:
    try:
        trace = run_algorithm(tower)
    except DepthExhausted as ex:
        return PredicateResult(None, f"depth exhausted: {ex}")
    if trace.status != "semi-stable":
        return PredicateResult(None, "not terminated within depth")
    return PredicateResult(
        True, f"terminated in {trace.stages} stages (depth caveat applies)"
    )


def kernel_containment_check(tower: PDivTower, G: Subgroup) -> bool:
    """Given H/G well-formed and semistable, assert ker(phi) <= G."""
    qt, _ = quotient_tower(tower, G)
    if not is_semistable(qt.level_model(1)):
        raise DomainError("H/G is not semistable; the lemma does not apply")
    trace = run_algorithm(tower)
    if trace.status != "semi-stable":
        raise DepthExhausted("algorithm did not terminate within depth")
    E = trace.total_kernel_sub
    return E <= G


# ---------------------------------------------------------------------------
# the polarized (PEL) variant


@dataclass
class PelTrace:
    trace: AlgorithmTrace
    N_used: int
    kernel_chain: list
    perp_chain: list
    orth_slope_pairs: list  # (mu_i, mu(E_{i-1}^perp / E_i^perp))
    case: str  # "E=E_perp" | "E_prime=E_prime_perp" | "lagrangian"
    claim_iterations: int = 0
    E_prime: Optional[Subgroup] = None
    E_dprime: Optional[Subgroup] = None
    residue_dim: int = 0


def _c_exponent(module: Module, bot: Subgroup, top: Subgroup) -> int:
    """Minimal t with p^t * top <= bot."""
    t = 0
    cur = top
    while not cur <= bot:
        cur = module.scale(cur, 1)
        cur = module.sum_(cur, bot)
        t += 1
        if t > module.ring.K:
            raise NotGroupLike("quotient exponent exceeds the ring precision")
    return t


def run_pel(tower: PDivTower) -> PelTrace:
    if not tower.unitary:
        raise DomainError("run_pel needs the unitary flag (h = 2n, d = n)")
    if tower.perp_factory is None:
        raise DomainError("run_pel needs perp data at every level")
    trace = run_algorithm(tower)
    if trace.status != "semi-stable":
        raise DepthExhausted("algorithm did not terminate within depth")
    module = tower.module
    E, N = total_kernel(trace)
    if E.ht == 0:
        return PelTrace(
            trace,
            N_used=0,
            kernel_chain=[],
            perp_chain=[],
            orth_slope_pairs=[],
            case="E=E_perp",
        )
    if N % 2 == 1:
        if N + 1 > tower.K_max:
            raise DepthExhausted(
                "PEL adjustment needs level N+1 beyond the tower depth"
            )
        N_used = N + 1
    else:
        N_used = N
    perp = tower.level_perp(N_used)
    chain = [module.zero_subgroup()] + trace.kernel_chain
    perp_chain = [perp(Ei) for Ei in chain]
    pairs = []
    for i in range(1, len(chain)):
        mu_i = trace.slopes[i - 1]
        num = tower.deg(perp_chain[i - 1]) - tower.deg(perp_chain[i])
        den = perp_chain[i - 1].ht - perp_chain[i].ht
        pairs.append((mu_i, num / den))
    Eperp = perp_chain[-1]
    if not E <= Eperp:
        raise NotGroupLike("total kernel is not isotropic")
    if E == Eperp:
        return PelTrace(
            trace,
            N_used=N_used,
            kernel_chain=chain[1:],
            perp_chain=perp_chain,
            orth_slope_pairs=pairs,
            case="E=E_perp",
        )
    # claim loop on C = Eperp/E, via preimages bot <= top
    bot, top = E, Eperp
    iters = 0
    htC = Eperp.ht - E.ht
    while True:
        m = _c_exponent(module, bot, top)
        if m <= 1:
            break
        iters += 1
        if iters > htC:
            raise NotGroupLike("claim loop failed to terminate within ht(C)")
        pm1C = module.sum_(module.scale(top, m - 1), bot)
        Cpm1 = module.intersect(module.preimage_p(bot, m - 1), top)
        # the claim's identity (p^(m-1) C)^perp = C[p^(m-1)] inside C
        perp_in_C = module.intersect(perp(pm1C), top)
        if perp_in_C != Cpm1:
            raise NotGroupLike("(p^(m-1)C)^perp != C[p^(m-1)] inside C")
        bot, top = pm1C, Cpm1
    E_prime = bot
    Ep_perp = perp(E_prime)
    if E_prime == Ep_perp:
        return PelTrace(
            trace,
            N_used=N_used,
            kernel_chain=chain[1:],
            perp_chain=perp_chain,
            orth_slope_pairs=pairs,
            case="E_prime=E_prime_perp",
            claim_iterations=iters,
            E_prime=E_prime,
        )
    # Lagrangian lift in the residue hermitian space V = E'perp / E'
    from .hermitian import lagrangian_in_quotient

    E_dprime, dim = lagrangian_in_quotient(tower, E_prime, Ep_perp, N_used)
    if perp(E_dprime) != E_dprime:
        raise NotGroupLike("lifted Lagrangian is not self-orthogonal")
    return PelTrace(
        trace,
        N_used=N_used,
        kernel_chain=chain[1:],
        perp_chain=perp_chain,
        orth_slope_pairs=pairs,
        case="lagrangian",
        claim_iterations=iters,
        E_prime=E_prime,
        E_dprime=E_dprime,
        residue_dim=dim,
    )
