"""Cartan combinatorics, the cell-index set with its metric and actions,
and desk-scale fixed-point counting.

Indices [T, g'] are stored in a canonical normal form [x, s, t, y]: the
central rescaling is normalized away by making the general-linear-side
lattice primitive, then t is reduced into [0,1) (odd n) or [0,2) (even n)
with the opposite shift absorbed by s.  All distances are SQUARED exact
rationals; no square root is ever taken.

The general-linear side carries the identity hermitian Gram (the
quasi-split form); the J side carries the building Gram from
``building_space`` (non-split for even n).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Q
from itertools import product as iproduct
from typing import Optional

from .building import (
    BuildingBall,
    Vertex,
    apply_matrix,
    base_vertex,
    building_space,
    graph_distance,
)
from .errors import DomainError, Exceeds, PrecisionError
from .gmatrix import (
    in_integral_group,
    mat_conj_transpose,
    mat_identity,
    mat_inverse,
    mat_mul,
    mat_normalize,
    similitude,
    vp_det,
)
from .hermitian import HermitianSpace, PadicLattice, _lattices_between
from .ring import Zq


# ---------------------------------------------------------------------------
# coweight combinatorics


def cross_sums_constant(w) -> bool:
    n = len(w)
    target = w[0] + w[n - 1]
    return all(w[i] + w[n - 1 - i] == target for i in range(n))


def is_dominant(w) -> bool:
    return all(a >= b for a, b in zip(w, w[1:]))


def enumerate_dominant(n: int, bound: int) -> list[tuple]:
    """Dominant coweights with |a_i| <= bound and constant cross-sums."""
    if bound < 0:
        raise DomainError("bound must be >= 0")
    out = []

    def rec(prefix):
        if len(prefix) == n:
            if cross_sums_constant(prefix):
                out.append(tuple(prefix))
            return
        hi = prefix[-1] if prefix else bound
        for a in range(hi, -bound - 1, -1):
            rec(prefix + [a])

    rec([])
    return sorted(out)


def vpc(w) -> int:
    """Similitude valuation of the coweight: a_1 + a_n."""
    if not cross_sums_constant(w):
        raise DomainError("coweight fails the cross-sum constraint")
    return w[0] + w[-1]


def kappa(ht_rho: int, n: int) -> int:
    """-ht(rho)/n with the component-parity constraint enforced."""
    if ht_rho % n:
        raise DomainError("height must be divisible by n")
    val = -ht_rho // n
    if n % 2 == 1 and val % 2:
        raise DomainError("odd n pins the image to 2Z")
    return val


# ---------------------------------------------------------------------------
# context and indices


def identity_gram_of(ring: Zq, n: int):
    return tuple(
        tuple(ring.one if i == j else ring.zero for j in range(n))
        for i in range(n)
    )


class CellContext:
    """Shared data: both hermitian spaces, base points, and the K level
    (0 = hyperspecial, m >= 1 = principal congruence mod p^m)."""

    def __init__(self, n: int, p: int, precision: int = 12, level: int = 0):
        if level < 0:
            raise DomainError("congruence level must be >= 0")
        self.n = n
        self.p = p
        self.level = level
        self.ring = Zq(p, precision, 2)
        self.g_space = HermitianSpace(self.ring, identity_gram_of(self.ring, n))
        self.j_space = building_space(n, p, precision)
        self.base_lattice = self.g_space.standard_lattice()
        self.base_y = base_vertex(self.j_space)
        self.t_modulus = 1 if n % 2 else 2

    def g_element(self, rows, scale=0):
        a = mat_normalize(self.ring, (tuple(tuple(
            self.ring.from_int(x) if isinstance(x, int) else x for x in r
        ) for r in rows), scale))
        similitude(self.ring, self.g_space.gram, a)
        return a

    def j_element(self, rows, scale=0):
        a = mat_normalize(self.ring, (tuple(tuple(
            self.ring.from_int(x) if isinstance(x, int) else x for x in r
        ) for r in rows), scale))
        similitude(self.ring, self.j_space.gram, a)
        return a

    def x_lattice(self, gmat) -> PadicLattice:
        rows, s = gmat
        return PadicLattice(self.g_space, rows, s)

    def identity_index(self) -> "CellIndex":
        return CellIndex(
            self, mat_identity(self.ring, self.n), Q(0), Q(0), self.base_y
        )


def scaled_vertex(v: Vertex, e: int) -> Vertex:
    """p^e v with the component index shifted by 2e."""
    return Vertex(v.L.rescale(e), v.i + 2 * e)


class CellIndex:
    """[x K, s, t, y] in canonical normal form."""

    __slots__ = ("ctx", "xmat", "s", "t", "y", "_xlat")

    def __init__(self, ctx: CellContext, xmat, s, t, y: Vertex):
        self.ctx = ctx
        R = ctx.ring
        s, t = Q(s), Q(t)
        # central normalization: make the x-lattice primitive via z = p^-mu
        rows, sc = xmat
        vmin = min(R.val(x) for r in rows for x in r if not R.is_zero(x))
        mu = vmin - sc
        if mu != 0:
            rows = tuple(tuple(R.mul(R.ppow(0), x) for x in r) for r in rows)
            xmat = mat_normalize(R, (rows, sc + mu))
            s -= 2 * mu
            t += 2 * mu
            y = scaled_vertex(y, mu)
        else:
            xmat = mat_normalize(R, xmat)
        # reduce t into its normal range, shifting s oppositely
        m = ctx.t_modulus
        shift = (t // m) * m
        self.s = s + shift
        self.t = t - shift
        self.xmat = xmat
        self.y = y
        self._xlat = None

    @property
    def x_lattice(self) -> PadicLattice:
        if self._xlat is None:
            self._xlat = self.ctx.x_lattice(self.xmat)
        return self._xlat

    def key(self):
        return (self.x_lattice.key(), self.s, self.t, self.y.key())

    def __eq__(self, other):
        if not isinstance(other, CellIndex) or self.ctx is not other.ctx:
            return False
        if self.key() != other.key():
            return False
        if self.ctx.level == 0:
            return True
        R = self.ctx.ring
        quot = mat_mul(R, mat_inverse(R, self.xmat), other.xmat)
        return in_integral_group(
            R, self.ctx.g_space.gram, quot, congruence_level=self.ctx.level
        )

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return (
            f"CellIndex(s={self.s}, t={self.t}, x_inv="
            f"{self.ctx.base_lattice.relative_position(self.x_lattice)}, "
            f"y_t={self.y.t})"
        )


def phi(idx: CellIndex) -> int:
    """-(2/n)(v_p det T + v_p det g'), recovered as -(s + t)."""
    val = -(idx.s + idx.t)
    if val.denominator != 1:
        raise DomainError("index carries a non-integral invariant")
    val = int(val)
    if idx.ctx.n % 2 == 1 and val % 2:
        raise DomainError("odd n pins the invariant to 2Z")
    return val


@dataclass
class GammaElement:
    """gamma = (h, g): h on the general-linear side, g on the J side."""

    ctx: CellContext
    h: tuple
    g: tuple

    def __post_init__(self):
        R = self.ctx.ring
        similitude(R, self.ctx.g_space.gram, self.h)
        similitude(R, self.ctx.j_space.gram, self.g)
        self.vdet_h = vp_det(R, self.h)
        self.vdet_g = vp_det(R, self.g)

    def normalizes_K(self) -> bool:
        """h K h^-1 = K: h must stabilize the base lattice class up to a
        p-power; principal congruence subgroups are normal in G(Z_p), so
        the same criterion certifies deeper levels."""
        L = self.ctx.x_lattice(self.h)
        base = self.ctx.base_lattice
        rng = self.ctx.ring.K - 2
        return any(_safe_eq(L, base, e) for e in range(-rng, rng + 1))


def _safe_eq(L, base, e):
    try:
        return L.rescale(e) == base
    except PrecisionError:
        return False


def gamma_act(
    gamma: GammaElement, idx: CellIndex, require_normalized: bool = True
) -> CellIndex:
    """[x h, s + (2/n) v_p(det h), t + (2/n) v_p(det g), g y].

    With ``require_normalized`` the action demands h K h^-1 = K (the
    well-definedness hypothesis); displacement reports evaluate the same
    formula on canonical representatives without the guard.
    """
    ctx = idx.ctx
    if require_normalized and not gamma.normalizes_K():
        raise DomainError("h does not normalize the configured K")
    R = ctx.ring
    n = ctx.n
    xh = mat_normalize(R, mat_mul(R, idx.xmat, gamma.h))
    new_s = idx.s + Q(2 * gamma.vdet_h, n)
    new_t = idx.t + Q(2 * gamma.vdet_g, n)
    grows, gs = gamma.g
    moved = apply_matrix(idx.y.L, grows, gs)
    # {gx, gy} = c {x, y} shifts the component by v_p(c(g))
    cshift = similitude_valuation(ctx, gamma.g, side="j")
    new_y = Vertex(moved, idx.y.i + cshift)
    return CellIndex(ctx, xh, new_s, new_t, new_y)


def similitude_valuation(ctx: CellContext, a, side="g") -> int:
    gram = ctx.g_space.gram if side == "g" else ctx.j_space.gram
    _, v = similitude(ctx.ring, gram, a)
    return v


# ---------------------------------------------------------------------------
# distances (squared, exact)


def d1_squared(idx1: CellIndex, idx2: CellIndex) -> Q:
    inv = idx1.x_lattice.relative_position(idx2.x_lattice)
    mean = Q(sum(inv), len(inv))
    return sum((Q(a) - mean) ** 2 for a in inv)


def index_distance_sq(idx1: CellIndex, idx2: CellIndex, cap: int = 6) -> Q:
    """Squared quotient-metric distance; raises Exceeds past the BFS cap."""
    ctx = idx1.ctx
    if ctx is not idx2.ctx:
        raise DomainError("indices from different contexts")
    d2 = graph_distance(idx1.y, idx2.y, cap, space=ctx.j_space)
    d1 = d1_squared(idx1, idx2)
    return d1 + Q(d2) ** 2 + (idx1.s - idx2.s) ** 2 + (idx1.t - idx2.t) ** 2


def sqrt_leq_sum(A: Q, B: Q, C: Q) -> bool:
    """sqrt(A) <= sqrt(B) + sqrt(C) via exact rational squares."""
    if A <= B + C:
        return True
    return (A - B - C) ** 2 <= 4 * B * C


def quasi_isogeny_distance(L1: PadicLattice, L2: PadicLattice) -> int:
    """n (a_1 - a_n) from the relative invariant of the pair."""
    inv = L1.relative_position(L2)
    return len(inv) * (inv[0] - inv[-1])


# ---------------------------------------------------------------------------
# enumeration


def x_classes_within(ctx: CellContext, rho_sq: Q, m_cap: int = 4):
    """Primitive general-linear-side lattice classes with centered Cartan
    l^2 at most rho_sq from the base; [(lattice, v_p det)] pairs."""
    base = ctx.base_lattice
    m_use = 0
    while Q(m_use * m_use, 2) <= rho_sq:
        m_use += 1
    if m_use > m_cap:
        raise Exceeds(m_cap, "x-class enumeration radius cap")
    out = {}
    lower = base.rescale(m_use)
    for cand in _lattices_between(lower, base):
        # primitivity: not inside p * base
        R = ctx.ring
        vmin = min(
            R.val(x) - cand.scale
            for r in cand.rows
            for x in r
            if not R.is_zero(x)
        )
        if vmin != 0:
            continue
        inv = base.relative_position(cand)
        mean = Q(sum(inv), len(inv))
        if sum((Q(a) - mean) ** 2 for a in inv) > rho_sq:
            continue
        try:
            dv = cand.dual()
        except PrecisionError:
            continue
        ok = any(_safe_eq(dv, cand, e) for e in range(-2 * m_use - 2, 2 * m_use + 3))
        if not ok:
            continue
        if cand.key() not in out:
            out[cand.key()] = (cand, sum(inv))
    return sorted(out.values(), key=lambda tt: (tt[1], tt[0].key()))


def unitary_basis_element(ctx: CellContext, L: PadicLattice):
    """g in GU with g Lambda_0 = L, via hermitian Gram-Schmidt.

    Works whenever L is in the similitude orbit (dual = p^-v L); returns
    None otherwise.  Requires the identity-Gram convention for the space.
    """
    R = ctx.ring
    n = ctx.n
    gram = ctx.g_space.gram

    def basis_gram(mat):
        g1 = mat_mul(R, mat, (gram, 0))
        return mat_mul(R, g1, mat_conj_transpose(R, mat))

    cur = (L.rows, L.scale)
    G2, gs = basis_gram(cur)
    vals = [R.val(x) for row in G2 for x in row if not R.is_zero(x)]
    if not vals:
        return None
    w = min(vals)
    # target similitude: c = p^(w - 2*scale); the reduced form must be
    # unimodular for L to lie in the orbit
    H = [[None] * n for _ in range(n)]
    U = [[R.one if i == j else R.zero for j in range(n)] for i in range(n)]

    def refresh():
        mat = mat_mul(R, (tuple(tuple(r) for r in U), 0), cur)
        G3, _ = basis_gram(mat)
        return [[R.divp(x, w) if not R.is_zero(x) else R.zero for x in row]
                for row in G3]

    done: list[int] = []
    for _ in range(n):
        Hc = refresh()
        piv = None
        for i in range(n):
            if i not in done and R.val(Hc[i][i]) == 0:
                piv = i
                break
        if piv is None:
            mixed = False
            for i in range(n):
                if i in done or mixed:
                    continue
                for j in range(n):
                    if j == i or j in done:
                        continue
                    if R.val(Hc[i][j]) == 0:
                        for c in (R.one, R.make(0, 1)):
                            trial = [row[:] for row in U]
                            for k in range(n):
                                trial[i][k] = R.add(
                                    trial[i][k], R.mul(c, U[j][k])
                                )
                            Usave = U
                            for k in range(n):
                                U[i][k] = trial[i][k]
                            if R.val(refresh()[i][i]) == 0:
                                mixed = True
                                break
                            for k in range(n):
                                U[i][k] = Usave[i][k]
                        if mixed:
                            break
            Hc = refresh()
            for i in range(n):
                if i not in done and R.val(Hc[i][i]) == 0:
                    piv = i
                    break
            if piv is None:
                return None
        inv = R.unit_inv(Hc[piv][piv])
        for i in range(n):
            if i == piv or i in done:
                continue
            c = R.neg(R.mul(Hc[i][piv], inv))
            if not R.is_zero(c):
                for k in range(n):
                    U[i][k] = R.add(U[i][k], R.mul(c, U[piv][k]))
        done.append(piv)
    Hc = refresh()
    for i in range(n):
        for j in range(n):
            if i != j and not R.is_zero(Hc[i][j]):
                return None
        if R.val(Hc[i][i]) != 0:
            return None
    # normalize each diagonal unit to 1 by dividing the row by a norm root
    for i in range(n):
        u = Hc[i][i]
        x = _norm_root(R, u)
        if x is None:
            return None
        xinv = R.unit_inv(x)
        for k in range(n):
            U[i][k] = R.mul(xinv, U[i][k])
    mat = mat_mul(R, (tuple(tuple(r) for r in U), 0), cur)
    similitude(R, gram, mat)  # raises if the construction went wrong
    if PadicLattice(ctx.g_space, mat[0], mat[1]) != L:
        return None
    return mat


def norm_root(R: Zq, u):
    """x with x conj(x) = u mod p^K, or None; brute mod p + Hensel."""
    return _norm_root(R, u)


def _norm_root(R: Zq, u):
    """x with x conj(x) = u, by brute force mod p then Hensel lifting."""
    p = R.p

    def nrm(x):
        return R.make(R.norm(x), 0)

    sol = None
    for a in range(p):
        for b in range(p):
            x = R.make(a, b)
            if R.mod_ppow(R.sub(nrm(x), u), 1) == R.mod_ppow(R.zero, 1):
                sol = x
                break
        if sol:
            break
    if sol is None:
        return None
    while True:
        err = R.sub(u, nrm(sol))
        if R.is_zero(err):
            return sol
        v = R.val(err)
        target = R.divp(err, v)
        fixed = None
        for a in range(p):
            for b in range(p):
                d = R.make(a, b)
                z = R.mul(R.conj(sol), d)
                tr = R.add(z, R.conj(z))
                if R.mod_ppow(R.sub(tr, target), 1) == R.mod_ppow(R.zero, 1):
                    fixed = d
                    break
            if fixed:
                break
        if fixed is None:
            return None
        sol = R.add(sol, R.mul(R.ppow(v), fixed))


def ball_indices(
    center: CellIndex,
    rho_sq: Q,
    phi_value: Optional[int] = None,
    cap: int = 6,
) -> list[CellIndex]:
    """All indices within squared distance rho_sq of the center (same
    component family), optionally restricted to a phi-fiber."""
    ctx = center.ctx
    rho_sq = Q(rho_sq)
    if rho_sq < 0:
        raise DomainError("radius must be >= 0")
    ymax = 0
    while Q(ymax + 1) ** 2 <= rho_sq:
        ymax += 1
    if ymax > cap:
        raise Exceeds(cap, "building radius cap")
    yball = BuildingBall(center.y, ymax)
    xs = x_classes_within(ctx, rho_sq)
    out = {}
    width = 0
    while Q(width) ** 2 <= rho_sq:
        width += 1
    tgrid = [
        center.t + Q(2 * k, ctx.n)
        for k in range(-width * ctx.n, width * ctx.n + 1)
    ]
    for (L, vdet), yv, traw in iproduct(xs, yball.vertices, tgrid):
        g = unitary_basis_element(ctx, L)
        if g is None:
            continue
        s_raw = Q(2 * vdet, ctx.n)
        idx = CellIndex(ctx, g, s_raw, traw, yv)
        if phi_value is not None and phi(idx) != phi_value:
            continue
        try:
            if index_distance_sq(center, idx, cap) <= rho_sq:
                out.setdefault(idx.key(), idx)
        except Exceeds:
            continue
    return [out[k] for k in sorted(out, key=repr)]


def locally_finite_certificate(sample, c: Q, cap: int = 6) -> dict:
    """Per-index count of sample members within squared distance c^2."""
    c = Q(c)
    per = {}
    for idx in sample:
        close = 0
        for other in sample:
            try:
                if index_distance_sq(idx, other, cap) <= c * c:
                    close += 1
            except Exceeds:
                continue
        per[idx.key()] = close
    return {
        "per_index": per,
        "max_neighbors": max(per.values()) if per else 0,
        "c": c,
    }


def displacement_growth_check(
    gamma: GammaElement, center: CellIndex, radii, cap: int = 6
) -> list:
    """(radius, min displacement^2 on the shell, shell size) per radius."""
    radii = sorted(Q(r) for r in radii)
    pool = ball_indices(center, radii[-1] ** 2, cap=cap)
    dists = {idx.key(): index_distance_sq(center, idx, cap) for idx in pool}
    out = []
    prev = Q(-1)
    for r in radii:
        shell = [
            idx
            for idx in pool
            if (prev < 0 or dists[idx.key()] > prev * prev)
            and dists[idx.key()] <= r * r
        ]
        disps = [
            index_distance_sq(
                idx, gamma_act(gamma, idx, require_normalized=False), cap
            )
            for idx in shell
        ]
        out.append((r, min(disps) if disps else None, len(shell)))
        prev = r
    return out


# ---------------------------------------------------------------------------
# fixed-point counting


def fixed_point_count(ctx: CellContext, h_rep, h, radius: int):
    """#{h' in G(Q_p)/p^Z K : h'^-1 h_rep h' in h^-1 p^Z K} with the
    Cartan spread of h' bounded by `radius`; returns (count, stabilized)."""
    counts = []
    for rad in (max(radius - 1, 0), radius):
        counts.append(_fixcount_at(ctx, h_rep, h, rad))
    return counts[-1], counts[0] == counts[-1]


def _fixcount_at(ctx: CellContext, h_rep, h, radius: int) -> int:
    R = ctx.ring
    reps = _coset_reps_modp(ctx, radius)
    cnt = 0
    for g in reps:
        gi = mat_inverse(R, g)
        cur = mat_mul(R, mat_mul(R, gi, h_rep), g)
        test = mat_mul(R, h, cur)
        if _in_pZK(ctx, test, ctx.level):
            cnt += 1
    return cnt


def _in_pZK(ctx: CellContext, a, level: int) -> bool:
    R = ctx.ring
    rows, s = mat_normalize(R, a)
    v = min((R.val(x) for r in rows for x in r if not R.is_zero(x)), default=0)
    if v > 0:
        rows = tuple(tuple(R.divp(x, v) for x in r) for r in rows)
    return in_integral_group(R, ctx.g_space.gram, (rows, 0), level)


def _coset_reps_modp(ctx: CellContext, radius: int):
    """Matrix representatives of the p^Z K-classes with bounded Cartan."""
    R = ctx.ring
    base = ctx.base_lattice
    reps = []
    seen = set()
    for cand in _lattices_between(base.rescale(radius), base):
        vmin = min(
            R.val(x) - cand.scale
            for r in cand.rows
            for x in r
            if not R.is_zero(x)
        )
        if vmin != 0:
            continue  # one primitive representative per p^Z-class
        try:
            dv = cand.dual()
        except PrecisionError:
            continue
        if not any(
            _safe_eq(dv, cand, e)
            for e in range(-2 * radius - 2, 2 * radius + 3)
        ):
            continue
        if cand.key() in seen:
            continue
        seen.add(cand.key())
        g = unitary_basis_element(ctx, cand)
        if g is not None:
            reps.append(g)
    if ctx.level:
        out = []
        for g in reps:
            for k in _integral_coset_reps(ctx):
                out.append(mat_mul(R, g, k))
        return out
    return reps


def _integral_coset_reps(ctx: CellContext):
    """K/K_m representatives; supported for n <= 2, m = 1."""
    R = ctx.ring
    n = ctx.n
    if n > 2 or ctx.level != 1:
        raise Exceeds(ctx.level, "coset enumeration supported for n <= 2, m = 1")
    reps = []
    residues = [(a, b) for a in range(ctx.p) for b in range(ctx.p)]
    for entries in iproduct(residues, repeat=n * n):
        rows = tuple(
            tuple(R.make(e[0], e[1]) for e in entries[i * n:(i + 1) * n])
            for i in range(n)
        )
        if in_integral_group(R, ctx.g_space.gram, (rows, 0)):
            reps.append((rows, 0))
    return reps
