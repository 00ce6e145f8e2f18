"""Hermitian lattices over the truncated quadratic extension.

``PadicLattice`` is a full-rank Z_{p^2}-lattice in the fraction space of
R^n, stored as (canonical integral rows, p-power scale) at a working
precision; operations raise PrecisionError instead of silently truncating.
``ResidueHermitianSpace`` covers the finite-field side: isotropic vectors
and Lagrangians over F_{p^2}.  The standard basic isocrystal sits at the
end, in graded coordinates.

Conventions: {x, y} = sum_i sum_j x_i G_ij conj(y_j) with G
conjugate-symmetric; delta = u (the fixed skew unit); the graded isocrystal
has F(x0, x1) = (p sigma(x1), sigma(x0)), so F^2 = p and F = V.
"""

from __future__ import annotations

from typing import Optional

from .errors import DomainError, PrecisionError
from .pgroup import Module, Subgroup
from .ring import Zq

PRECISION_GUARD = 1


def _basis(n, i, ring):
    v = [ring.zero] * n
    v[i] = ring.one
    return tuple(v)


def _shift_row(ring, row, e):
    if e == 0:
        return tuple(row)
    pe = ring.ppow(e)
    return tuple(ring.mul(pe, x) for x in row)


def _module_for(ring: Zq, n: int) -> Module:
    return Module(ring, (ring.K,) * n)


class HermitianSpace:
    """Fraction space R^n with a conjugate-symmetric Gram matrix."""

    def __init__(self, ring: Zq, gram):
        self.ring = ring
        self.n = len(gram)
        self.gram = tuple(
            tuple(ring.from_int(x) if isinstance(x, int) else x for x in row)
            for row in gram
        )
        for i in range(self.n):
            for j in range(self.n):
                if self.gram[i][j] != ring.conj(self.gram[j][i]):
                    raise DomainError("Gram matrix is not conjugate-symmetric")
        self.delta = ring.make(0, 1) if ring.deg == 2 else None
        self._module = _module_for(ring, self.n)

    def form(self, x, y):
        """{x, y} on integral vectors, exact mod p^K."""
        R = self.ring
        tot = R.zero
        for i, xi in enumerate(x):
            if R.is_zero(xi):
                continue
            for j, yj in enumerate(y):
                if R.is_zero(yj):
                    continue
                g = self.gram[i][j]
                if not R.is_zero(g):
                    tot = R.add(tot, R.mul(xi, R.mul(g, R.conj(yj))))
        return tot

    def lattice(self, rows, scale: int = 0) -> "PadicLattice":
        return PadicLattice(self, rows, scale)

    def standard_lattice(self) -> "PadicLattice":
        return self.lattice([_basis(self.n, i, self.ring) for i in range(self.n)])


class PadicLattice:
    """p^-scale * rowspan(rows), rows canonical triangular and integral."""

    __slots__ = ("space", "rows", "scale")

    def __init__(self, space: HermitianSpace, rows, scale: int = 0):
        self.space = space
        ring = space.ring
        sub = space._module.howell(rows)
        if len(sub.rows) != space.n:
            raise DomainError("lattice rows are not full rank at this precision")
        piv_max = max(ring.val(r[i]) for i, r in enumerate(sub.rows))
        if piv_max + PRECISION_GUARD >= ring.K:
            raise PrecisionError("lattice pivots exhaust the working precision")
        out = sub.rows
        vmin = min(
            min(ring.val(x) for x in r if not ring.is_zero(x)) for r in out
        )
        if vmin > 0 and scale > 0:
            drop = min(vmin, scale)
            out = tuple(tuple(ring.divp(x, drop) for x in r) for r in out)
            scale -= drop
            out = space._module.howell(out).rows
        if scale < 0:
            out = tuple(_shift_row(ring, r, -scale) for r in out)
            scale = 0
            out = space._module.howell(out).rows
        self.rows = tuple(out)
        self.scale = scale

    @property
    def ring(self) -> Zq:
        return self.space.ring

    def key(self):
        return (self.rows, self.scale)

    def __eq__(self, other):
        return (
            isinstance(other, PadicLattice)
            and self.space is other.space
            and self.key() == other.key()
        )

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"PadicLattice(scale={self.scale}, rows={self.rows})"

    def rescale(self, e: int) -> "PadicLattice":
        """p^e * self (e of either sign)."""
        return PadicLattice(self.space, self.rows, self.scale - e)

    def conj(self) -> "PadicLattice":
        R = self.ring
        return PadicLattice(
            self.space, [tuple(R.conj(x) for x in r) for r in self.rows], self.scale
        )

    def index_valuation(self) -> int:
        """v_p of the covolume relative to the standard lattice."""
        R = self.ring
        return sum(R.val(r[i]) for i, r in enumerate(self.rows)) - (
            self.space.n * self.scale
        )

    def contains(self, other: "PadicLattice") -> bool:
        R = self.ring
        s = max(self.scale, other.scale)
        if s - self.scale + self._max_val() + PRECISION_GUARD >= R.K:
            raise PrecisionError("containment test exceeds precision")
        sub = self.space._module.howell(
            [_shift_row(R, r, s - self.scale) for r in self.rows]
        )
        return all(
            sub.contains_vector(_shift_row(R, r, s - other.scale))
            for r in other.rows
        )

    def _max_val(self) -> int:
        R = self.ring
        return max(R.val(r[i]) for i, r in enumerate(self.rows))

    def sum(self, other: "PadicLattice") -> "PadicLattice":
        R = self.ring
        s = max(self.scale, other.scale)
        rows = [_shift_row(R, r, s - self.scale) for r in self.rows]
        rows += [_shift_row(R, r, s - other.scale) for r in other.rows]
        return PadicLattice(self.space, rows, s)

    def intersect(self, other: "PadicLattice") -> "PadicLattice":
        R = self.ring
        n = self.space.n
        s = max(self.scale, other.scale)
        cap = R.K - PRECISION_GUARD
        rows1 = [_shift_row(R, r, s - self.scale) for r in self.rows]
        rows2 = [_shift_row(R, r, s - other.scale) for r in other.rows]
        big = self.space._module
        extra = [big.basis_vector(i, cap) for i in range(n)]
        m = big.intersect(big.howell(rows1 + extra), big.howell(rows2 + extra))
        return PadicLattice(self.space, [tuple(v) for v in m.rows], s)

    def dual(self) -> "PadicLattice":
        """{x : {x, L} subset R}, via an exact kernel computation.

        With L = p^-s rowspan(B), x = p^-tau z lies in the dual iff
        z . C = 0 mod p^(s+tau) for C[i][k] = {e_i, b_k}; tau = v(det C)+1
        always suffices.
        """
        R = self.ring
        n = self.space.n
        cmat = [
            tuple(self.space.form(_basis(n, i, R), row) for row in self.rows)
            for i in range(n)
        ]
        vdet = _triangular_valuation(R, n, cmat)
        tau = vdet + 1
        mod_exp = tau + self.scale
        if mod_exp + PRECISION_GUARD > R.K:
            raise PrecisionError(
                f"dual needs modulus p^{mod_exp} beyond precision p^{R.K}"
            )
        dom = self.space._module
        cod = Module(R, (mod_exp,) * n)
        ker = dom.kernel(cmat, cod)
        rows = list(ker.rows) + [
            dom.basis_vector(i, mod_exp) for i in range(n)
        ]
        return PadicLattice(self.space, rows, tau)

    def length_over(self, other: "PadicLattice") -> int:
        """Z_{p^2}-length of self/other (other must be a sublattice)."""
        if not self.contains(other):
            raise DomainError("length_over needs a sublattice")
        return other.index_valuation() - self.index_valuation()

    def relative_position(self, other: "PadicLattice"):
        """Exponents a_1 >= ... >= a_n with other ~ p^{-a} . self."""
        R = self.ring
        n = self.space.n
        # integral coefficient matrix: p^f * (other gens) over (self gens)
        sub = self.space._module.howell(self.rows)
        coeff_rows = []
        shifts = []
        for orow in other.rows:
            vec, f = _solve_row(R, self.space._module, sub, orow)
            coeff_rows.append(vec)
            shifts.append(f)
        fmax = max(shifts)
        mat = [
            tuple(R.mul(R.ppow(fmax - f), x) for x in vec)
            for vec, f in zip(coeff_rows, shifts)
        ]
        vals = _smith_valuations(R, mat)
        # other = p^{-other.scale} span = p^{-(fmax + ...)} adjusted
        base = fmax + other.scale - self.scale
        return tuple(sorted((base - v for v in vals), reverse=True))


def dual_lattice(L: PadicLattice) -> PadicLattice:
    return L.dual()


def lattice_sum(a: PadicLattice, b: PadicLattice) -> PadicLattice:
    if a.space is not b.space:
        raise DomainError("lattices live in different spaces")
    return a.sum(b)


def lattice_intersect(a: PadicLattice, b: PadicLattice) -> PadicLattice:
    if a.space is not b.space:
        raise DomainError("lattices live in different spaces")
    return a.intersect(b)


def is_vertex(L: PadicLattice, i: int) -> bool:
    """p^(i+1) L^dual proper-subset L subset-eq p^i L^dual."""
    dv = L.dual()
    lower = dv.rescale(i + 1)
    upper = dv.rescale(i)
    return upper.contains(L) and L.contains(lower) and L != lower


def type_t(L: PadicLattice, i: int) -> int:
    """t(L) = length(L / p^(i+1) L^dual); odd in [1, n] on vertices."""
    if not is_vertex(L, i):
        raise DomainError("type is defined for vertex lattices only")
    return L.length_over(L.dual().rescale(i + 1))


def _triangular_valuation(ring: Zq, n: int, rows) -> int:
    sub = _module_for(ring, n).howell(rows)
    if len(sub.rows) != n:
        raise PrecisionError("matrix is singular at this precision")
    return sum(ring.val(r[i]) for i, r in enumerate(sub.rows))


def _solve_row(R, mod, sub, target):
    """(coeffs, f) with p^f * target = coeffs . rows(sub), coeffs integral."""
    piv = sub.pivot_map()
    cols = sorted(piv)
    for f in range(R.K):
        t = tuple(R.mul(R.ppow(f), x) for x in target)
        x = mod.vreduce(t)
        vec = [R.zero] * len(cols)
        ok = True
        for k, col in enumerate(cols):
            row = piv[col]
            e = R.val(row[col])
            if R.is_zero(x[col]):
                continue
            if R.val(x[col]) < e:
                ok = False
                break
            q = R.divp(x[col], e)
            vec[k] = q
            x = mod.vsub(x, mod.vscale(q, row))
        if ok and all(R.is_zero(c) for c in x):
            return tuple(vec), f
    raise PrecisionError("vector cannot be expressed within precision")


def _smith_valuations(R: Zq, mat):
    """Elementary-divisor valuations of a square integral matrix."""
    work = [list(r) for r in mat]
    m = len(work)
    n = len(work[0]) if work else 0
    vals = []
    rows_left = set(range(m))
    cols_left = set(range(n))
    while rows_left and cols_left:
        best = None
        for i in rows_left:
            for j in cols_left:
                v = R.val(work[i][j])
                if v < R.K and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        v, pi, pj = best
        for i in rows_left:
            if i == pi:
                continue
            x = work[i][pj]
            if not R.is_zero(x):
                q = R.mul(R.divp(x, v), R.unit_inv(R.divp(work[pi][pj], v)))
                for j in cols_left:
                    work[i][j] = R.sub(work[i][j], R.mul(q, work[pi][j]))
        vals.append(v)
        rows_left.discard(pi)
        cols_left.discard(pj)
    vals += [R.K] * (min(m, n) - len(vals))
    return sorted(vals)


# ---------------------------------------------------------------------------
# residue hermitian spaces over F_{p^2}


class ResidueHermitianSpace:
    """Hermitian space over F_{p^2}, or (with sesquilinear=False) an
    alternating bilinear space over F_p: the residue form of the
    symplectic PEL case."""

    def __init__(self, p: int, gram, sesquilinear: bool = True):
        self.sesquilinear = sesquilinear
        self.gf = Zq(p, 1, 2 if sesquilinear else 1)
        gf = self.gf
        self.gram = tuple(
            tuple(gf.from_int(x) if isinstance(x, int) else x for x in row)
            for row in gram
        )
        self.dim = len(gram)
        for i in range(self.dim):
            for j in range(self.dim):
                if sesquilinear:
                    if self.gram[i][j] != gf.conj(self.gram[j][i]):
                        raise DomainError(
                            "residue Gram is not conjugate-symmetric"
                        )
                else:
                    if self.gram[i][j] != gf.neg(self.gram[j][i]):
                        raise DomainError("residue Gram is not alternating")

    def form(self, x, y):
        gf = self.gf
        tot = gf.zero
        for i, xi in enumerate(x):
            if gf.is_zero(xi):
                continue
            for j, yj in enumerate(y):
                g = self.gram[i][j]
                if not gf.is_zero(yj) and not gf.is_zero(g):
                    t = gf.conj(yj) if self.sesquilinear else yj
                    tot = gf.add(tot, gf.mul(xi, gf.mul(g, t)))
        return tot

    def vectors(self):
        gf = self.gf

        def rec(i):
            if i == self.dim:
                yield ()
                return
            for rest in rec(i + 1):
                for a in gf.elements():
                    yield (a,) + rest

        return rec(0)

    def rank(self) -> int:
        return len(_gf_rref(self.gf, [tuple(r) for r in self.gram]))

    def is_nondegenerate(self) -> bool:
        return self.rank() == self.dim

    def functional_row(self, v):
        """w with form(x, v) = x . w."""
        return tuple(
            self.form(_basis(self.dim, i, self.gf), v) for i in range(self.dim)
        )

    def perp_of(self, vecs):
        """Basis of {x : form(x, v) = 0 for all v}."""
        if not vecs:
            return [_basis(self.dim, i, self.gf) for i in range(self.dim)]
        rows = [self.functional_row(v) for v in vecs]
        return _gf_nullspace(self.gf, rows, self.dim)

    def isotropic_vector(self):
        """A nonzero v with form(v, v) = 0; exists whenever dim >= 2."""
        gf = self.gf
        if not self.sesquilinear:
            return _basis(self.dim, 0, gf)
        if self.dim < 2:
            raise DomainError("no isotropic vector in dimension < 2")
        for i in range(self.dim):
            e = _basis(self.dim, i, gf)
            if gf.is_zero(self.form(e, e)):
                return e
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for t in gf.elements():
                    v = list(_basis(self.dim, i, gf))
                    v[j] = t
                    v = tuple(v)
                    if gf.is_zero(self.form(v, v)):
                        return v
        for v in self.vectors():
            if any(not gf.is_zero(c) for c in v) and gf.is_zero(self.form(v, v)):
                return v
        raise DomainError("hermitian space with no isotropic vector")


def lagrangian(space: ResidueHermitianSpace):
    """Basis of a subspace W = W^perp; dim must be even, form nondegenerate."""
    if space.dim % 2:
        raise DomainError("Lagrangians need even dimension")
    if not space.is_nondegenerate():
        raise DomainError("Lagrangians need a nondegenerate form")
    gf = space.gf
    if space.dim == 0:
        return []
    v = space.isotropic_vector()
    perp = space.perp_of([v])
    basis = _gf_complete_with(gf, [v], perp)
    rest = basis[1:]
    # the form on any complement of v inside v-perp is the nondegenerate
    # quotient form, so recursion is sound
    sub = ResidueHermitianSpace(
        gf.p,
        [[space.form(a, b) for b in rest] for a in rest],
        sesquilinear=space.sesquilinear,
    )
    out = [v]
    for wv in lagrangian(sub):
        lift = [gf.zero] * space.dim
        for c, bvec in zip(wv, rest):
            for k in range(space.dim):
                lift[k] = gf.add(lift[k], gf.mul(c, bvec[k]))
        out.append(tuple(lift))
    return _gf_rref(gf, out)


def lagrangian_in_quotient(tower, bot: Subgroup, top: Subgroup, level: int):
    """Lift a Lagrangian of the residue space top/bot to E'' = E''^perp.

    top/bot must be p-torsion; the induced form is the level pairing of
    lifts divided by p^(level-1).  Returns (E'', residue_dimension).
    """
    from .pgroup import QuotientPresentation

    module = tower.module
    R = module.ring
    if tower.pair_value is None:
        raise DomainError("tower carries no pairing values")
    pres = QuotientPresentation(top, bot)
    qmod = pres.module
    if any(e != 1 for e in qmod.exps):
        raise DomainError("residue space is not p-torsion")
    dim = qmod.rank
    if dim % 2:
        raise DomainError("residue space has odd dimension")
    gens = [pres.lift_vector(qmod.basis_vector(i)) for i in range(dim)]
    gram = []
    for a in gens:
        row = []
        for b in gens:
            val = tower.pair_value(a, b, level)
            row.append(R.mod_ppow(R.divp(val, level - 1), 1))
        gram.append(row)
    gram_gf = [
        [
            (x % R.p) if R.deg == 1 else (x[0] % R.p, x[1] % R.p)
            for x in row
        ]
        for row in gram
    ]
    # quadratic towers carry a hermitian residue form; Z_p towers carry
    # the alternating (symplectic PEL) one
    space = ResidueHermitianSpace(R.p, gram_gf, sesquilinear=R.deg == 2)
    W = lagrangian(space)
    rows = list(bot.rows)
    for wv in W:
        acc = module.vzero()
        for c, g in zip(wv, gens):
            cc = R.from_int(c) if isinstance(c, int) else R.make(c[0], c[1])
            acc = module.vadd(acc, module.vscale(cc, g))
        rows.append(acc)
    return module.howell(rows), dim


# ---------------------------------------------------------------------------
# the standard basic isocrystal (graded coordinates)


class StandardIsocrystal:
    """N = N_0 + N_1 with F(x0, x1) = (p sigma(x1), sigma(x0)).

    Graded lattices are pairs (L0, L1) of lattices in the n-dimensional
    hermitian space (N_0, {,}); the alternating form pairs the pieces, so
    graded duals swap them.
    """

    def __init__(self, n: int, ring: Zq, gram=None):
        if n < 1:
            raise DomainError("n must be >= 1")
        if ring.deg != 2:
            raise DomainError("the isocrystal needs the quadratic ring")
        self.n = n
        self.ring = ring
        self._std = None
        if gram is None:
            gram = [
                [ring.one if i == j else ring.zero for j in range(n)]
                for i in range(n)
            ]
        self.space = HermitianSpace(ring, gram)

    def F_graded(self, L0: PadicLattice, L1: PadicLattice):
        """F(L0 + L1) = (p sigma(L1), sigma(L0))."""
        return (L1.conj().rescale(1), L0.conj())

    def signature(self, M0: PadicLattice, M1: PadicLattice):
        """(dim M_0/V M_1, dim M_1/V M_0) over F_{p^2}."""
        VM1 = M1.conj().rescale(1)
        VM0 = M0.conj()
        return (M0.length_over(VM1), M1.length_over(VM0))

    def standard_dieudonne(self):
        """A superspecial (M_0, M_1) with signature (1, n-1).

        For odd n the pair is principally polarized (M_1 = M_0^dual, total
        covolume 0) with M_0 a type-1 vertex; for even n a non-self-dual
        witness passing the signature check is returned.
        """
        R = self.ring
        n = self.n
        if n % 2 == 1:
            if self._std is None:
                std = self.space.standard_lattice()
                target_iv = (n - 1) // 2
                for cand in _lattices_between(std.rescale(1), std):
                    if cand.index_valuation() != target_iv:
                        continue
                    pair = (cand, cand.dual())
                    ok, _ = dieudonne_lattice_check(self, *pair)
                    if ok:
                        self._std = pair
                        break
                if self._std is None:
                    raise DomainError(
                        "no superspecial point near the standard lattice"
                    )
            return self._std
        M0 = self.space.standard_lattice()
        rows = [_shift_row(R, _basis(n, i, R), 0) for i in range(n - 1)]
        rows.append(_shift_row(R, _basis(n, n - 1, R), 1))
        M1 = PadicLattice(self.space, rows, 1)  # p^-1 R^(n-1) + R e_n
        return (M0, M1)

    def graded_dual(self, L0: PadicLattice, L1: PadicLattice):
        """Dual w.r.t. the alternating form on N = N_0 + N_1.

        The cross-pairing <x_0, y_1> = delta^-1 {x_0, conj(y_1)} is plain
        bilinear (the conjugations in {,} and F cancel), so the graded dual
        swaps the pieces with a conjugation twist.
        """
        return (L1.conj().dual(), L0.conj().dual())

    def lambda_plus(self, vertex: PadicLattice):
        """(Lambda, V^-1 Lambda) = (Lambda, p^-1 conj(Lambda))."""
        return (vertex, vertex.conj().rescale(-1))

    def lambda_minus(self, vertex: PadicLattice, i: int):
        L0, L1 = self.lambda_plus(vertex)
        D0, D1 = self.graded_dual(L0, L1)
        return (D0.rescale(i), D1.rescale(i))


def standard_isocrystal(n: int, p: int, precision: int) -> StandardIsocrystal:
    return StandardIsocrystal(n, Zq(p, precision, 2))


def dieudonne_lattice_check(iso: StandardIsocrystal, M0: PadicLattice,
                            M1: PadicLattice):
    """F-stability pM c FM c M and the (1, n-1) signature; (ok, diags)."""
    diags = []
    F0, F1 = iso.F_graded(M0, M1)  # FM = F0 + F1
    if not M0.contains(F0):
        diags.append("F M_1 not contained in M_0")
    if not M1.contains(F1):
        diags.append("F M_0 not contained in M_1")
    if not F0.contains(M0.rescale(1)):
        diags.append("p M_0 not contained in F M_1")
    if not F1.contains(M1.rescale(1)):
        diags.append("p M_1 not contained in F M_0")
    if not diags:
        s0, s1 = iso.signature(M0, M1)
        if (s0, s1) != (1, iso.n - 1):
            diags.append(f"signature {(s0, s1)} != (1, {iso.n - 1})")
    return (not diags, diags)


def lambda_pm(iso: StandardIsocrystal, vertex: PadicLattice, i: int = 0):
    """Lambda^+/Lambda^- for a vertex, its index, and the height identity.

    Searches the (finite) interval between Lambda^- and Lambda^+ for a
    graded Dieudonne lattice M satisfying the signature; asserts
    length(Lambda^+/M) = length(M/Lambda^-) = t(Lambda).
    Returns a report dict.
    """
    t = type_t(vertex, i)
    P0, P1 = iso.lambda_plus(vertex)
    m0, m1 = iso.lambda_minus(vertex, i)
    idx = (P0.length_over(m0)) + (P1.length_over(m1))
    S0, S1 = iso.standard_dieudonne()
    balance = S0.index_valuation() + S1.index_valuation()
    found = None
    for M0 in _lattices_between(m0, P0):
        for M1 in _lattices_between(m1, P1):
            # model a point of the height-0 component: equal covolume
            if M0.index_valuation() + M1.index_valuation() != balance:
                continue
            ok, _ = dieudonne_lattice_check(iso, M0, M1)
            if ok:
                found = (M0, M1)
                break
        if found:
            break
    report = {
        "type": t,
        "index_plus_minus": idx,
        "heights": None,
        "found_point": found is not None,
    }
    if found:
        M0, M1 = found
        up = P0.length_over(M0) + P1.length_over(M1)
        down = M0.length_over(m0) + M1.length_over(m1)
        report["heights"] = (up, down)
    return report


def _lattices_between(lower: PadicLattice, upper: PadicLattice):
    """All lattices between lower and upper (both full rank, lower <= upper)."""
    from .pgroup import QuotientPresentation

    R = lower.ring
    s = max(lower.scale, upper.scale)
    mod = upper.space._module
    up = mod.howell([_shift_row(R, r, s - upper.scale) for r in upper.rows])
    low = mod.howell([_shift_row(R, r, s - lower.scale) for r in lower.rows])
    pres = QuotientPresentation(up, low)
    out = []
    for S in pres.module.all_submodules():
        sub = pres.lift_subgroup(S)
        out.append(PadicLattice(upper.space, [tuple(r) for r in sub.rows], s))
    return out


def _gf_rref(gf, rows):
    work = [list(r) for r in rows if not all(gf.is_zero(x) for x in r)]
    if not work:
        return []
    n = len(work[0])
    out = []
    for col in range(n):
        pr = None
        for row in work:
            if not gf.is_zero(row[col]):
                pr = row
                break
        if pr is None:
            continue
        work.remove(pr)
        inv = gf.unit_inv(pr[col])
        pr = [gf.mul(inv, x) for x in pr]
        def clear(row):
            if gf.is_zero(row[col]):
                return list(row)
            c = row[col]
            return [gf.sub(a, gf.mul(c, b)) for a, b in zip(row, pr)]
        work = [r for r in (clear(row) for row in work)
                if not all(gf.is_zero(x) for x in r)]
        out = [clear(row) for row in out]
        out.append(pr)
    return [tuple(r) for r in out]


def _gf_nullspace(gf, rows, n):
    rr = _gf_rref(gf, rows)
    pivots = {}
    for r in rr:
        for j, x in enumerate(r):
            if not gf.is_zero(x):
                pivots[j] = r
                break
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = [gf.zero] * n
        v[f] = gf.one
        for j, r in pivots.items():
            v[j] = gf.neg(r[f])
        basis.append(tuple(v))
    return basis


def _gf_complete_with(gf, start, pool):
    out = list(start)
    rank = len(_gf_rref(gf, out))
    for v in pool:
        trial = _gf_rref(gf, out + [list(v)])
        if len(trial) > rank:
            out.append(tuple(v))
            rank += 1
    return out
