"""Finite modules over truncated unramified rings and their submodule lattices.

An ambient is a direct sum ``R/p^{m_1} + ... + R/p^{m_r}`` for a ring
``R = Zq(p, K, deg)`` with every ``m_i <= K``.  Submodules are kept in a
canonical triangular Howell form, which makes equality, containment, sums,
intersections, p-power preimages, annihilators and exhaustive enumeration
all exact and cheap at the sizes this library targets.

Heights are p-heights: ``ht(B) = log_p |B| = deg * sum(m_i - e_i)`` over the
pivot valuations ``e_i`` of the canonical form.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Iterator, Sequence

from .errors import DomainError
from .ring import Zq


class Module:
    """Ambient module ⊕ R/p^{m_i}; the container for all lattice work."""

    def __init__(self, ring: Zq, exps: Sequence[int]):
        exps = tuple(int(e) for e in exps)
        if any(e < 1 or e > ring.K for e in exps):
            raise DomainError(f"coordinate exponents {exps} not within 1..{ring.K}")
        self.ring = ring
        self.exps = exps
        self.rank = len(exps)
        self._sub_cache: list[Subgroup] | None = None

    # -- vectors ---------------------------------------------------------

    def vreduce(self, v):
        R = self.ring
        return tuple(R.mod_ppow(x, m) for x, m in zip(v, self.exps))

    def vzero(self):
        return tuple(self.ring.zero for _ in range(self.rank))

    def vadd(self, u, v):
        R = self.ring
        return tuple(
            R.mod_ppow(R.add(a, b), m) for a, b, m in zip(u, v, self.exps)
        )

    def vsub(self, u, v):
        R = self.ring
        return tuple(
            R.mod_ppow(R.sub(a, b), m) for a, b, m in zip(u, v, self.exps)
        )

    def vscale(self, c, v):
        R = self.ring
        return tuple(R.mod_ppow(R.mul(c, x), m) for x, m in zip(v, self.exps))

    def basis_vector(self, i: int, scale_exp: int = 0):
        v = [self.ring.zero] * self.rank
        v[i] = self.ring.ppow(scale_exp)
        return self.vreduce(tuple(v))

    def is_vzero(self, v) -> bool:
        return all(self.ring.is_zero(x) for x in v)

    # -- canonical Howell form --------------------------------------------

    def howell(self, rows) -> "Subgroup":
        R = self.ring
        exps = self.exps
        r = self.rank
        pool = [self.vreduce(row) for row in rows]
        pool = [v for v in pool if not self.is_vzero(v)]
        piv: list[tuple | None] = [None] * r
        for col in range(r):
            m = exps[col]
            cand = [v for v in pool if not R.is_zero(v[col])]
            if not cand:
                continue
            sel = min(cand, key=lambda v: (R.val(v[col]), v))
            e = R.val(sel[col])
            unit = R.divp(sel[col], e)
            sel = self.vscale(R.unit_inv(unit), sel)
            newpool = []
            for v in pool:
                x = v[col]
                if R.is_zero(x):
                    newpool.append(v)
                    continue
                w = R.divp(x, e)
                v2 = self.vsub(v, self.vscale(w, sel))
                if not self.is_vzero(v2):
                    newpool.append(v2)
            t = m - e
            if t > 0:
                ann = self.vscale(R.ppow(t), sel)
                if not self.is_vzero(ann):
                    newpool.append(ann)
            piv[col] = sel
            pool = newpool
        # back-reduce entries above later pivots
        for i in range(r):
            row = piv[i]
            if row is None:
                continue
            for j in range(i + 1, r):
                pj = piv[j]
                if pj is None:
                    continue
                ej = R.val(pj[j])
                x = row[j]
                rem = R.mod_ppow(x, ej)
                if rem != x:
                    q = R.divp(R.sub(x, rem), ej)
                    row = self.vsub(row, self.vscale(q, pj))
            piv[i] = row
        rows_out = tuple(piv[i] for i in range(r) if piv[i] is not None)
        return Subgroup(self, rows_out)

    def subgroup(self, gens) -> "Subgroup":
        return self.howell(gens)

    def zero_subgroup(self) -> "Subgroup":
        return Subgroup(self, ())

    def full_subgroup(self) -> "Subgroup":
        return self.howell([self.basis_vector(i) for i in range(self.rank)])

    def torsion(self, k: int) -> "Subgroup":
        """A[p^k] as a submodule of A."""
        gens = [
            self.basis_vector(i, max(0, m - k)) for i, m in enumerate(self.exps)
        ]
        return self.howell(gens)

    # -- derived operations -----------------------------------------------

    def sum_(self, a: "Subgroup", b: "Subgroup") -> "Subgroup":
        return self.howell(list(a.rows) + list(b.rows))

    def scale(self, a: "Subgroup", e: int) -> "Subgroup":
        pe = self.ring.ppow(e)
        return self.howell([self.vscale(pe, v) for v in a.rows])

    def _split_rows(self, doubled: "Module", rows, r_left: int):
        """Rows of a Howell form over (left | right) whose left block is 0."""
        out = []
        for v in rows:
            if all(self.ring.is_zero(x) for x in v[:r_left]):
                out.append(v[r_left:])
        return out

    def intersect(self, a: "Subgroup", b: "Subgroup") -> "Subgroup":
        dd = Module(self.ring, self.exps + self.exps)
        rows = [tuple(v) + tuple(v) for v in a.rows]
        rows += [tuple(v) + self.vzero() for v in b.rows]
        h = dd.howell(rows)
        return self.howell(self._split_rows(dd, h.rows, self.rank))

    def kernel(self, images, codomain: "Module", extra: "Subgroup" = None) -> "Subgroup":
        """Kernel of the map A -> codomain/extra sending e_i to images[i]."""
        dd = Module(self.ring, codomain.exps + self.exps)
        rows = [
            tuple(codomain.vreduce(images[i])) + self.basis_vector(i)
            for i in range(self.rank)
        ]
        if extra is not None:
            rows += [tuple(v) + self.vzero() for v in extra.rows]
        h = dd.howell(rows)
        return self.howell(self._split_rows(dd, h.rows, codomain.rank))

    def preimage_p(self, a: "Subgroup", k: int) -> "Subgroup":
        """{x in A : p^k x in a}."""
        pk = self.ring.ppow(k)
        images = [self.vscale(pk, self.basis_vector(i)) for i in range(self.rank)]
        return self.kernel(images, self, extra=a)

    def annihilator(self, a: "Subgroup", pairing: Callable) -> "Subgroup":
        """{x : pairing(x, g) = 0 for all generators g of a}.

        ``pairing(x, y)`` must be R-linear in x and return a ring element that
        is only meaningful modulo the coordinate exponent given by
        ``pairing.codomain_exp``.
        """
        gens = list(a.rows)
        if not gens:
            return self.full_subgroup()
        cod = Module(self.ring, tuple(pairing.codomain_exp for _ in gens))
        images = [
            tuple(pairing(self.basis_vector(i), g) for g in gens)
            for i in range(self.rank)
        ]
        return self.kernel(images, cod)

    # -- exhaustive enumeration --------------------------------------------

    def all_submodules(self) -> list["Subgroup"]:
        if self._sub_cache is None:
            self._sub_cache = sorted(
                self._enumerate(), key=lambda s: (s.ht, s.rows)
            )
        return self._sub_cache

    def _enumerate(self) -> Iterator["Subgroup"]:
        R = self.ring
        r = self.rank

        def tail_module(i):
            return Module(R, self.exps[i + 1 :])

        def rec(i, lower_rows):
            # lower_rows: canonical rows for columns > i, full-width vectors
            if i < 0:
                yield Subgroup(self, tuple(v for v in lower_rows if not self.is_vzero(v)))
                return
            m = self.exps[i]
            tm = tail_module(i)
            lower_tail = tm.howell([v[i + 1 :] for v in lower_rows])
            for e in range(m, -1, -1):
                if e == m:
                    yield from rec(i - 1, lower_rows)
                    continue
                # valid tails: {t : p^(m-e) t in span(lower)}, one canonical
                # representative per coset of span(lower)
                T = tm.preimage_p(lower_tail, m - e)
                for t in _coset_reps(tm, T, lower_tail):
                    row = (
                        tuple(R.zero for _ in range(i))
                        + (R.ppow(e),)
                        + t
                    )
                    yield from rec(i - 1, [row] + lower_rows)

        yield from rec(r - 1, [])

    def count_submodules(self) -> int:
        return len(self.all_submodules())

    def element_count(self) -> int:
        return self.ring.p ** (self.ring.deg * sum(self.exps))

    def elements(self) -> Iterator[tuple]:
        """All elements; only sensible for small ambients."""
        R = self.ring

        def coords(i):
            if i == self.rank:
                yield ()
                return
            m = self.ring.p ** self.exps[i]
            for rest in coords(i + 1):
                if R.deg == 1:
                    for a in range(m):
                        yield (a,) + rest
                else:
                    for a in range(m):
                        for b in range(m):
                            yield ((a, b),) + rest

        return coords(0)

    def subgroup_elements(self, s: "Subgroup") -> set:
        """Element set of a submodule (small ambients only)."""
        out = {self.vzero()}
        for row in s.rows:
            new = set()
            acc = self.vzero()
            reps = []
            while True:
                reps.append(acc)
                acc = self.vadd(acc, row)
                if self.is_vzero(acc):
                    break
            if self.ring.deg == 2:
                ureps = []
                urow = self.vscale((0, 1), row)
                acc = self.vzero()
                while True:
                    ureps.append(acc)
                    acc = self.vadd(acc, urow)
                    if self.is_vzero(acc):
                        break
                reps = [self.vadd(a, b) for a in reps for b in ureps]
            for x in out:
                for rep in reps:
                    new.add(self.vadd(x, rep))
            out = new
        return out

    def key(self):
        return (self.ring.p, self.ring.K, self.ring.deg, self.exps)

    def __eq__(self, other):
        return isinstance(other, Module) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Module({self.ring!r}, {self.exps})"


def _coset_reps(module: Module, big: "Subgroup", small: "Subgroup"):
    """Canonical representatives of big/small, reduced modulo small."""
    R = module.ring
    big_piv = big.pivot_map()
    small_piv = small.pivot_map()
    axes = []
    for col in sorted(big_piv):
        row = big_piv[col]
        f = R.val(row[col])
        gval = R.val(small_piv[col][col]) if col in small_piv else module.exps[col]
        width = gval - f
        if width > 0:
            axes.append((row, width))

    def walk(idx, acc):
        if idx == len(axes):
            yield small.reduce_vector_mod(acc)
            return
        row, width = axes[idx]
        pw = module.ring.p ** width
        if R.deg == 1:
            coeffs = range(pw)
        else:
            coeffs = ((a, b) for a in range(pw) for b in range(pw))
        for c in coeffs:
            yield from walk(idx + 1, module.vadd(acc, module.vscale(c, row)))

    yield from walk(0, module.vzero())


class Subgroup:
    """A submodule in canonical Howell form (immutable, hashable)."""

    __slots__ = ("module", "rows", "_ht", "_exp")

    def __init__(self, module: Module, rows):
        self.module = module
        self.rows = tuple(rows)
        R = module.ring
        self._ht = R.deg * sum(
            module.exps[self._pivot_col(v)] - R.val(v[self._pivot_col(v)])
            for v in self.rows
        )
        self._exp = None

    @staticmethod
    def _pivot_col(v):
        for j, x in enumerate(v):
            if x != 0 and x != (0, 0):
                return j
        raise DomainError("zero row stored in canonical form")

    @property
    def ht(self) -> int:
        return self._ht

    @property
    def order(self) -> int:
        return self.module.ring.p ** self._ht

    @property
    def exponent(self) -> int:
        """Minimal t with p^t * self = 0."""
        if self._exp is None:
            R = self.module.ring
            t = 0
            for v in self.rows:
                for j, x in enumerate(v):
                    if not R.is_zero(x):
                        t = max(t, self.module.exps[j] - R.val(x))
            self._exp = t
        return self._exp

    def pivot_map(self):
        return {self._pivot_col(v): v for v in self.rows}

    def reduce_vector_mod(self, x):
        """Canonical representative of x modulo this submodule."""
        R = self.module.ring
        x = self.module.vreduce(x)
        piv = self.pivot_map()
        for col in sorted(piv):
            row = piv[col]
            e = R.val(row[col])
            rem = R.mod_ppow(x[col], e)
            if rem != x[col]:
                q = R.divp(R.sub(x[col], rem), e)
                x = self.module.vsub(x, self.module.vscale(q, row))
        return x

    def contains_vector(self, x) -> bool:
        return self.module.is_vzero(self.reduce_vector_mod(x))

    def __le__(self, other: "Subgroup") -> bool:
        return all(other.contains_vector(v) for v in self.rows)

    def __lt__(self, other: "Subgroup") -> bool:
        return self != other and self <= other

    def __eq__(self, other):
        return (
            isinstance(other, Subgroup)
            and self.module == other.module
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.module.key(), self.rows))

    def key(self):
        return self.rows

    def __repr__(self):
        return f"Subgroup(ht={self.ht}, rows={self.rows})"


class QuotientPresentation:
    """T/W realised as an honest Module, with lift and express maps."""

    def __init__(self, T: Subgroup, W: Subgroup):
        if not W <= T:
            raise DomainError("quotient needs W <= T")
        A = T.module
        R = A.ring
        Kw = R.K
        gens = [list(v) for v in T.rows]
        s = len(gens)
        if s == 0:
            self.module = Module(R, ())
            self._ghat = []
            self.ambient = A
            self._aug = None
            self._kept = []
            self.W = W
            self.T = T
            return
        lam = Module(R, tuple(Kw for _ in range(s)))
        rel = lam.kernel([tuple(g) for g in gens], A, extra=W)
        # Smith form of the relation rows over R/p^Kw with generator tracking
        work = [list(v) for v in rel.rows]
        gvec = [list(A.vreduce(tuple(g))) for g in gens]
        cexp = [Kw] * s
        for t in range(s):
            best = None
            for ri, row in enumerate(work):
                for j in range(t, s):
                    v = R.val(row[j])
                    if v < Kw and (best is None or v < best[0]):
                        best = (v, ri, j)
            if best is None:
                break
            v, ri, j = best
            if j != t:
                for row in work:
                    row[t], row[j] = row[j], row[t]
                gvec[t], gvec[j] = gvec[j], gvec[t]
            prow = work.pop(ri)
            u = R.divp(prow[t], v)
            uinv = R.unit_inv(u)
            prow = [R.mul(uinv, x) for x in prow]
            for row in work:
                x = row[t]
                if not R.is_zero(x):
                    q = R.divp(x, v)
                    for jj in range(s):
                        row[jj] = R.sub(row[jj], R.mul(q, prow[jj]))
            for jj in range(s):
                if jj == t:
                    continue
                x = prow[jj]
                if not R.is_zero(x):
                    q = R.divp(x, v)
                    prow[jj] = R.zero
                    gv = gvec[t]
                    add = [R.mul(q, y) for y in gvec[jj]]
                    gvec[t] = [R.add(a, b) for a, b in zip(gv, add)]
            cexp[t] = v
        kept = [t for t in range(s) if cexp[t] >= 1]
        self.module = Module(R, tuple(cexp[t] for t in kept))
        self._ghat = [A.vreduce(tuple(gvec[t])) for t in kept]
        self.ambient = A
        self.W = W
        self.T = T
        self._kept = kept
        # augmented form for express()
        m = len(kept)
        dd = Module(R, A.exps + tuple(Kw for _ in range(m)))
        rows = [
            tuple(self._ghat[i]) + tuple(
                R.one if j == i else R.zero for j in range(m)
            )
            for i in range(m)
        ]
        rows += [tuple(v) + tuple(R.zero for _ in range(m)) for v in W.rows]
        self._aug = dd.howell(rows)
        self._ddim = m

    def lift_vector(self, qvec):
        """Q-coordinates -> a representative in the ambient."""
        A = self.ambient
        out = A.vzero()
        for c, g in zip(qvec, self._ghat):
            out = A.vadd(out, A.vscale(c, g))
        return out

    def lift_subgroup(self, S: Subgroup) -> Subgroup:
        """Submodule of Q -> the corresponding W <= B <= T."""
        rows = [self.lift_vector(v) for v in S.rows]
        rows += list(self.W.rows)
        return self.ambient.howell(rows)

    def express(self, x):
        """Ambient vector in T -> its Q-coordinates."""
        A = self.ambient
        R = A.ring
        m = self._ddim
        xx = tuple(A.vreduce(x)) + tuple(R.zero for _ in range(m))
        red = self._aug.reduce_vector_mod(xx)
        if not all(R.is_zero(c) for c in red[: A.rank]):
            raise DomainError("vector not in the numerator submodule")
        tail = [R.neg(c) for c in red[A.rank :]]
        return self.module.vreduce(tuple(tail))

    def push_subgroup(self, B: Subgroup) -> Subgroup:
        """W <= B <= T -> its image in Q."""
        return self.module.howell([self.express(v) for v in B.rows])


class Pairing:
    """R-valued form on a module; sesquilinear if the ring has degree 2.

    ``gram`` is an n x n matrix of ring elements;
    value(x, y) = sum_i sum_j x_i * gram[i][j] * tau(y_j) with tau = conj
    when ``sesquilinear`` else identity.  Values are meaningful modulo
    p^codomain_exp.
    """

    def __init__(self, module: Module, gram, codomain_exp: int, sesquilinear=None):
        R = module.ring
        self.module = module
        self.gram = tuple(
            tuple(R.from_int(x) if isinstance(x, int) else x for x in r)
            for r in gram
        )
        self.codomain_exp = codomain_exp
        if sesquilinear is None:
            sesquilinear = module.ring.deg == 2
        self.sesquilinear = sesquilinear

    def __call__(self, x, y):
        R = self.module.ring
        tot = R.zero
        for i, xi in enumerate(x):
            if R.is_zero(xi):
                continue
            for j, yj in enumerate(y):
                if R.is_zero(yj):
                    continue
                g = self.gram[i][j]
                if R.is_zero(g):
                    continue
                t = R.conj(yj) if self.sesquilinear else yj
                tot = R.add(tot, R.mul(xi, R.mul(g, t)))
        return R.mod_ppow(tot, self.codomain_exp)

    def perp(self, B: Subgroup) -> Subgroup:
        return self.module.annihilator(B, self)


@lru_cache(maxsize=None)
def standard_symplectic_gram(rank: int):
    """Antidiagonal alternating Gram for even-rank Weil-style pairings."""
    if rank % 2:
        raise DomainError("symplectic form needs even rank")
    return tuple(
        tuple(
            1 if j == rank - 1 - i and i < rank // 2
            else (-1 if j == rank - 1 - i else 0)
            for j in range(rank)
        )
        for i in range(rank)
    )
