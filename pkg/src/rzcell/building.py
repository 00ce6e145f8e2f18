"""Vertex combinatorics of the Bruhat-Tits stratification.

Vertices of the J-side building are hermitian lattices with
p^(i+1) L^dual proper-in L subset-eq p^i L^dual; everything here is
ball-local: the vertex set L_i is infinite, so every query starts from a
center and a radius.  Graph distance on the containment-adjacency graph
realizes the building metric (a documented modelling choice).

For even n the hermitian space must be the non-split one: Gram
diag(1, ..., 1, p); odd n uses the identity Gram.
"""

from __future__ import annotations

from typing import Optional

from .errors import DomainError, PrecisionError
from .hermitian import (
    HermitianSpace,
    PadicLattice,
    _lattices_between,
    is_vertex,
    type_t,
)
from .ring import Zq


def building_space(n: int, p: int, precision: int = 8) -> HermitianSpace:
    """The hermitian space carrying the J-side vertex lattices."""
    ring = Zq(p, precision, 2)
    gram = [[0] * n for _ in range(n)]
    for i in range(n):
        gram[i][i] = 1
    if n % 2 == 0:
        gram[n - 1][n - 1] = p
    return HermitianSpace(ring, [[ring.from_int(x) for x in r] for r in gram])


def t_max(n: int) -> int:
    return n if n % 2 else n - 1


class Vertex:
    """A vertex lattice with its component index and cached type."""

    __slots__ = ("L", "i", "t")

    def __init__(self, L: PadicLattice, i: int = 0):
        if not is_vertex(L, i):
            raise DomainError("lattice is not a vertex for this component")
        self.L = L
        self.i = i
        self.t = type_t(L, i)

    def key(self):
        return (self.L.key(), self.i)

    def __eq__(self, other):
        return isinstance(other, Vertex) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Vertex(t={self.t}, i={self.i}, scale={self.L.scale})"


def base_vertex(space: HermitianSpace, i: int = 0) -> Vertex:
    """A canonical starting vertex (the standard lattice, adjusted)."""
    L = space.standard_lattice()
    if is_vertex(L, i):
        return Vertex(L, i)
    # non-split even case: the standard lattice may fail; search nearby
    for cand in _lattices_between(L.rescale(1), L.rescale(-1)):
        if is_vertex(cand, i):
            return Vertex(cand, i)
    raise DomainError("no vertex found near the standard lattice")


def neighbors(v: Vertex) -> list[Vertex]:
    """All vertices L' with L' strictly inside L or L strictly inside L'."""
    L, i = v.L, v.i
    dv = L.dual()
    lower = dv.rescale(i + 1)
    upper = dv.rescale(i)
    out = []
    for cand in _lattices_between(lower, L):
        if cand != L and is_vertex(cand, i):
            out.append(Vertex(cand, i))
    for cand in _lattices_between(L, upper):
        if cand != L and is_vertex(cand, i):
            out.append(Vertex(cand, i))
    seen = set()
    uniq = []
    for w in sorted(out, key=lambda x: x.key()):
        if w.key() not in seen:
            seen.add(w.key())
            uniq.append(w)
    return uniq


def is_simplex(vertices: list[Vertex]) -> bool:
    """Some ordering satisfies p^(i+1) L_m < L_0 < ... < L_m (all strict)."""
    if not vertices:
        raise DomainError("empty vertex list")
    i = vertices[0].i
    if any(v.i != i for v in vertices):
        raise DomainError("vertices lie in different components")
    if len(vertices) == 1:
        return True
    import itertools

    for perm in itertools.permutations(vertices):
        chain = list(perm)
        ok = True
        for a, b in zip(chain, chain[1:]):
            if not (b.L.contains(a.L) and a.L != b.L):
                ok = False
                break
        if not ok:
            continue
        lowest = chain[-1].L.rescale(i + 1)
        if chain[0].L.contains(lowest) and chain[0].L != lowest:
            return True
    return False


def vertex_meet(v: Vertex, w: Vertex) -> Optional[Vertex]:
    if v.i != w.i:
        raise DomainError("vertices lie in different components")
    cap = v.L.intersect(w.L)
    if is_vertex(cap, v.i):
        return Vertex(cap, v.i)
    return None


def vertex_join(v: Vertex, w: Vertex) -> Optional[Vertex]:
    """The smallest vertex containing L1 + L2, when one exists."""
    if v.i != w.i:
        raise DomainError("vertices lie in different components")
    tot = v.L.sum(w.L)
    if is_vertex(tot, v.i):
        return Vertex(tot, v.i)
    upper = tot.dual().rescale(v.i)
    if not upper.contains(tot):
        return None
    cands = [
        c
        for c in _lattices_between(tot, upper)
        if is_vertex(c, v.i)
    ]
    if not cands:
        return None
    minimal = [
        c for c in cands if not any(c.contains(d) and c != d for d in cands)
    ]
    if len(minimal) != 1:
        return None
    return Vertex(minimal[0], v.i)


def stratum_dim(v: Vertex) -> int:
    return (v.t - 1) // 2


def is_irreducible_component_type(v: Vertex, n: int) -> bool:
    return v.t == t_max(n)


class BuildingBall:
    """BFS closure of a center under containment adjacency."""

    def __init__(self, center: Vertex, radius: int):
        self.center = center
        self.radius = radius
        dist = {center.key(): 0}
        verts = {center.key(): center}
        frontier = [center]
        for r in range(1, radius + 1):
            nxt = []
            for v in frontier:
                for w in neighbors(v):
                    if w.key() not in dist:
                        dist[w.key()] = r
                        verts[w.key()] = w
                        nxt.append(w)
            frontier = nxt
        self.dist = dist
        self.vertices = [verts[k] for k in sorted(verts)]
        self._adj: dict = {}

    def adjacency(self, v: Vertex) -> list[Vertex]:
        if v.key() not in self._adj:
            inside = {w.key() for w in self.vertices}
            self._adj[v.key()] = [
                w for w in neighbors(v) if w.key() in inside
            ]
        return self._adj[v.key()]


def transport_to_component(w: Vertex, i: int, space: HermitianSpace) -> Vertex:
    """Move w to L_i along the fixed identifications (p-scalings and g_1)."""
    diff = i - w.i
    n = space.n
    if diff % 2 and n % 2:
        raise DomainError("odd component shifts need even n")
    out = w
    if diff % 2:
        g1, s = g1_matrix(space)
        out = Vertex(apply_matrix(out.L, g1, s), out.i + 1)
        diff -= 1
    if diff:
        out = Vertex(out.L.rescale(diff // 2), out.i + diff)
    return out


def graph_distance(v: Vertex, w: Vertex, cap: int, space=None):
    """BFS distance within radius `cap`; raises Exceeds beyond it.

    Vertices in different components are transported to a common one via
    the fixed identifications when a space is supplied.
    """
    from .errors import Exceeds

    if v.i != w.i and space is not None:
        w = transport_to_component(w, v.i, space)
    if v.i != w.i:
        raise DomainError("vertices lie in different components")
    if v == w:
        return 0
    seen = {v.key()}
    frontier = [v]
    for r in range(1, cap + 1):
        nxt = []
        for x in frontier:
            for y in neighbors(x):
                if y == w:
                    return r
                if y.key() not in seen:
                    seen.add(y.key())
                    nxt.append(y)
        frontier = nxt
    raise Exceeds(cap, f"graph distance exceeds {cap}")


def g1_matrix(space: HermitianSpace):
    """The component-shift element of J(Q_p), as (integral matrix, scale).

    Odd n: the scalar p^-1 (shifts components by 2).  Even n: an explicit
    p-similitude of the non-split form; shipped for n = 2, where
    [[0, 1], [p, 0]] swaps the unit and p-weighted coordinates.
    """
    R = space.ring
    n = space.n
    if n % 2 == 0:
        if n != 2:
            raise DomainError("explicit g_1 is shipped for n = 2 only")
        rows = (
            (R.zero, R.one),
            (R.ppow(1), R.zero),
        )
        return rows, 0
    rows = tuple(
        tuple(R.one if a == b else R.zero for b in range(n)) for a in range(n)
    )
    return rows, 1


def apply_matrix(L: PadicLattice, mat, extra_scale: int = 0) -> PadicLattice:
    """g L for g given by (integral matrix, scale); rows act on the right."""
    R = L.ring
    rows = []
    for r in L.rows:
        out = [R.zero] * L.space.n
        for i, x in enumerate(r):
            if R.is_zero(x):
                continue
            for j in range(L.space.n):
                out[j] = R.add(out[j], R.mul(x, mat[i][j]))
        rows.append(tuple(out))
    return PadicLattice(L.space, rows, L.scale + extra_scale)


def phi_transport(v: Vertex, target_i: int, space: HermitianSpace) -> Vertex:
    """The fixed identification phi_i: L_0 -> L_i (p^(i/2) or p^((i-1)/2) g_1)."""
    if v.i != 0:
        raise DomainError("transport starts from the i = 0 component")
    i = target_i
    n = space.n
    if (i * n) % 2:
        raise DomainError("component index must have i*n even")
    if i % 2 == 0:
        return Vertex(v.L.rescale(i // 2), i)
    g1, s = g1_matrix(space)
    moved = apply_matrix(v.L, g1, s)
    return Vertex(moved.rescale((i - 1) // 2), i)
