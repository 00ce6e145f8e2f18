"""Exact concave-polygon calculus.

A polygon is the graph of a piecewise-linear concave function on [0, w]
through (0, 0), stored by its break points with collinear breaks merged.
All coordinates are ``fractions.Fraction``; there is no floating point in
this module.

The admissible-polygon enumeration (`enumerate_newton_set`) implements the
documented rule: integral break abscissas, slopes in [0, 1], slope multiset
symmetric under s -> 1-s, a per-slope realizability condition on
denominators, and domination between the straight line of slope 1/2 and the
mu-ordinary polygon.  The realizability predicate is pluggable; see
``default_slope_admissible``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import DomainError

Q = Fraction


def _as_q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise DomainError(f"not an exact rational: {x!r}")


class ConcavePolygon:
    """Concave p.l. function on [0, w] starting at (0, 0), canonical form."""

    __slots__ = ("breaks",)

    def __init__(self, breaks: Sequence[tuple]):
        pts = [(_as_q(x), _as_q(y)) for x, y in breaks]
        if not pts or pts[0] != (Q(0), Q(0)):
            raise DomainError("polygon must start at (0, 0)")
        for (x1, _), (x2, _) in zip(pts, pts[1:]):
            if x2 <= x1:
                raise DomainError("break abscissas must strictly increase")
        # merge collinear breaks; verify strict concavity
        merged = [pts[0]]
        for pt in pts[1:]:
            while len(merged) >= 2:
                (xa, ya), (xb, yb) = merged[-2], merged[-1]
                if (yb - ya) * (pt[0] - xb) == (pt[1] - yb) * (xb - xa):
                    merged.pop()
                else:
                    break
            merged.append(pt)
        slopes = [
            (yb - ya) / (xb - xa)
            for (xa, ya), (xb, yb) in zip(merged, merged[1:])
        ]
        for s1, s2 in zip(slopes, slopes[1:]):
            if s2 >= s1:
                raise DomainError(f"slopes must strictly decrease, got {slopes}")
        self.breaks = tuple(merged)

    # -- accessors ---------------------------------------------------------

    @property
    def width(self) -> Fraction:
        return self.breaks[-1][0]

    @property
    def height(self) -> Fraction:
        return self.breaks[-1][1]

    def slopes(self) -> list[tuple[Fraction, Fraction]]:
        """(slope, width) pairs, slopes strictly decreasing."""
        out = []
        for (xa, ya), (xb, yb) in zip(self.breaks, self.breaks[1:]):
            out.append(((yb - ya) / (xb - xa), xb - xa))
        return out

    def __call__(self, x) -> Fraction:
        x = _as_q(x)
        if x < 0 or x > self.width:
            raise DomainError(f"abscissa {x} outside [0, {self.width}]")
        for (xa, ya), (xb, yb) in zip(self.breaks, self.breaks[1:]):
            if x <= xb:
                return ya + (yb - ya) * (x - xa) / (xb - xa)
        return self.breaks[-1][1]

    def __eq__(self, other):
        return isinstance(other, ConcavePolygon) and self.breaks == other.breaks

    def __hash__(self):
        return hash(self.breaks)

    def __repr__(self):
        pts = ", ".join(f"({x},{y})" for x, y in self.breaks)
        return f"ConcavePolygon[{pts}]"

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {"breaks": [[str(x), str(y)] for x, y in self.breaks]}

    @classmethod
    def from_json(cls, data: dict) -> "ConcavePolygon":
        return cls([(Q(x), Q(y)) for x, y in data["breaks"]])

    @classmethod
    def from_slopes(cls, pairs: Iterable[tuple]) -> "ConcavePolygon":
        x = Q(0)
        y = Q(0)
        breaks = [(x, y)]
        for s, w in pairs:
            s, w = _as_q(s), _as_q(w)
            if w <= 0:
                raise DomainError("slope widths must be positive")
            x += w
            y += s * w
            breaks.append((x, y))
        return cls(breaks)

    @classmethod
    def line(cls, slope, width) -> "ConcavePolygon":
        return cls.from_slopes([(slope, width)])


def envelope(points, width, height) -> ConcavePolygon:
    """Least concave function through (0,0), (w,h) dominating the points."""
    width, height = _as_q(width), _as_q(height)
    if width <= 0:
        raise DomainError("width must be positive")
    best: dict[Fraction, Fraction] = {Q(0): Q(0), width: height}
    for x, y in points:
        x, y = _as_q(x), _as_q(y)
        if x < 0 or x > width:
            raise DomainError(f"point abscissa {x} outside [0, {width}]")
        if x == 0 and y > 0:
            raise DomainError("point above the pinned left endpoint")
        if x == width and y > height:
            raise DomainError("point above the pinned right endpoint")
        if x not in best or y > best[x]:
            best[x] = y
    pts = sorted(best.items())
    # upper convex hull (monotone chain); drop b when it sits on or below
    # the chord a -> pt, so the chain stays strictly concave
    hull: list[tuple[Fraction, Fraction]] = []
    for pt in pts:
        while len(hull) >= 2:
            (xa, ya), (xb, yb) = hull[-2], hull[-1]
            if (yb - ya) * (pt[0] - xa) <= (pt[1] - ya) * (xb - xa):
                hull.pop()
            else:
                break
        hull.append(pt)
    return ConcavePolygon(hull)


def leq(P: ConcavePolygon, Q_: ConcavePolygon) -> bool:
    """P(x) <= Q(x) on the common interval; widths must agree."""
    if P.width != Q_.width:
        raise DomainError("polygon widths differ")
    xs = sorted({x for x, _ in P.breaks} | {x for x, _ in Q_.breaks})
    return all(P(x) <= Q_(x) for x in xs)


def normalize(P: ConcavePolygon, d: int) -> ConcavePolygon:
    """x -> P(d x)/d on [0, w/d]; slopes kept, widths divided by d."""
    if d < 1:
        raise DomainError("normalization factor must be a positive integer")
    return ConcavePolygon([(x / d, y / d) for x, y in P.breaks])


def dual(P: ConcavePolygon) -> ConcavePolygon:
    """Slope multiset reflected by s -> 1-s; an involution."""
    pairs = P.slopes()
    for s, _ in pairs:
        if s < 0 or s > 1:
            raise DomainError(f"dual needs slopes in [0,1], got {s}")
    return ConcavePolygon.from_slopes(
        [(1 - s, w) for s, w in reversed(pairs)]
    )


def contact_points(P: ConcavePolygon, Q_: ConcavePolygon) -> list[tuple]:
    """{x : P(x) = Q(x)} as a list of closed intervals [a, b] (a = b allowed).

    Requires P <= Q with the same endpoints, so 0 and w are always contacts.
    """
    if P.width != Q_.width or P.height != Q_.height:
        raise DomainError("contact points need matching endpoints")
    if not leq(P, Q_):
        raise DomainError("contact points require P <= Q")
    xs = sorted({x for x, _ in P.breaks} | {x for x, _ in Q_.breaks})
    intervals = []
    for x1, x2 in zip(xs, xs[1:]):
        e1 = P(x1) == Q_(x1)
        e2 = P(x2) == Q_(x2)
        if e1 and e2:
            intervals.append((x1, x2))
        elif e1:
            intervals.append((x1, x1))
        elif e2:
            intervals.append((x2, x2))
    merged: list[list] = []
    for a, b in intervals:
        if merged and merged[-1][1] >= a:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def hodge_unitary(n: int) -> ConcavePolygon:
    """The mu-ordinary polygon [0,n] -> [0,n/2]."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if n == 1:
        return ConcavePolygon.line(Q(1, 2), 1)
    if n == 2:
        return ConcavePolygon.from_slopes([(1, 1), (0, 1)])
    return ConcavePolygon.from_slopes([(1, 1), (Q(1, 2), n - 2), (0, 1)])


def default_slope_admissible(slope: Fraction, mult: int) -> bool:
    """Realizability of one slope block in a polarized Z_{p^2}-isocrystal.

    A slope s/r (lowest terms) of normalized multiplicity m comes from an
    isotypic piece of p-height 2m, so r must divide 2m.  This is the
    documented, swappable part of the enumeration rule.
    """
    return (2 * mult) % slope.denominator == 0


def enumerate_newton_set(
    n: int,
    slope_admissible: Callable[[Fraction, int], bool] = default_slope_admissible,
) -> list[ConcavePolygon]:
    """All admissible polygons [0,n] -> [0,n/2], lexicographic in slopes.

    Rule: integral break abscissas; slopes within [0,1]; the slope multiset
    is invariant under s -> 1-s; every slope block passes
    ``slope_admissible``; the polygon lies between the slope-1/2 line and
    the mu-ordinary polygon.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    hodge = hodge_unitary(n)
    line = ConcavePolygon.line(Q(1, 2), n)
    results = []

    candidates = sorted(
        {
            Q(num, den)
            for den in range(1, 2 * n + 1)
            for num in range(den // 2 + 1, den + 1)
        }
        - {Q(1, 2)},
        reverse=True,
    )

    def upper_blocks(width_left, last_slope, acc):
        # blocks with slopes in (1/2, 1], strictly decreasing along the
        # recursion; the lower half is the mirror image
        yield list(acc)
        if width_left == 0:
            return
        for m in range(1, width_left + 1):
            for s in candidates:
                if s >= last_slope:
                    continue
                if not slope_admissible(s, m):
                    continue
                acc.append((s, m))
                yield from upper_blocks(width_left - m, s, acc)
                acc.pop()

    seen_keys = set()
    for blocks in upper_blocks(n // 2, Q(2), []):
        key = tuple(blocks)
        if key in seen_keys:
            continue
        seen_keys.add(key)
        used = sum(m for _, m in blocks)
        mid = n - 2 * used
        if mid < 0:
            continue
        if mid > 0 and not slope_admissible(Q(1, 2), mid):
            continue
        pairs = list(blocks)
        if mid > 0:
            pairs.append((Q(1, 2), mid))
        pairs += [(1 - s, m) for s, m in reversed(blocks)]
        poly = ConcavePolygon.from_slopes(pairs)
        if leq(line, poly) and leq(poly, hodge):
            results.append(poly)
    results.sort(key=lambda P: sorted(((-s, w) for s, w in P.slopes())))
    return results


def stratification_coincidence_check(n: int) -> bool:
    """Every non-basic admissible polygon touches the mu-ordinary polygon
    at some interior abscissa."""
    if n < 1:
        raise DomainError("n must be >= 1")
    hodge = hodge_unitary(n)
    line = ConcavePolygon.line(Q(1, 2), n)
    for poly in enumerate_newton_set(n):
        if poly == line:
            continue
        contacts = contact_points(poly, hodge)
        interior = any(
            (a < n and b > 0) and not (a == b == 0) and not (a == b == n)
            for a, b in contacts
        )
        if not interior:
            return False
    return True
