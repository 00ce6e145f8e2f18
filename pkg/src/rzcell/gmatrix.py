"""Exact matrix arithmetic over the truncated rings, with p-power scales.

A group element is (rows, scale) representing p^-scale * rows; all entries
integral.  Inversion and similitude extraction are exact and raise
PrecisionError when the working modulus cannot certify the result.
"""

from __future__ import annotations

from .errors import DomainError, PrecisionError
from .ring import Zq


def mat_identity(R: Zq, n: int):
    return tuple(
        tuple(R.one if i == j else R.zero for j in range(n)) for i in range(n)
    ), 0


def mat_scale_p(mat_s, e: int):
    """Multiply the group element by p^e."""
    rows, s = mat_s
    return rows, s - e


def mat_mul(R: Zq, a, b):
    ra, sa = a
    rb, sb = b
    n = len(ra)
    m = len(rb[0])
    inner = len(rb)
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = R.zero
            for k in range(inner):
                x = ra[i][k]
                y = rb[k][j]
                if not R.is_zero(x) and not R.is_zero(y):
                    acc = R.add(acc, R.mul(x, y))
            row.append(acc)
        out.append(tuple(row))
    return tuple(out), sa + sb


def mat_conj_transpose(R: Zq, a):
    rows, s = a
    n = len(rows)
    m = len(rows[0])
    return tuple(
        tuple(R.conj(rows[i][j]) for i in range(n)) for j in range(m)
    ), s


def mat_normalize(R: Zq, a):
    """Canonical scale: strip common p factors into the scale, floor at 0."""
    rows, s = a
    vmin = min(
        (R.val(x) for r in rows for x in r if not R.is_zero(x)), default=0
    )
    if vmin > 0 and s > 0:
        drop = min(vmin, s)
        rows = tuple(tuple(R.divp(x, drop) for x in r) for r in rows)
        s -= drop
    if s < 0:
        rows = tuple(tuple(R.mul(R.ppow(-s), x) for x in r) for r in rows)
        s = 0
    return rows, s


def mat_det_val(R: Zq, a) -> int:
    """v_p(det) of the group element (can be negative via the scale)."""
    rows, s = a
    n = len(rows)
    work = [list(r) for r in rows]
    total = 0
    cols = list(range(n))
    rows_left = list(range(n))
    for _ in range(n):
        best = None
        for i in rows_left:
            for j in cols:
                v = R.val(work[i][j])
                if v < R.K and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            raise PrecisionError("matrix singular at working precision")
        v, pi, pj = best
        total += v
        inv = R.unit_inv(R.divp(work[pi][pj], v))
        for i in rows_left:
            if i == pi:
                continue
            x = work[i][pj]
            if not R.is_zero(x):
                q = R.mul(R.divp(x, v), inv)
                for j in cols:
                    work[i][j] = R.sub(work[i][j], R.mul(q, work[pi][j]))
        rows_left.remove(pi)
        cols.remove(pj)
    return total - n * s


def mat_inverse(R: Zq, a):
    """Exact inverse as a group element; needs v(det) within precision."""
    rows, s = a
    n = len(rows)
    work = [list(r) + [R.one if i == j else R.zero for j in range(n)]
            for i, r in enumerate(rows)]
    # forward elimination with column pivoting on the left block
    perm = list(range(n))
    t_total = 0
    for col in range(n):
        best = None
        for i in range(col, n):
            v = R.val(work[i][col])
            if v < R.K and (best is None or v < best[0]):
                best = (v, i)
        if best is None:
            raise PrecisionError("matrix singular at working precision")
        v, pi = best
        work[col], work[pi] = work[pi], work[col]
        t_total += v
        for i in range(col + 1, n):
            x = work[i][col]
            if not R.is_zero(x):
                q = R.mul(R.divp(x, v), R.unit_inv(R.divp(work[col][col], v)))
                for j in range(2 * n):
                    work[i][j] = R.sub(work[i][j], R.mul(q, work[col][j]))
    if t_total + PRECISION_GUARD_INV >= R.K:
        raise PrecisionError("inverse exceeds working precision")
    # back substitution solving U X = p^t P with t = sum of pivot valuations
    t = t_total
    X = [[R.zero] * n for _ in range(n)]
    for i in range(n - 1, -1, -1):
        e = R.val(work[i][i])
        uinv = R.unit_inv(R.divp(work[i][i], e))
        for j in range(n):
            rhs = R.mul(R.ppow(t), work[i][n + j])
            for k in range(i + 1, n):
                rhs = R.sub(rhs, R.mul(work[i][k], X[k][j]))
            X[i][j] = R.mul(R.divp(rhs, e), uinv)
    return mat_normalize(R, (tuple(tuple(r) for r in X), t - s))


PRECISION_GUARD_INV = 1


def similitude(R: Zq, gram, a):
    """c(g) as (unit, v_p) for g in the unitary similitude group of gram.

    Raises DomainError when g does not satisfy g' G conj(g)^T = c G.
    """
    rows, s = a
    n = len(rows)
    gt = mat_conj_transpose(R, a)
    m1 = mat_mul(R, (tuple(tuple(r) for r in rows), s), (gram, 0))
    m2 = mat_mul(R, m1, gt)
    got, sc = m2
    # c = got / gram entrywise; find a reference nonzero gram entry
    ref = None
    for i in range(n):
        for j in range(n):
            if not R.is_zero(gram[i][j]):
                ref = (i, j)
                break
        if ref:
            break
    gij = gram[ref[0]][ref[1]]
    target = got[ref[0]][ref[1]]
    vg = R.val(gij)
    vt = R.val(target)
    if vt < vg:
        raise DomainError("similitude with negative relative valuation")
    c = R.mul(R.divp(target, vg), R.unit_inv(R.divp(gij, vg)))
    # verify got = c * gram within the working modulus
    for i in range(n):
        for j in range(n):
            if got[i][j] != R.mul(c, gram[i][j]):
                raise DomainError("matrix is not a unitary similitude")
    # true c(g) = c_integral * p^-sc with sc the accumulated scale
    return c, R.val(c) - sc


def vp_det(R: Zq, a) -> int:
    return mat_det_val(R, a)


def in_integral_group(R: Zq, gram, a, congruence_level: int = 0) -> bool:
    """g in G(Z_p) (unit similitude, integral, unit det), optionally
    congruent to 1 mod p^m."""
    rows, s = a
    rows, s = mat_normalize(R, (rows, s))
    if s != 0:
        return False
    try:
        if mat_det_val(R, (rows, 0)) != 0:
            return False
        c, vc = similitude(R, gram, (rows, 0))
        if vc != 0:
            return False
    except (DomainError, PrecisionError):
        return False
    if congruence_level:
        n = len(rows)
        for i in range(n):
            for j in range(n):
                want = R.one if i == j else R.zero
                if R.mod_ppow(R.sub(rows[i][j], want), congruence_level) != \
                        R.mod_ppow(R.zero, congruence_level):
                    return False
    return True
