"""Truncated unramified p-adic arithmetic.

``Zq(p, K, deg)`` models Z_p / p^K (deg 1) or Z_{p^2} / p^K (deg 2, the
Galois ring Z/p^K[u]/(u^2 - c) for a fixed quadratic non-residue c).  With
K = 1 the same class is the residue field F_p or F_{p^2}.

Elements are plain ints (deg 1) or 2-tuples (a, b) meaning a + b*u (deg 2),
always reduced mod p^K.  All operations are exact; p must be odd whenever
deg = 2 (conjugation needs 2 invertible).
"""

from __future__ import annotations

from .errors import DomainError


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def smallest_nonresidue(p: int) -> int:
    """Smallest quadratic non-residue mod an odd prime p."""
    for c in range(2, p):
        if pow(c, (p - 1) // 2, p) == p - 1:
            return c
    raise DomainError(f"no quadratic non-residue found for p={p}")


class Zq:
    """The ring Z_{p^deg} / p^K in a fixed basis (1, u), u^2 = c."""

    def __init__(self, p: int, K: int, deg: int = 1):
        if not is_prime(p):
            raise DomainError(f"p={p} is not prime")
        if deg not in (1, 2):
            raise DomainError("deg must be 1 or 2")
        if deg == 2 and p == 2:
            raise DomainError("p must be odd for the quadratic extension")
        if K < 1:
            raise DomainError("precision K must be >= 1")
        self.p = p
        self.K = K
        self.deg = deg
        self.mod = p ** K
        self.c = smallest_nonresidue(p) if deg == 2 else 0
        self.zero = 0 if deg == 1 else (0, 0)
        self.one = 1 if deg == 1 else (1, 0)
        self._ppows = [p ** i for i in range(K + 1)]

    # -- constructors -------------------------------------------------

    def from_int(self, n: int):
        if self.deg == 1:
            return n % self.mod
        return (n % self.mod, 0)

    def make(self, a: int, b: int = 0):
        if self.deg == 1:
            if b:
                raise DomainError("no u-component in the unramified-degree-1 ring")
            return a % self.mod
        return (a % self.mod, b % self.mod)

    def ppow(self, e: int):
        return self.from_int(self._ppows[e])

    # -- arithmetic ----------------------------------------------------

    def add(self, x, y):
        if self.deg == 1:
            return (x + y) % self.mod
        return ((x[0] + y[0]) % self.mod, (x[1] + y[1]) % self.mod)

    def sub(self, x, y):
        if self.deg == 1:
            return (x - y) % self.mod
        return ((x[0] - y[0]) % self.mod, (x[1] - y[1]) % self.mod)

    def neg(self, x):
        if self.deg == 1:
            return (-x) % self.mod
        return ((-x[0]) % self.mod, (-x[1]) % self.mod)

    def mul(self, x, y):
        if self.deg == 1:
            return (x * y) % self.mod
        a, b = x
        e, f = y
        return ((a * e + b * f * self.c) % self.mod, (a * f + b * e) % self.mod)

    def conj(self, x):
        """Galois conjugation: the lift of Frobenius, u -> -u."""
        if self.deg == 1:
            return x
        return (x[0], (-x[1]) % self.mod)

    def is_zero(self, x) -> bool:
        return x == 0 if self.deg == 1 else x == (0, 0)

    # -- valuation and division ----------------------------------------

    def val(self, x) -> int:
        """p-adic valuation, capped at K (val(0) = K)."""
        if self.deg == 1:
            a = x
            if a == 0:
                return self.K
            v = 0
            while a % self.p == 0:
                a //= self.p
                v += 1
            return v
        a, b = x
        if a == 0 and b == 0:
            return self.K
        v = 0
        while a % self.p == 0 and b % self.p == 0:
            a //= self.p
            b //= self.p
            v += 1
        return v

    def divp(self, x, e: int):
        """Exact division by p^e; caller guarantees val(x) >= e."""
        q = self._ppows[e]
        if self.deg == 1:
            if x % q:
                raise DomainError("inexact division by p^e")
            return x // q
        a, b = x
        if a % q or b % q:
            raise DomainError("inexact division by p^e")
        return (a // q, b // q)

    def mod_ppow(self, x, e: int):
        """Componentwise reduction mod p^e (canonical representative)."""
        q = self._ppows[e]
        if self.deg == 1:
            return x % q
        return (x[0] % q, x[1] % q)

    def quo_ppow(self, x, e: int):
        """Componentwise quotient q with x = q*p^e + (x mod p^e)."""
        q = self._ppows[e]
        if self.deg == 1:
            return x // q
        return (x[0] // q, x[1] // q)

    def unit_inv(self, x):
        """Inverse of a unit (val(x) = 0)."""
        if self.deg == 1:
            return pow(x, -1, self.mod)
        a, b = x
        n = (a * a - b * b * self.c) % self.mod  # norm, a unit
        ninv = pow(n, -1, self.mod)
        return ((a * ninv) % self.mod, (-b * ninv) % self.mod)

    def norm(self, x):
        """Norm to Z/p^K: x * conj(x)."""
        if self.deg == 1:
            return (x * x) % self.mod
        a, b = x
        return (a * a - b * b * self.c) % self.mod

    def trace(self, x):
        if self.deg == 1:
            return (2 * x) % self.mod
        return (2 * x[0]) % self.mod

    # -- enumeration (small rings only) ---------------------------------

    def elements(self):
        if self.deg == 1:
            return range(self.mod)
        return ((a, b) for a in range(self.mod) for b in range(self.mod))

    def units(self):
        return (x for x in self.elements() if self.val(x) == 0)

    def residue_field(self) -> "Zq":
        return Zq(self.p, 1, self.deg)

    def reduce_to(self, other: "Zq", x):
        """Push x into a lower-precision copy of the same ring."""
        if other.p != self.p or other.deg != self.deg or other.K > self.K:
            raise DomainError("incompatible ring reduction")
        return self.mod_ppow(x, other.K) if other.K < self.K else x

    @property
    def size(self) -> int:
        return self.mod ** self.deg

    def __repr__(self):
        base = "Z" if self.deg == 1 else f"Z[u|u^2={self.c}]"
        return f"{base}/{self.p}^{self.K}"

    def __eq__(self, other):
        return (
            isinstance(other, Zq)
            and (self.p, self.K, self.deg) == (other.p, other.K, other.deg)
        )

    def __hash__(self):
        return hash((self.p, self.K, self.deg))
