"""Exact modular and p-adic arithmetic over odd prime powers.

Everything downstream (character evaluation, complete character sums,
congruence solving) reduces to the primitives here: modular powers and
inverses, primitive roots and discrete logs of (Z/p^e)^*, the truncated
p-adic logarithm on 1 + pZ, Hensel-lifted square roots, and p-adic
valuations.  All values are plain Python integers, so moduli above the
machine-word range work transparently.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd


class NotInvertible(ArithmeticError):
    """Requested inverse of a residue that shares a factor with the modulus."""


class NotASquare(ArithmeticError):
    """Requested square root of a quadratic non-residue."""


class DomainError(ValueError):
    """Input outside the mathematical domain of the operation."""


@dataclass(frozen=True)
class Residue:
    """An integer value reduced into [0, modulus)."""

    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise DomainError(f"modulus must be >= 1, got {self.modulus}")
        object.__setattr__(self, "value", self.value % self.modulus)

    def __mul__(self, other: "Residue | int") -> "Residue":
        o = other.value if isinstance(other, Residue) else other
        if isinstance(other, Residue) and other.modulus != self.modulus:
            raise DomainError("modulus mismatch")
        return Residue(self.value * o, self.modulus)

    def __add__(self, other: "Residue | int") -> "Residue":
        o = other.value if isinstance(other, Residue) else other
        if isinstance(other, Residue) and other.modulus != self.modulus:
            raise DomainError("modulus mismatch")
        return Residue(self.value + o, self.modulus)

    def __sub__(self, other: "Residue | int") -> "Residue":
        o = other.value if isinstance(other, Residue) else other
        if isinstance(other, Residue) and other.modulus != self.modulus:
            raise DomainError("modulus mismatch")
        return Residue(self.value - o, self.modulus)

    def __neg__(self) -> "Residue":
        return Residue(-self.value, self.modulus)

    def __int__(self) -> int:
        return self.value


def is_prime(n: int) -> bool:
    """Deterministic trial-division primality test (desk-scale moduli)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorization {p: e} by trial division."""
    if n < 1:
        raise DomainError("factorize expects a positive integer")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class PrimePower:
    """An odd prime power p^e with p >= 3."""

    p: int
    e: int

    def __post_init__(self):
        if not is_prime(self.p) or self.p < 3:
            raise DomainError(f"p must be an odd prime >= 3, got {self.p}")
        if self.e < 1:
            raise DomainError(f"exponent must be positive, got {self.e}")

    @property
    def value(self) -> int:
        return self.p ** self.e

    @property
    def unit_group_order(self) -> int:
        """phi(p^e) = (p-1) p^(e-1)."""
        return (self.p - 1) * self.p ** (self.e - 1)


def pow_mod(base: Residue, exp: int) -> Residue:
    if exp < 0:
        raise DomainError("exponent must be nonnegative")
    return Residue(pow(base.value, exp, base.modulus), base.modulus)


def inv_mod(x: Residue) -> Residue:
    return Residue(inv_int(x.value, x.modulus), x.modulus)


def inv_int(x: int, m: int) -> int:
    """Inverse of x modulo m as a plain int; raises NotInvertible."""
    x %= m
    if gcd(x, m) != 1:
        raise NotInvertible(f"gcd({x}, {m}) != 1")
    return pow(x, -1, m)


def v_p(n: int, p: int) -> int:
    """Largest s with p^s | n.  Undefined (DomainError) at n = 0."""
    if n == 0:
        raise DomainError("v_p(0) is undefined")
    n = abs(n)
    s = 0
    while n % p == 0:
        n //= p
        s += 1
    return s


@lru_cache(maxsize=None)
def _primitive_root_cached(p: int, e: int) -> int:
    pp = PrimePower(p, e)
    m = pp.value
    order = pp.unit_group_order
    prime_divisors = sorted(factorize(order))
    g = 2
    while True:
        if gcd(g, p) == 1:
            if all(pow(g, order // q, m) != 1 for q in prime_divisors):
                return g
        g += 1


def primitive_root(pp: PrimePower) -> int:
    """Least generator of the cyclic group (Z/p^e)^*."""
    return _primitive_root_cached(pp.p, pp.e)


def _bsgs(g: int, h: int, m: int, order: int) -> int:
    """Baby-step giant-step for g^x = h (mod m), g of the given order."""
    step = int(order ** 0.5) + 1
    baby: dict[int, int] = {}
    cur = 1
    for j in range(step):
        if cur not in baby:
            baby[cur] = j
        cur = cur * g % m
    giant = pow(inv_int(g, m), step, m)
    y = h % m
    for i in range(step + 1):
        if y in baby:
            return (i * step + baby[y]) % order
        y = y * giant % m
    raise DomainError(f"{h} is not in the subgroup generated by {g} mod {m}")


def _dlog_prime_power_order(g: int, h: int, m: int, q: int, k: int) -> int:
    """Discrete log in the cyclic subgroup of order q^k, digit by digit."""
    x = 0
    gamma = pow(g, q ** (k - 1), m)  # order q
    for i in range(k):
        # Strip the known digits, then read off the next base-q digit.
        hi = pow(h * inv_int(pow(g, x, m), m) % m, q ** (k - 1 - i), m)
        d = _bsgs(gamma, hi, m, q)
        x += d * q ** i
    return x


def discrete_log(x: Residue, g: int, pp: PrimePower) -> int:
    """Pohlig-Hellman discrete log: returns t with g^t = x (mod p^e).

    The group order (p-1) p^(e-1) is factored; each prime-power part is
    solved by digit lifting with baby-step giant-step, then recombined by
    the Chinese remainder theorem.
    """
    m = pp.value
    if x.modulus != m:
        raise DomainError("residue modulus does not match the prime power")
    if gcd(x.value, pp.p) != 1:
        raise DomainError("discrete log of a non-unit")
    order = pp.unit_group_order
    t, mod = 0, 1
    for q, k in factorize(order).items():
        qe = q ** k
        co = order // qe
        tq = _dlog_prime_power_order(pow(g, co, m), pow(x.value, co, m), m, q, k)
        # CRT accumulation
        delta = (tq - t) % qe
        delta = delta * inv_int(mod % qe, qe) % qe
        t += mod * delta
        mod *= qe
    return t % order


def padic_log(u: Residue, pp: PrimePower) -> Residue:
    """Truncated p-adic logarithm of u = 1 (mod p), reduced mod p^r.

    Computes sum_{m>=1} (-1)^(m+1) (u-1)^m / m with the p-power of each m
    cancelled exactly against the valuation of (u-1)^m, iterating until
    three consecutive terms vanish mod p^r (term valuations are eventually
    increasing; the guard covers the small-m irregularity from p | m).
    """
    p, r = pp.p, pp.e
    pr = pp.value
    if u.modulus != pr:
        raise DomainError("residue modulus does not match the prime power")
    t = u.value % pr
    if t % p != 1 % p:
        raise DomainError("padic_log requires u = 1 (mod p)")
    t = (t - 1) % pr
    if t == 0:
        return Residue(0, pr)
    total = 0
    m = 1
    zero_run = 0
    while zero_run < 3:
        a = v_p(m, p)
        # (u-1)^m / p^a is integral since v_p((u-1)^m) >= m > a; keep the
        # extra p^a of precision before the exact division.
        num = pow(t, m, pr * p ** a)
        num //= p ** a
        mu = m // p ** a
        term = num * inv_int(mu, pr) % pr
        if m % 2 == 0:
            term = -term % pr
        if term == 0:
            zero_run += 1
        else:
            zero_run = 0
            total = (total + term) % pr
        m += 1
    return Residue(total, pr)


def _sqrt_mod_p(a: int, p: int) -> int:
    """Tonelli-Shanks square root mod an odd prime."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        raise NotASquare(f"{a} is not a quadratic residue mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Write p-1 = q 2^s with q odd.
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    c = pow(z, q, p)
    x = pow(a, (q + 1) // 2, p)
    t = pow(a, q, p)
    m = s
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        x = x * b % p
        t = t * b % p * b % p
        c = b * b % p
        m = i
    return x


def hensel_sqrt(a: Residue, pp: PrimePower) -> Residue:
    """Canonical square root of a unit square mod p^s.

    The root mod p is lifted by Newton iteration x -> x - (x^2 - a)/(2x);
    of the two roots +-x the canonical one has representative mod p in
    [1, (p-1)/2], so closed-form character sums built on it are
    reproducible.
    """
    p, s = pp.p, pp.e
    ps = pp.value
    if a.modulus != ps:
        raise DomainError("residue modulus does not match the prime power")
    if a.value % p == 0:
        raise NotASquare("hensel_sqrt requires a unit")
    x = _sqrt_mod_p(a.value, p)
    prec = 1
    while prec < s:
        prec = min(2 * prec, s)
        mod = p ** prec
        x = (x - (x * x - a.value) * inv_int(2 * x, mod)) % mod
    if x % p > (p - 1) // 2:
        x = (-x) % ps
    return Residue(x, ps)
