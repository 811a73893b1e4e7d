"""Primitive Dirichlet characters of odd prime-power conductor.

A character mod p^r is stored as (generator g, index c): chi(g^t) =
e(c t / phi(p^r)).  Evaluation goes through the discrete log, with a
memoized log table for moduli below a configurable size so that scans can
evaluate chi at millions of points.  Root-of-unity values are kept exact
(reduced fractions of the exponent) wherever an identity is tested
exactly; complex values are reserved for sums.

The quadratic expansion of chi on the subgroup 1 + p^(r-s) Z (valid for
s <= 2r/3) is solved from two evaluations and then verified on the whole
subgroup, so an invalid depth is detected rather than silently accepted.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import cached_property
from math import fsum, gcd

import numpy as np

from .modarith import (
    DomainError,
    PrimePower,
    Residue,
    discrete_log,
    inv_int,
    padic_log,
    primitive_root,
)


class NotPrimitive(ValueError):
    """The (generator, index) pair induces a character of smaller conductor."""


class ExpansionInvalid(ArithmeticError):
    """The quadratic expansion identity failed on the full subgroup."""


@dataclass(frozen=True)
class UnityRoot:
    """Exact root of unity e(num/den), stored as a reduced fraction."""

    num: int
    den: int

    def __post_init__(self):
        if self.den < 1:
            raise DomainError("denominator must be positive")
        n = self.num % self.den
        g = gcd(n, self.den)
        object.__setattr__(self, "num", n // g)
        object.__setattr__(self, "den", self.den // g)

    def __mul__(self, other: "UnityRoot") -> "UnityRoot":
        return UnityRoot(self.num * other.den + other.num * self.den,
                         self.den * other.den)

    def __pow__(self, k: int) -> "UnityRoot":
        return UnityRoot(self.num * k, self.den)

    def conj(self) -> "UnityRoot":
        return UnityRoot(-self.num, self.den)

    def as_complex(self) -> complex:
        return cmath.exp(2j * cmath.pi * self.num / self.den)

    def exponent_mod(self, den: int) -> int:
        """Numerator rescaled to the denominator den (which self.den must divide)."""
        if den % self.den != 0:
            raise DomainError(f"e({self.num}/{self.den}) has no exponent mod {den}")
        return self.num * (den // self.den) % den


ONE = UnityRoot(0, 1)


def additive_char(num: int, den: int) -> UnityRoot:
    """e(num/den), reduced."""
    return UnityRoot(num, den)


@dataclass(frozen=True)
class DirichletCharacter:
    """Primitive character mod p^r given by chi(g^t) = e(index*t/phi(p^r))."""

    pp: PrimePower
    g: int
    index: int
    log_table_limit: int = 10 ** 7

    @property
    def modulus(self) -> int:
        return self.pp.value

    @property
    def order_den(self) -> int:
        return self.pp.unit_group_order

    @cached_property
    def _log_table(self) -> np.ndarray | None:
        """dlog(n) for every unit n mod p^r, or None above the size limit."""
        m = self.modulus
        if m > self.log_table_limit:
            return None
        table = np.full(m, -1, dtype=np.int64)
        cur, t = 1, 0
        phi = self.order_den
        while t < phi:
            table[cur] = t
            cur = cur * self.g % m
            t += 1
        return table

    def dlog(self, n: int) -> int:
        """Discrete log of a unit n to base g; DomainError on non-units."""
        n %= self.modulus
        table = self._log_table
        if table is not None:
            t = int(table[n])
            if t < 0:
                raise DomainError(f"{n} is not a unit mod {self.modulus}")
            return t
        return discrete_log(Residue(n, self.modulus), self.g, self.pp)

    def eval(self, n: int) -> UnityRoot | None:
        """chi(n) as an exact root of unity; None encodes the zero value."""
        if gcd(n, self.pp.p) != 1:
            return None
        return UnityRoot(self.index * self.dlog(n), self.order_den)

    def value(self, n: int) -> complex:
        w = self.eval(n)
        return 0j if w is None else w.as_complex()

    @cached_property
    def values_array(self) -> np.ndarray:
        """chi(n) for n = 0..p^r-1 as complex128 (zeros at non-units)."""
        m = self.modulus
        table = self._log_table
        if table is None:
            raise DomainError("values_array requires the memoized log table")
        vals = np.zeros(m, dtype=np.complex128)
        units = table >= 0
        angle = 2.0 * np.pi * ((self.index * table[units]) % self.order_den) / self.order_den
        vals[units] = np.exp(1j * angle)
        return vals

    def conj_character(self) -> "DirichletCharacter":
        return DirichletCharacter(self.pp, self.g, -self.index % self.order_den,
                                  self.log_table_limit)

    @cached_property
    def gauss_sum(self) -> complex:
        """tau_chi = sum_{beta mod p^r} chi(beta) e(beta/p^r), compensated."""
        m = self.modulus
        terms = []
        for beta in range(1, m):
            w = self.eval(beta)
            if w is None:
                continue
            terms.append((w * UnityRoot(beta, m)).as_complex())
        return complex(fsum(t.real for t in terms), fsum(t.imag for t in terms))


def make_character(p: int, r: int, index: int,
                   log_table_limit: int = 10 ** 7) -> DirichletCharacter:
    """Construct the primitive character mod p^r with the given index.

    Primitivity is verified by direct evaluation: for r >= 2 the character
    must be nontrivial somewhere on 1 + p^(r-1) Z, for r = 1 it must be
    nonprincipal.
    """
    pp = PrimePower(p, r)
    g = primitive_root(pp)
    chi = DirichletCharacter(pp, g, index % pp.unit_group_order, log_table_limit)
    if r == 1:
        if chi.index == 0:
            raise NotPrimitive("principal character mod p is not primitive")
        return chi
    sub = p ** (r - 1)
    if all(chi.eval(1 + z * sub) == ONE for z in range(1, p)):
        raise NotPrimitive(f"character has conductor smaller than {p}^{r}")
    return chi


def gauss_sum(chi: DirichletCharacter) -> complex:
    return chi.gauss_sum


@dataclass(frozen=True)
class CharacterExpansion:
    """Quadratic data of chi on 1 + p^(r-s) Z.

    chi(1 + z p^(r-s)) = e((-b1 z^2 - a2 z)/p^s) for all z mod p^s; a2 is a
    unit.  b1 is the combined quadratic coefficient (only the combination
    entering the mod-p^s phase is identifiable from chi).  a0 is the unit
    with chi(u) = e(a0 L(u)/p^r) on u = 1 (mod p), L the p-adic log.
    """

    pp: PrimePower
    s: int
    a2: Residue
    b1: Residue
    a0: Residue


def _subgroup_exponent(chi: DirichletCharacter, z: int, s: int) -> int:
    """Exponent E with chi(1 + z p^(r-s)) = e(E/p^s); ExpansionInvalid if the
    value is not a p^s-th root of unity."""
    p, r = chi.pp.p, chi.pp.e
    w = chi.eval(1 + z * p ** (r - s))
    if w is None:
        raise ExpansionInvalid("subgroup element is not a unit")
    ps = p ** s
    if ps % w.den != 0:
        raise ExpansionInvalid(
            f"chi(1+{z}p^{r - s}) has order {w.den}, not dividing p^{s}")
    return w.exponent_mod(ps)


def postnikov_coeffs(chi: DirichletCharacter, s: int,
                     n_a0_checks: int = 10, rng_seed: int = 1) -> CharacterExpansion:
    """Solve and verify the quadratic expansion of chi at depth s.

    The pair (a2, b1) is solved from the evaluations at z = 1, 2 (the 2x2
    system is invertible since p is odd) and the identity is then checked
    for every z mod p^s by exact exponent comparison.  a0 comes from one
    discrete log on the generator 1 + p of the principal units and is
    re-verified on random units.
    """
    p, r = chi.pp.p, chi.pp.e
    if r < 2:
        raise DomainError("expansion needs r >= 2")
    if not 1 <= s < r:
        raise DomainError(f"depth s must satisfy 1 <= s < r, got {s}")
    ps = p ** s
    e1 = _subgroup_exponent(chi, 1, s)
    e2 = _subgroup_exponent(chi, 2, s)
    # -b1 - a2 = e1, -4 b1 - 2 a2 = e2  (mod p^s)
    b1 = (2 * e1 - e2) * inv_int(2, ps) % ps
    a2 = (-e1 - b1) % ps
    for z in range(ps):
        if _subgroup_exponent(chi, z, s) != (-b1 * z * z - a2 * z) % ps:
            raise ExpansionInvalid(
                f"quadratic expansion fails at z={z} (depth s={s}, r={r})")
    if a2 % p == 0:
        raise ExpansionInvalid("linear coefficient a2 is not a unit")

    # a0 from the generator 1+p of 1+pZ: chi(1+p) = e(d/p^(r-1)) and
    # L(1+p) = p*w with w a unit, so a0 = d * w^(-1) mod p^(r-1).
    pr = p ** r
    u0 = 1 + p
    w0 = chi.eval(u0)
    if w0 is None or p ** (r - 1) % w0.den != 0:
        raise ExpansionInvalid("chi(1+p) is not a p-power root of unity")
    d = w0.exponent_mod(p ** (r - 1))
    lam = padic_log(Residue(u0, pr), chi.pp).value
    wunit = lam // p
    a0 = d * inv_int(wunit, p ** (r - 1)) % p ** (r - 1)

    rng = np.random.default_rng(rng_seed)
    for _ in range(n_a0_checks):
        u = (1 + p * int(rng.integers(0, p ** (r - 1)))) % pr
        if u == 1:
            continue
        lhs = chi.eval(u)
        lam_u = padic_log(Residue(u, pr), chi.pp).value
        if lhs != UnityRoot(a0 * lam_u, pr):
            raise ExpansionInvalid("a0 parametrization failed on a random unit")

    return CharacterExpansion(chi.pp, s, Residue(a2, ps), Residue(b1, ps),
                              Residue(a0, pr))
