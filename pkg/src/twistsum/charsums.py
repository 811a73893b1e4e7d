"""Complete character sums: brute-force oracles and closed-form evaluators.

Each complete sum that the decomposition evaluates in closed form is
implemented twice: a brute-force oracle that sums the defining expression
term by term, and the closed form.  The two paths share nothing beyond
the modular-arithmetic primitives, so a bug in one cannot hide in the
other; the oracle-equivalence tests compare them exactly.

Sums covered:

* C(a, b, q, m) = sum_{beta mod p^r q} chi(beta)
      e(-(a+bq) beta / (p^ell q) + m beta / (p^r q)),
  whose closed form is q chi(q) conj(chi)(m - (a+bq) p^(r-ell)) tau_chi
  on the support a = m inv(p^(r-ell)) (mod q), gcd(m, p) = 1, and zero
  elsewhere (the branch with q coprime to p).

* The quadratic "alpha" sum over units alpha mod p^s of
  e((Y1 alpha^2 + Y2 alpha)/p^r), Y1, Y2 built from the expansion of chi
  and a pair of unit inverses.  The closed evaluation p^s * [m1 = m2 mod
  p^s] is exact for the complete sum (all alpha); the unit restriction
  contributes a measurable slack that is reported, not asserted.

* The nonzero-frequency sum over units alpha mod p^s (s even) of
      conj(chi)(r1 q1 - (nbar q2 + alpha) p^(r-s)) *
      chi(r2 q2 + (nbar q1 - q1 inv(invalpha q2 + n)) p^(r-s)).
  Substituting t = alpha + nbar q2 collapses it, after summing the upper
  half of the t-digits, to

      p^(s/2) conj(chi)(r1 q1) chi(r2 q2) *
          sum_t e(psi(t) / p^s),
      psi(t) = b1 R1b^2 t^2 - a2 R1b t - b1 K^2 tb^2 - a2 K tb,

  where R1b = inv(r1 q1), K = q1 q2 nbar^2 inv(r2 q2), and t runs over
  the solutions of t^2 = q1^2 nbar^2 r1 inv(r2) (mod p^(s/2)) with
  t != nbar q2 (mod p).  The sum is empty unless r2 inv(r1) is a square
  mod p.  Generically both square roots survive and both contribute; the
  evaluator reports which roots entered so comparisons against the oracle
  can record the per-instance root bookkeeping.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from math import gcd

import numpy as np

from .characters import CharacterExpansion, DirichletCharacter, UnityRoot
from .modarith import (
    DomainError,
    NotASquare,
    PrimePower,
    Residue,
    hensel_sqrt,
    inv_int,
)
from .params import PipelineParams


class NotCoprime(ArithmeticError):
    """A congruence solve hit a shared factor excluded from the sum."""


@dataclass(frozen=True)
class CongruenceContext:
    """Arguments (a, b, q, m) of the post-Poisson character sum.

    q must be coprime to p (the branch the pipeline exercises).  The
    closed form is supported on a = m inv(p^(r-ell)) mod q with
    gcd(m, p) = 1; arbitrary (a, b, m) are accepted so the vanishing set
    can be scanned.
    """

    params: PipelineParams
    q: int
    a: int
    b: int
    m: int

    def __post_init__(self):
        if self.q < 1 or gcd(self.q, self.params.p) != 1:
            raise DomainError(f"q must be positive and coprime to p, got {self.q}")


def charsum_C_bruteforce(ctx: CongruenceContext, chi: DirichletCharacter) -> complex:
    """Direct summation of C(a, b, q, m) over beta mod p^r q."""
    p, r, ell, q = ctx.params.p, ctx.params.r, ctx.params.ell, ctx.q
    pr = p ** r
    pl = p ** ell
    mod = pr * q
    beta = np.arange(mod, dtype=np.int64)
    chi_vals = chi.values_array[beta % pr]
    c = (ctx.a + ctx.b * q) % (pl * q)
    phase1 = np.exp(-2j * np.pi * ((c * beta) % (pl * q)) / (pl * q))
    phase2 = np.exp(2j * np.pi * ((ctx.m % mod) * beta % mod) / mod)
    return complex(np.sum(chi_vals * phase1 * phase2))


def charsum_C_bruteforce_scan(ctx_base: CongruenceContext, chi: DirichletCharacter,
                              m_values: np.ndarray) -> np.ndarray:
    """Brute-force C for a whole vector of m at fixed (a, b, q)."""
    p, r, ell, q = ctx_base.params.p, ctx_base.params.r, ctx_base.params.ell, ctx_base.q
    pr = p ** r
    pl = p ** ell
    mod = pr * q
    beta = np.arange(mod, dtype=np.int64)
    chi_vals = chi.values_array[beta % pr]
    c = (ctx_base.a + ctx_base.b * q) % (pl * q)
    phase1 = np.exp(-2j * np.pi * ((c * beta) % (pl * q)) / (pl * q))
    v = chi_vals * phase1
    em = np.exp(2j * np.pi * np.outer(np.asarray(m_values, dtype=np.int64) % mod, beta)
                % (mod * 1.0) / mod)
    return em @ v


def charsum_C_closed(ctx: CongruenceContext, chi: DirichletCharacter) -> complex:
    """Closed form of C(a, b, q, m): supported on one congruence class."""
    p, r, ell, q, m = ctx.params.p, ctx.params.r, ctx.params.ell, ctx.q, ctx.m
    if m % p == 0:
        return 0j
    if (ctx.a - m * inv_int(p ** (r - ell), q)) % q != 0:
        return 0j
    arg = m - (ctx.a + ctx.b * q) * p ** (r - ell)
    w = chi.eval(q)
    wbar = chi.eval(arg)
    if w is None or wbar is None:
        return 0j
    return q * (w * wbar.conj()).as_complex() * chi.gauss_sum


def _alpha_phase_numerators(m1: int, m2: int, exp: CharacterExpansion) -> tuple[int, int, int]:
    """(y1, y2, p^s) with the alpha-sum phase equal to
    (y1 alpha^2 + y2 alpha) p^(r-s) / p^r = (y1 alpha^2 + y2 alpha)/p^s."""
    p = exp.pp.p
    ps = p ** exp.s
    m1b = inv_int(m1, ps)
    m2b = inv_int(m2, ps)
    y1 = exp.b1.value * (m2b * m2b - m1b * m1b) % ps
    y2 = exp.a2.value * (m1b - m2b) % ps
    return y1, y2, ps


def alpha_quadratic_gauss_bruteforce(m1: int, m2: int, exp: CharacterExpansion) -> complex:
    """Unit-restricted quadratic sum, exactly as it arises from the
    zero-frequency character product."""
    p = exp.pp.p
    y1, y2, ps = _alpha_phase_numerators(m1, m2, exp)
    tot = 0j
    for alpha in range(ps):
        if alpha % p == 0:
            continue
        tot += UnityRoot(y1 * alpha * alpha + y2 * alpha, ps).as_complex()
    return tot


def alpha_quadratic_gauss_complete(m1: int, m2: int, exp: CharacterExpansion) -> complex:
    """Same phase summed over all alpha mod p^s (the completed rewrite)."""
    y1, y2, ps = _alpha_phase_numerators(m1, m2, exp)
    tot = 0j
    for alpha in range(ps):
        tot += UnityRoot(y1 * alpha * alpha + y2 * alpha, ps).as_complex()
    return tot


def alpha_quadratic_gauss_closed(m1: int, m2: int, exp: CharacterExpansion) -> float:
    """p^s when m1 = m2 (mod p^s), else 0."""
    ps = exp.pp.p ** exp.s
    return float(ps) if (m1 - m2) % ps == 0 else 0.0


def solve_nonzero_congruences(q1: int, q2: int, n: int, alpha1: int,
                              params: PipelineParams) -> tuple[Residue, Residue, Residue]:
    """Solve the nonzero-frequency congruences for (alpha2, m1, m2).

    alpha2 = q1 inv(inv(alpha1) q2 + n) mod p^s,
    m1 = -inv(n) p^(r-s) q2 mod q1,  m2 = inv(n) p^(r-s) q1 mod q2.
    Raises NotCoprime when inv(alpha1) q2 + n is divisible by p or when
    gcd(n, q1 q2) > 1 (such terms are excluded from the dual sum).
    """
    p, r, s = params.p, params.r, params.s
    ps = p ** s
    if n == 0:
        raise DomainError("zero frequency is handled separately")
    if gcd(n, q1 * q2) != 1:
        raise NotCoprime(f"gcd(n, q1 q2) > 1 for n={n}")
    if alpha1 % p == 0:
        raise DomainError("alpha1 must be a unit")
    a1b = inv_int(alpha1, ps)
    u = (a1b * q2 + n) % ps
    if u % p == 0:
        raise NotCoprime("inv(alpha1) q2 + n is not a unit mod p")
    alpha2 = q1 * inv_int(u, ps) % ps
    prs = p ** (r - s)
    m1 = (-inv_int(n, q1) * prs * q2) % q1 if q1 > 1 else 0
    m2 = (inv_int(n, q2) * prs * q1) % q2 if q2 > 1 else 0

    # Round-trip both congruences.
    a2b = inv_int(alpha2, ps)
    assert (a1b * q2 - a2b * q1 + n) % ps == 0
    if q1 > 1 and m1:
        assert (prs * inv_int(m1, q1) * q2 + n) % q1 == 0
    if q2 > 1 and m2:
        assert (-prs * inv_int(m2, q2) * q1 + n) % q2 == 0
    return Residue(alpha2, ps), Residue(m1, max(q1, 1)), Residue(m2, max(q2, 1))


@dataclass(frozen=True)
class NonzeroFreqParams:
    """Arguments of the nonzero-frequency alpha-sum.

    r1, r2 parametrize m1 = -nbar p^(r-s) q2 + r1 q1 and
    m2 = nbar p^(r-s) q1 + r2 q2 with nbar the representative of inv(n)
    mod p^s; q1, q2, r1, r2 and n are coprime to p.
    """

    q1: int
    q2: int
    r1: int
    r2: int
    n: int
    expansion: CharacterExpansion

    def __post_init__(self):
        p = self.expansion.pp.p
        if self.expansion.s % 2 != 0 or self.expansion.s < 2:
            raise DomainError("depth s must be even and >= 2")
        for name, v in (("q1", self.q1), ("q2", self.q2),
                        ("r1", self.r1), ("r2", self.r2), ("n", self.n)):
            if v % p == 0:
                raise DomainError(f"{name} must be coprime to p")
        if self.n == 0:
            raise DomainError("n must be nonzero")


def nonzero_charsum_bruteforce(np_: NonzeroFreqParams, chi: DirichletCharacter) -> complex:
    """Direct summation over units alpha mod p^s with inv(alpha)q2 + n a unit."""
    exp = np_.expansion
    p, r = chi.pp.p, chi.pp.e
    s = exp.s
    ps = p ** s
    prs = p ** (r - s)
    nbar = inv_int(np_.n, ps)
    tot = 0j
    for alpha in range(ps):
        if alpha % p == 0:
            continue
        abar = inv_int(alpha, ps)
        u = (abar * np_.q2 + np_.n) % ps
        if u % p == 0:
            continue
        arg1 = np_.r1 * np_.q1 - (nbar * np_.q2 + alpha) * prs
        arg2 = np_.r2 * np_.q2 + (nbar * np_.q1 - np_.q1 * inv_int(u, ps)) * prs
        w1 = chi.eval(arg1)
        w2 = chi.eval(arg2)
        if w1 is None or w2 is None:
            continue
        tot += (w1.conj() * w2).as_complex()
    return tot


def nonzero_charsum_root_terms(np_: NonzeroFreqParams,
                               chi: DirichletCharacter) -> tuple[complex, dict[int, int]]:
    """Prefactor and per-root phase numerators of the closed form.

    Returns (prefactor, {root_sign: psi}) where the closed value is
    prefactor * sum over surviving roots of e(psi / p^s).  The dict is
    empty when r2 inv(r1) is a non-residue mod p or both roots fall in
    the excluded class t = nbar q2 (mod p).
    """
    exp = np_.expansion
    p, r = chi.pp.p, chi.pp.e
    s = exp.s
    ps = p ** s
    ps2 = p ** (s // 2)
    a = exp.a2.value
    b = exp.b1.value
    nbar = inv_int(np_.n, ps)
    R1 = np_.r1 * np_.q1
    R2 = np_.r2 * np_.q2
    R1b = inv_int(R1, ps)
    K = np_.q1 * np_.q2 % ps * nbar % ps * nbar % ps * inv_int(R2, ps) % ps
    w_excl = nbar * np_.q2 % p

    pref = p ** (s // 2) * (chi.eval(R1).conj() * chi.eval(R2)).as_complex()
    cls = np_.r2 * inv_int(np_.r1, p) % p
    if pow(cls, (p - 1) // 2, p) != 1:
        return pref, {}
    rho = hensel_sqrt(Residue(np_.r1 * inv_int(np_.r2, ps2), ps2),
                      PrimePower(p, s // 2)).value
    terms: dict[int, int] = {}
    for sign in (+1, -1):
        t = sign * np_.q1 * nbar * rho % ps2
        if t % p == w_excl:
            continue
        tb = inv_int(t, ps)
        psi = (b * R1b % ps * R1b % ps * t % ps * t
               - a * R1b % ps * t
               - b * K % ps * K % ps * tb % ps * tb
               - a * K % ps * tb) % ps
        terms[sign] = psi
    return pref, terms


def nonzero_charsum_closed(np_: NonzeroFreqParams, chi: DirichletCharacter) -> complex:
    """Closed evaluation of the nonzero-frequency sum (0 on the non-square
    class, else the root-term sum)."""
    pref, terms = nonzero_charsum_root_terms(np_, chi)
    if not terms:
        return 0j
    ps = chi.pp.p ** np_.expansion.s
    return pref * sum(cmath.exp(2j * cmath.pi * psi / ps) for psi in terms.values())


def split_identity_check(a: int, b: int, q: int, ell: int, ell1: int, n: int,
                         params: PipelineParams) -> bool:
    """Exact check of the two-term split of the dual additive character.

    With alpha = (a+bq)/p^ell1 and m = a p^(r-ell) mod q, tests

        e(-inv(alpha) n / (p^(ell-ell1) q))
        = e(-inv(alpha) inv(q) n / p^(ell-ell1))
          * e(-inv(m) p^r inv(p^(2(ell-ell1))) n / q)

    as exact roots of unity (inverses taken in the factor moduli).
    """
    p, r = params.p, params.r
    c = a + b * q
    from .modarith import v_p
    if min(v_p(c, p) if c else ell, ell) != ell1:
        raise DomainError(f"(a+bq, p^ell) must be exactly p^{ell1}")
    if gcd(a, q) != 1 and q > 1:
        raise DomainError("a must be a unit mod q")
    s = ell - ell1
    ps = p ** s
    alpha = c // p ** ell1
    lhs = UnityRoot(-inv_int(alpha, ps * q) * n, ps * q)
    m = a * p ** (r - ell) % q if q > 1 else 0
    rhs1 = UnityRoot(-inv_int(alpha, ps) * (inv_int(q, ps) if q > 1 else 1) * n, ps)
    if q > 1:
        rhs2 = UnityRoot(-inv_int(m, q) * p ** r % q * inv_int(pow(p, 2 * s, q), q) * n, q)
    else:
        rhs2 = UnityRoot(0, 1)
    return lhs == rhs1 * rhs2
