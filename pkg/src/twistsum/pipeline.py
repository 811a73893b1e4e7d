"""Assembly of the full decomposition: direct sums, the two dual-side
identities (Poisson on the character side, the Bessel transform on the
coefficient side), the Cauchy-squared comparison with its own Poisson
step, the exponential-sum scans, and the final bound report.

Everything here is a two-sided check: one side evaluates a definition
literally, the other evaluates the transformed expression, and the test
is that they agree within the accumulated quadrature budget.  Asymptotic
"<<" statements are never asserted with unknowable implied constants;
each becomes a measured ratio against the predicted shape plus a clearly
labelled harness ceiling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import fsum, gcd

import numpy as np

from .characters import CharacterExpansion, DirichletCharacter, UnityRoot
from .charsums import CongruenceContext, charsum_C_closed
from .forms import FormTable
from .modarith import DomainError, PrimePower, Residue, hensel_sqrt, inv_int
from .oscillatory import (
    STANDARD_BUMP,
    BumpFunction,
    DeltaKernel,
    FrakCache,
    OscillatoryValue,
    integral_I,
    integral_frak1,
)
from .params import PipelineParams


class BudgetExceeded(RuntimeError):
    """A nested-sum evaluation would exceed the summand budget."""


# ---------------------------------------------------------------------------
# Direct evaluation of the twisted sum
# ---------------------------------------------------------------------------

def direct_S(params: PipelineParams, chi: DirichletCharacter, table: FormTable,
             bump=STANDARD_BUMP) -> complex:
    """S(N) = sum lambda(n) chi(n) W(n/N), compensated accumulation."""
    N = params.N
    lo = int(math.floor(bump.lo * N))
    hi = int(math.ceil(bump.hi * N))
    if hi > table.nmax:
        raise DomainError(f"form table covers n <= {table.nmax}, need {hi}")
    n = np.arange(max(1, lo), hi + 1)
    w = bump(n / N)
    nz = w > 0
    n, w = n[nz], w[nz]
    chivals = chi.values_array[n % chi.modulus]
    terms = table.lam[n] * w * chivals
    return complex(fsum(terms.real), fsum(terms.imag))


def trivial_bound(params: PipelineParams, table: FormTable,
                  bump=STANDARD_BUMP) -> float:
    """sum |lambda(n)| W(n/N), the no-cancellation benchmark."""
    N = params.N
    n = np.arange(max(1, int(bump.lo * N)), int(math.ceil(bump.hi * N)) + 1)
    return float(fsum(np.abs(table.lam[n]) * bump(n / N)))


# ---------------------------------------------------------------------------
# Poisson dual of the character-side sum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DualCheck:
    lhs: complex
    rhs: complex
    difference: float
    error_budget: float
    tail_change: float

    @property
    def passed(self) -> bool:
        return self.difference <= self.error_budget


def _chi_side_direct(params: PipelineParams, chi: DirichletCharacter,
                     a: int, b: int, q: int, x: float,
                     bump=STANDARD_BUMP) -> complex:
    N, p, ell = params.N, params.p, params.ell
    pl = p ** ell
    m = np.arange(max(1, int(bump.lo * N)), int(math.ceil(bump.hi * N)) + 1)
    w = bump(m / N)
    chivals = chi.values_array[m % chi.modulus]
    c = (a + b * q) % (pl * q)
    phase = np.exp(-2j * np.pi * (((c * m) % (pl * q)) / (pl * q) + x * m / (pl * q * params.Q)))
    terms = chivals * phase * w
    return complex(fsum(terms.real), fsum(terms.imag))


def poisson_verify(params: PipelineParams, chi: DirichletCharacter,
                   a: int, b: int, q: int, x: float,
                   m_window_factor: float = 1.0) -> DualCheck:
    """Both sides of the m-sum dual identity.

    lhs: the literal chi-side sum.  rhs: (N/p^r q) times the sum over the
    dual frequencies |m| <= M0 of the closed-form complete character sum
    against the z-integral.  The closed form is supported on one residue
    class mod q, so only those m are visited.  tail_change reports the
    relative change of the rhs when the window doubles.
    """
    if gcd(q, params.p) != 1 or q > math.floor(params.Q):
        raise DomainError("q must be coprime to p and at most Q")
    lhs = _chi_side_direct(params, chi, a, b, q, x)
    p, r, ell = params.p, params.r, params.ell

    # |integral_I| is the bump transform at freq = Nx/(p^ell q Q) + Nm/(p^r q);
    # measured decay puts it below 3e-11 already at freq 120, so terms beyond
    # the cut are folded into the budget instead of integrated.
    freq_cut = 150.0
    vhat_tail = 3e-12

    def rhs_over(window: float) -> tuple[complex, float]:
        m0 = int(math.ceil(window))
        total = 0j
        budget = 0.0
        pref = params.N / (p ** r * q)
        cmax = q * p ** (r / 2.0)
        for m in range(-m0, m0 + 1):
            if m % p == 0:
                continue
            if (a - m * inv_int(p ** (r - ell), q)) % q != 0:
                continue
            freq = (params.N * x / (p ** ell * q * params.Q)
                    + params.N * m / (p ** r * q))
            if abs(freq) > freq_cut:
                budget += cmax * vhat_tail
                continue
            cval = charsum_C_closed(CongruenceContext(params, q, a, b, m), chi)
            if cval == 0:
                continue
            ival = integral_I(x, q, m, params)
            total += cval * ival.value
            budget += abs(cval) * ival.abs_error_estimate
        return pref * total, pref * budget

    rhs, budget = rhs_over(m_window_factor * params.M0)
    rhs2, _ = rhs_over(2.0 * m_window_factor * params.M0)
    tail_change = abs(rhs2 - rhs) / max(abs(rhs), 1e-300)
    diff = abs(lhs - rhs)
    return DualCheck(lhs, rhs, diff, budget + 1e-6 * abs(lhs) + 1e-12, tail_change)


# ---------------------------------------------------------------------------
# Bessel-transform dual of the coefficient-side sum
# ---------------------------------------------------------------------------

def _coeff_side_direct(params: PipelineParams, table: FormTable,
                       a: int, b: int, q: int, x: float,
                       bump=STANDARD_BUMP) -> complex:
    N, p, ell = params.N, params.p, params.ell
    pl = p ** ell
    n = np.arange(max(1, int(bump.lo * N)), int(math.ceil(bump.hi * N)) + 1)
    w = bump(n / N)
    c = (a + b * q) % (pl * q)
    phase = np.exp(2j * np.pi * (((c * n) % (pl * q)) / (pl * q) + x * n / (pl * q * params.Q)))
    terms = table.lam[n] * phase * w
    return complex(fsum(terms.real), fsum(terms.imag))


def voronoi_verify(params: PipelineParams, table: FormTable,
                   a: int, b: int, q: int, x: float,
                   n_window_factor: float = 1.0, tail_factor: float = 2.0,
                   weight: int = 12) -> DualCheck:
    """Both sides of the n-sum dual identity at depth ell1 = v_p(a+bq).

    rhs: (2 pi i^k N^(3/4) / (p^((ell-ell1)/2) q^(1/2))) *
         sum_eps sum_n lambda(n) n^(-1/4) e(-abar n/(p^(ell-ell1) q)) J(...).
    """
    from .modarith import v_p
    from .oscillatory import integral_J

    p, r, ell, ell1 = params.p, params.r, params.ell, params.ell1
    c = a + b * q
    if min(v_p(c, p) if c else ell, ell) != ell1:
        raise DomainError(f"v_p(a+bq) must equal ell1={ell1}")
    lhs = _coeff_side_direct(params, table, a, b, q, x)
    s = ell - ell1
    mod = p ** s * q
    abar = inv_int(c // p ** ell1, mod)
    pref = 2.0 * math.pi * (1j ** weight) * params.N ** 0.75 / (p ** (s / 2.0) * math.sqrt(q))

    def rhs_over(window: float) -> tuple[complex, float]:
        nmax = int(math.ceil(window))
        if nmax > table.nmax:
            raise DomainError("form table too small for the dual window")
        total = 0j
        budget = 0.0
        for n in range(1, nmax + 1):
            lam = table.lam[n]
            if lam == 0.0:
                continue
            wphase = UnityRoot(-abar * n, mod).as_complex()
            coeff = lam * n ** -0.25 * wphase
            for eps in (+1, -1):
                jval = integral_J(eps, q, x, float(n), ell1, params, weight=weight)
                total += coeff * jval.value
                budget += abs(coeff) * jval.abs_error_estimate
        return pref * total, abs(pref) * budget

    rhs, budget = rhs_over(n_window_factor * params.N0)
    rhs2, _ = rhs_over(tail_factor * n_window_factor * params.N0)
    tail_change = abs(rhs2 - rhs) / max(abs(rhs), 1e-300)
    diff = abs(lhs - rhs)
    return DualCheck(lhs, rhs, diff, budget + 1e-3 * abs(lhs) + 1e-12, tail_change)


# ---------------------------------------------------------------------------
# The Cauchy-squared comparison and its Poisson step
# ---------------------------------------------------------------------------

@dataclass
class ThetaGrid:
    """Index set of the squared sum: q and m ranges with the coprimality
    support (gcd(m, pq) = 1, the support of the closed character sum)."""

    params: PipelineParams
    q_values: tuple[int, ...]
    m_values: tuple[int, ...]
    eps: int = +1
    budget: int = 10 ** 7

    def qm_pairs(self) -> list[tuple[int, int]]:
        out = []
        for q in self.q_values:
            if gcd(q, self.params.p) != 1:
                continue
            for m in self.m_values:
                if m == 0 or m % self.params.p == 0 or gcd(m, q) != 1:
                    continue
                out.append((q, m))
        return out


def _theta_inner_coeff(params: PipelineParams, chi: DirichletCharacter,
                       q: int, m: int, alpha: int) -> complex | None:
    """chi-bar(m - alpha p^(r-ell+ell1)) together with the q-side factors;
    None when the character argument is not a unit."""
    p, r = params.p, params.r
    s = params.s
    arg = m - alpha * p ** (r - s)
    w = chi.eval(arg)
    if w is None:
        return None
    return w.conj().as_complex()


def theta_direct(grid: ThetaGrid, chi: DirichletCharacter, frak: FrakCache,
                 bump=STANDARD_BUMP) -> OscillatoryValue:
    """Literal evaluation of the squared inner sum against the W2 weight.

    Theta = sum_n W2(n/N0) |sum_{q,m,alpha} (chi(q)/q^(3/2))
            chibar(m - alpha p^(r-s)) e(-alphabar qbar n/p^s)
            e(-mbar p^r pbar^(2s) n/q) frakI(eps, q, n, m)|^2
    """
    params = grid.params
    p, s = params.p, params.s
    ps = p ** s
    N0 = params.N0
    n_lo, n_hi = int(math.floor(bump.lo * N0)), int(math.ceil(bump.hi * N0))
    pairs = grid.qm_pairs()
    units = [al for al in range(1, ps) if al % p != 0]
    n_terms = (n_hi - n_lo + 1) * len(pairs) * len(units)
    if n_terms > grid.budget:
        raise BudgetExceeded(f"{n_terms} summands exceed budget {grid.budget}")

    total = 0.0
    err = 0.0
    for n in range(n_lo, n_hi + 1):
        w2 = float(bump(np.array([n / N0]))[0])
        if w2 == 0.0:
            continue
        inner = 0j
        inner_err = 0.0
        for q, m in pairs:
            fval = frak.get(grid.eps, q, float(n), float(m))
            qfac = chi.value(q) / q ** 1.5
            mbar_term = UnityRoot(-inv_int(m, q) * p ** params.r
                                  * inv_int(pow(p, 2 * s, q), q) * n, q) if q > 1 else UnityRoot(0, 1)
            coeff_sum = 0j
            for alpha in units:
                cc = _theta_inner_coeff(params, chi, q, m, alpha)
                if cc is None:
                    continue
                phase = UnityRoot(-inv_int(alpha, ps) * inv_int(q, ps) * n, ps) * mbar_term
                coeff_sum += cc * phase.as_complex()
            inner += qfac * coeff_sum * fval.value
            inner_err += abs(coeff_sum) / q ** 1.5 * fval.abs_error_estimate
        total += w2 * abs(inner) ** 2
        err += w2 * (2.0 * abs(inner) * inner_err + inner_err ** 2)
    return OscillatoryValue(complex(total), err)


def theta_dual(grid: ThetaGrid, chi: DirichletCharacter, frak: FrakCache,
               bump=STANDARD_BUMP,
               n_window_factor: float = 1.0) -> OscillatoryValue:
    """Post-Poisson form of theta_direct.

    Theta = N0 sum_{q1,q2} chi(q1) chibar(q2) / (q1 q2)^(3/2)
            sum_{m1,m2} sum*_{alpha1} sum_{nhat in window, congruences}
            chibar(m1 - alpha1 p^(r-s)) chi(m2 - alpha2 p^(r-s)) frakI1,
    with alpha2 determined by alphabar1 q2 - alphabar2 q1 + nhat = 0 mod
    p^s and the q1 q2 congruence filtering (m1, m2, nhat).
    """
    params = grid.params
    p, s = params.p, params.s
    ps = p ** s
    prs = p ** (params.r - s)
    N0 = params.N0
    pairs = grid.qm_pairs()
    units = [al for al in range(1, ps) if al % p != 0]

    total = 0j
    err = 0.0
    count = 0
    for q1, m1 in pairs:
        for q2, m2 in pairs:
            window = q1 * q2 * ps / N0 * params.eps_cutoff() * n_window_factor
            nhats = [nh for nh in range(-int(math.ceil(window)), int(math.ceil(window)) + 1)]
            qq = q1 * q2
            pref = chi.value(q1) * np.conj(chi.value(q2)) / qq ** 1.5
            m1b = inv_int(m1, q1) if q1 > 1 else 0
            m2b = inv_int(m2, q2) if q2 > 1 else 0
            for nh in nhats:
                # congruence mod q1 q2 on (m1, m2, nhat)
                if (prs * m1b * q2 - prs * m2b * q1 + nh) % qq != 0:
                    continue
                f1 = integral_frak1(nh, q1, q2, float(m1), float(m2), grid.eps,
                                    params, frak, bump=bump)
                alpha_sum = 0j
                for a1 in units:
                    u = (inv_int(a1, ps) * q2 + nh) % ps
                    if u % p == 0:
                        continue
                    a2 = q1 * inv_int(u, ps) % ps
                    w1 = chi.eval(m1 - a1 * prs)
                    w2 = chi.eval(m2 - a2 * prs)
                    if w1 is None or w2 is None:
                        continue
                    alpha_sum += (w1.conj() * w2).as_complex()
                    count += 1
                    if count > grid.budget:
                        raise BudgetExceeded("theta_dual summand budget exceeded")
                total += pref * alpha_sum * f1.value
                err += abs(pref) * abs(alpha_sum) * f1.abs_error_estimate
    return OscillatoryValue(N0 * total, N0 * err)


def theta_zero_frequency(grid: ThetaGrid, chi: DirichletCharacter, frak: FrakCache,
                         bump=STANDARD_BUMP) -> tuple[OscillatoryValue, int]:
    """The nhat = 0 terms of theta_dual (forces q1 = q2, q | m1 - m2) and
    the number of diagonal terms enumerated."""
    params = grid.params
    p, s = params.p, params.s
    ps = p ** s
    prs = p ** (params.r - s)
    N0 = params.N0
    pairs = grid.qm_pairs()
    units = [al for al in range(1, ps) if al % p != 0]
    total = 0j
    err = 0.0
    diagonal_count = 0
    for q1, m1 in pairs:
        for q2, m2 in pairs:
            if q1 != q2:
                continue
            q = q1
            if (m1 - m2) % q != 0:
                continue
            f1 = integral_frak1(0, q, q, float(m1), float(m2), grid.eps,
                                params, frak, bump=bump)
            alpha_sum = 0j
            for a1 in units:
                w1 = chi.eval(m1 - a1 * prs)
                w2 = chi.eval(m2 - a1 * prs)
                if w1 is None or w2 is None:
                    continue
                alpha_sum += (w1.conj() * w2).as_complex()
                if m1 == m2:
                    diagonal_count += 1
            total += alpha_sum * f1.value / q ** 3
            err += abs(alpha_sum) * f1.abs_error_estimate / q ** 3
    return OscillatoryValue(N0 * total, N0 * err), diagonal_count


def theta_zero_bound_check(grid: ThetaGrid, chi: DirichletCharacter,
                           frak: FrakCache) -> dict[str, float]:
    """Measured ratio of |Theta_zero| against the predicted shape
    p^(r + 5 ell/2 - 3 ell1) / N^(3/2).  Reported, not derived: the
    implied constant is unknown, and the displayed exponent mixes the two
    depth conventions (flagged in the report rather than resolved)."""
    params = grid.params
    value, diag = theta_zero_frequency(grid, chi, frak)
    predicted = (params.p ** (params.r + 2.5 * params.ell - 3 * params.ell1)
                 / params.N ** 1.5)
    precondition = params.N >= params.p ** (params.r - params.s)
    return {
        "theta_zero_abs": abs(value.value),
        "predicted_shape": predicted,
        "ratio": abs(value.value) / predicted,
        "diagonal_terms": float(diag),
        "precondition_N_ge_p^(r-s)": float(precondition),
        "error_estimate": value.abs_error_estimate,
    }


# ---------------------------------------------------------------------------
# Exponential-sum scans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentSumSpec:
    """A fixed admissible phase for the square-class exponential sum.

    Carries the expansion coefficients explicitly (A1, A2 units mod p^s):
    only the combination A1 p^(r-s) is recoverable from a character, so
    the scan treats them as free unit parameters of the phase family.
    kappa is the class-splitting depth of the re-summation identity.
    """

    p: int
    r: int
    s: int
    q1: int
    q2: int
    n: int
    r1: int
    A1: int
    A2: int
    kappa: int = 1

    def __post_init__(self):
        if self.s % 2 != 0 or self.s < 2:
            raise DomainError("depth s must be even and >= 2")
        if 3 * self.s > 2 * self.r:
            raise DomainError("phase family needs s <= 2r/3")
        for name in ("q1", "q2", "n", "r1", "A1", "A2"):
            if getattr(self, name) % self.p == 0:
                raise DomainError(f"{name} must be a unit mod p")


def phase_g(spec: ExponentSumSpec, r2: int) -> int:
    """The eight-summand phase g(r2) mod p^s, square root taken canonically.

    Requires r2 to be a unit with r2 r1bar a square mod p.
    """
    p, s = spec.p, spec.s
    ps = p ** s
    ps2 = p ** (s // 2)
    prs = pow(p, spec.r - s, ps)
    nb = inv_int(spec.n, ps)
    q1b, q2b = inv_int(spec.q1, ps), inv_int(spec.q2, ps)
    r1b = inv_int(spec.r1, ps)
    r2b = inv_int(r2, ps)
    rho = hensel_sqrt(Residue(r2 * r1b, ps2), PrimePower(p, s // 2)).value
    rhob = inv_int(rho, ps)
    A1, A2 = spec.A1, spec.A2
    t1 = A1 * nb * q2b * spec.q1 * r2b
    t2 = A2 * nb * nb * q2b * q2b * spec.q1 ** 2 * prs * r2b * r2b
    t3 = (A1 * nb * inv_int(spec.r1 * spec.q1, ps)
          - 2 * A2 * nb * nb * r1b * r1b * q1b * q1b * spec.q2 * prs) * rho
    t4 = -(A1 * nb * inv_int(r2 * spec.q2, ps) * spec.q1
           + 2 * A2 * nb * nb * r2b * r2b * q2b * q2b * spec.q1 ** 2 * prs) * (1 - rhob)
    t5 = -A2 * r1b * r1b * q1b * q1b * prs * (r2 * r1b - 2 * rho)
    t6 = -A2 * r1b * r1b * q1b * q1b * prs * (spec.r1 * r2b - 2 * rho)
    return (t1 + t2 + t3 + t4 + t5 + t6) % ps


def tr_sum(spec: ExponentSumSpec, chi: DirichletCharacter, R: int) -> tuple[complex, int]:
    """T(R): the square-class-restricted character/phase sum on [R, 2R].

    Returns (value, number of summed terms); r2 divisible by p or outside
    the square class are skipped as the sum prescribes.
    """
    p, s = spec.p, spec.s
    ps = p ** s
    total = 0j
    terms = 0
    for r2 in range(R, 2 * R + 1):
        if r2 % p == 0:
            continue
        cls = r2 * inv_int(spec.r1, p) % p
        if pow(cls, (p - 1) // 2, p) != 1:
            continue
        w = chi.eval(r2)
        g = phase_g(spec, r2)
        total += w.as_complex() * UnityRoot(g, ps).as_complex()
        terms += 1
    return total, terms


def tr_sum_class_decomposition(spec: ExponentSumSpec, chi: DirichletCharacter,
                               R: int) -> complex:
    """Re-summation of T(R) over the classes r2 = r1 m^2 + t p^kappa.

    Each admissible r2 lies in exactly two classes (the two square roots
    of r2 r1bar mod p^kappa), so the double count is halved.  The t-sum
    phase uses chi(r1 m^2) chi(1 + r1bar mbar^2 p^kappa t), which equals
    chi(r2) exactly.
    """
    p, s, kappa = spec.p, spec.s, spec.kappa
    ps = p ** s
    pk = p ** kappa
    total = 0j
    for m in range(1, pk + 1):
        if m % p == 0:
            continue
        base = spec.r1 * m * m % pk
        chim = chi.eval(spec.r1 * m * m)
        mbar2 = inv_int(m * m, chi.modulus)
        r1bar = inv_int(spec.r1, chi.modulus)
        t_lo = -(-(R - spec.r1 * m * m) // pk)          # ceil
        t_hi = (2 * R - spec.r1 * m * m) // pk           # floor
        for t in range(t_lo, t_hi + 1):
            r2 = spec.r1 * m * m + t * pk
            if r2 % p == 0 or r2 < R or r2 > 2 * R:
                continue
            cls = r2 * inv_int(spec.r1, p) % p
            if pow(cls, (p - 1) // 2, p) != 1:
                continue
            wtail = chi.eval(1 + r1bar * mbar2 * t * pk)
            g = phase_g(spec, r2)
            total += (chim * wtail).as_complex() * UnityRoot(g, ps).as_complex()
    return total / 2.0


def exponent_fit(samples: list[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares slope/intercept of log|T| against log R."""
    if len(samples) < 4:
        raise DomainError("need at least 4 dyadic samples")
    logr = np.log([s[0] for s in samples])
    logt = np.log([max(s[1], 1e-300) for s in samples])
    if logr.max() - logr.min() < 2.0 * math.log(2.0):
        raise DomainError("samples span fewer than 2 dyads")
    slope, intercept = np.polyfit(logr, logt, 1)
    return float(slope), float(intercept)


def tr_scan(spec: ExponentSumSpec, chi: DirichletCharacter,
            dyadic_range: tuple[int, int]) -> dict:
    """Dyadic |T(R)| scan with the fitted exponent and both predictions."""
    samples = []
    rows = []
    for j in range(dyadic_range[0], dyadic_range[1] + 1):
        R = 2 ** j
        val, terms = tr_sum(spec, chi, R)
        samples.append((float(R), abs(val)))
        rows.append({"R": R, "abs_T": abs(val), "terms": terms,
                     "re": val.real, "im": val.imag})
    slope, intercept = exponent_fit(samples)
    return {
        "rows": rows,
        "slope": slope,
        "intercept": intercept,
        "predicted_exponent_main": 0.2,
        "predicted_exponent_alt": 0.8,   # (1/15, 13/15) pair shape
        "trivial_exponent": 1.0,
    }


# ---------------------------------------------------------------------------
# Bound report
# ---------------------------------------------------------------------------

@dataclass
class BoundReport:
    N: float
    p: int
    r: int
    nu: float                      # log_p N
    ell_star: float
    ell_candidates: list[dict]
    ell_int: int | None
    window_ok: bool
    log_p_zero_term: float         # at ell_star
    log_p_nonzero_term: float
    log_p_final: float
    equating_residual: float
    measured_abs_S: float | None = None


def bound_report(N: float, p: int, r: int,
                 measured_abs_S: float | None = None) -> BoundReport:
    """The closing parameter choice and predicted magnitudes.

    ell_star = 26 r / 45 + log_p(N)/9 equates the two contributions; the
    report carries both integer neighbours with their side conditions
    (max(p^ell, p^(r-ell)) <= N and ell <= 2r/3) and predicted sizes, and
    the admissibility window p^(13r/20) <= N <= p^(4r/5).
    """
    nu = math.log(N) / math.log(p)
    ell_star = 26.0 * r / 45.0 + nu / 9.0
    zero_term = 0.5 * nu + 0.5 * ell_star
    nonzero_term = 13.0 * r / 30.0 + 7.0 * nu / 12.0 - ell_star / 4.0
    residual = abs(zero_term - nonzero_term)
    window_ok = (13.0 * r / 20.0 <= nu + 1e-12) and (nu <= 4.0 * r / 5.0 + 1e-12)

    candidates = []
    best: tuple[float, int] | None = None
    for ell in {math.floor(ell_star), math.ceil(ell_star)}:
        ell = int(ell)
        valid = (1 <= ell <= r and max(ell, r - ell) <= nu + 1e-12
                 and 3 * ell <= 2 * r)
        z = 0.5 * nu + 0.5 * ell
        nz = 13.0 * r / 30.0 + 7.0 * nu / 12.0 - ell / 4.0
        worst = max(z, nz)
        candidates.append({"ell": ell, "valid": valid, "log_p_zero": z,
                           "log_p_nonzero": nz, "log_p_worst": worst})
        if valid and (best is None or worst < best[0]):
            best = (worst, ell)
    return BoundReport(
        N=N, p=p, r=r, nu=nu, ell_star=ell_star,
        ell_candidates=sorted(candidates, key=lambda c: c["ell"]),
        ell_int=best[1] if best else None,
        window_ok=window_ok,
        log_p_zero_term=zero_term,
        log_p_nonzero_term=nonzero_term,
        log_p_final=5.0 * nu / 9.0 + 13.0 * r / 45.0,
        equating_residual=residual,
        measured_abs_S=measured_abs_S,
    )


def bound_exponent_identities(r: int, nu: Fraction) -> dict[str, Fraction]:
    """The closing exponent arithmetic as exact rationals."""
    ell = Fraction(26, 45) * r + nu / 9
    zero = nu / 2 + ell / 2
    nonzero = Fraction(13, 30) * r + Fraction(7, 12) * nu - ell / 4
    final = Fraction(5, 9) * nu + Fraction(13, 45) * r
    return {"ell_star": ell, "zero": zero, "nonzero": nonzero,
            "residual": zero - nonzero, "final": final}


def cancellation_scan(p: int, r: int, n_grid: list[float],
                      chi: DirichletCharacter, table: FormTable) -> list[dict]:
    """|S(N)| against the trivial bound and the predicted magnitude."""
    rows = []
    for N in n_grid:
        params = PipelineParams(N=N, p=p, r=r, ell=1)
        sval = direct_S(params, chi, table)
        triv = trivial_bound(params, table)
        rep = bound_report(N, p, r, measured_abs_S=abs(sval))
        rows.append({
            "N": N,
            "abs_S": abs(sval),
            "re_S": sval.real,
            "im_S": sval.imag,
            "trivial": triv,
            "ratio": abs(sval) / triv if triv > 0 else float("nan"),
            "predicted_log_p": rep.log_p_final,
            "predicted": p ** rep.log_p_final,
            "window_ok": rep.window_ok,
            "sqrt_cancellation_ref": math.sqrt(N),
        })
    return rows
