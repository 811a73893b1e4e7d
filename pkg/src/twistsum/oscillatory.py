"""Smooth weights, the delta-method kernel, Bessel transforms, and the
oscillatory integrals of the decomposition.

Every integral returns an OscillatoryValue: a complex value together with
an a-posteriori absolute error estimate.  Downstream comparisons must use
value +- abs_error_estimate; no assertion is allowed to be tighter than
the declared error.

The delta-symbol kernel g(q, x) is built concretely: starting from a
smooth omega supported in (Q/2, Q), the divisor-pairing identity

    delta(n) = c_Q * sum_q sum*_a e(na/q) * sum_j (1/(qj)) *
               (omega(qj) - omega(|n|/(qj)))

is exact for all |n| <= Q^2/2 (c_Q normalizes sum_d omega(d) to 1).  The
n-dependent part, smoothly cut off beyond |n|/Q^2 = 1/2 where it is no
longer needed, is Fourier-inverted per q so that

    integral g(q, x) e(nx/(qQ)) dx

reproduces the bracket exactly.  The kernel is tabulated by FFT on a grid
fine enough that trapezoid sums against slow phases are exact up to
aliasing (the table function is band-limited by construction); a slow
direct-quadrature point evaluator cross-checks the tables.  The three
advertised kernel properties (g near 1 for small q and x, rapid decay in
x, log-bounded derivatives, bounded L1/L2 mass) are measured by
delta_kernel_audit, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special as sp

from .modarith import DomainError
from .params import PipelineParams
from .quadrature import adaptive_quad, gauss_legendre_nodes

TWO_PI = 2.0 * math.pi

_trapz = getattr(np, "trapezoid", None) or np.trapz


# ---------------------------------------------------------------------------
# Bump functions
# ---------------------------------------------------------------------------

def _exp_bump(t: np.ndarray) -> np.ndarray:
    """exp(-1/t) for t > 0, 0 otherwise (C-infinity at 0)."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    pos = t > 1e-12
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _smoothstep(t: np.ndarray) -> np.ndarray:
    """C-infinity transition from 1 at t<=0 to 0 at t>=1."""
    a = _exp_bump(1.0 - t)
    b = _exp_bump(t)
    return a / (a + b + 1e-300)


@dataclass(frozen=True)
class BumpFunction:
    """Smooth bump supported on [lo, hi], unit peak at the midpoint.

    W(x) = exp(-(hi-lo)^2/4 / ((x-lo)(hi-x))) * e, so W(mid) = 1.
    Derivatives up to order 2 are analytic; higher orders fall back to
    central differences, which is all the derivative-bound certificate
    needs at desk scale.
    """

    lo: float = 1.0
    hi: float = 2.0

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        g = (x - self.lo) * (self.hi - x)
        out = np.zeros_like(g)
        inside = g > 0
        c = (self.hi - self.lo) ** 2 / 4.0
        out[inside] = np.exp(c * (-1.0 / g[inside]) + 1.0)
        return out

    def deriv(self, x, order: int = 1) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if order == 0:
            return self(x)
        c = (self.hi - self.lo) ** 2 / 4.0
        g = (x - self.lo) * (self.hi - x)
        gp = (self.lo + self.hi) - 2.0 * x
        inside = g > 0
        w = self(x)
        if order == 1:
            out = np.zeros_like(w)
            out[inside] = w[inside] * c * gp[inside] / g[inside] ** 2
            return out
        if order == 2:
            out = np.zeros_like(w)
            gi, gpi = g[inside], gp[inside]
            h1 = c * gpi / gi ** 2
            h2 = c * (-2.0 / gi ** 2 - 2.0 * gpi ** 2 / gi ** 3 * -1.0)
            # h = c/g has h' = -c g'/g^2 ... phase convention below keeps
            # W = exp(-c/g + 1): W'' = W*((c g'/g^2)^2 + c g''/g^2 - 2 c g'^2/g^3)
            h2 = c * (-2.0) / gi ** 2 - 2.0 * c * gpi ** 2 / gi ** 3
            out[inside] = w[inside] * (h1 ** 2 + h2)
            return out
        # finite differences for higher orders
        h = 1e-2 * (self.hi - self.lo)
        return (self.deriv(x + h, order - 1) - self.deriv(x - h, order - 1)) / (2 * h)

    def derivative_bound(self, order: int, grid: int = 4001) -> float:
        """sup |W^(order)| measured on a fine grid (the certificate)."""
        xs = np.linspace(self.lo, self.hi, grid)
        return float(np.max(np.abs(self.deriv(xs, order))))

    def mass(self) -> float:
        v, _ = adaptive_quad(lambda x: self(x).astype(np.complex128), self.lo, self.hi,
                             tol_abs=1e-14, tol_rel=1e-13)
        return v.real


class SmoothPairBump:
    """C-infinity bump on [lo, hi] built from two wide smoothstep ramps.

    Each ramp spans frac of the interval, so the transitions overlap and
    the derivative scale stays small: sup|W'| is about 3 against about 7
    for the rational-exponent bump on the same support.  That factor
    compounds through every integration by parts, and the dual n-sums
    truncate two orders of magnitude earlier for it.  Normalized to unit
    peak at the midpoint.
    """

    def __init__(self, lo: float = 1.0, hi: float = 2.0, frac: float = 0.9):
        self.lo = lo
        self.hi = hi
        self.frac = frac
        self._peak = 1.0
        self._peak = float(self._raw(np.array([0.5 * (lo + hi)]))[0])

    def _raw(self, x: np.ndarray) -> np.ndarray:
        w = (self.hi - self.lo) * self.frac
        return (_smoothstep(1.0 - (x - self.lo) / w)
                * _smoothstep(1.0 - (self.hi - x) / w))

    def __call__(self, x) -> np.ndarray:
        return self._raw(np.asarray(x, dtype=np.float64)) / self._peak

    def deriv(self, x, order: int = 1) -> np.ndarray:
        if order == 0:
            return self(x)
        h = 5e-4 * (self.hi - self.lo)
        return (self.deriv(np.asarray(x, dtype=np.float64) + h, order - 1)
                - self.deriv(np.asarray(x, dtype=np.float64) - h, order - 1)) / (2 * h)

    def derivative_bound(self, order: int, grid: int = 4001) -> float:
        xs = np.linspace(self.lo, self.hi, grid)
        return float(np.max(np.abs(self.deriv(xs, order))))

    def mass(self) -> float:
        v, _ = adaptive_quad(lambda x: self(x).astype(np.complex128), self.lo, self.hi,
                             tol_abs=1e-14, tol_rel=1e-13)
        return v.real


#: the weight used everywhere: W = V = W2.  The smoothstep pair replaces
#: the rational-exponent bump: both satisfy every stated requirement
#: (smooth, supported on [1,2], unit peak, certified derivative bounds),
#: but the gentler one is what makes the dual-sum truncation windows
#: close at desk scale.
STANDARD_BUMP = SmoothPairBump(1.0, 2.0, frac=0.9)


def bump_eval(w, x: float, deriv: int = 0) -> float:
    return float(np.atleast_1d(w.deriv(x, deriv))[0]) if deriv else float(np.atleast_1d(w(x))[0])


# ---------------------------------------------------------------------------
# Oscillatory values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OscillatoryValue:
    value: complex
    abs_error_estimate: float

    def __add__(self, other: "OscillatoryValue") -> "OscillatoryValue":
        return OscillatoryValue(self.value + other.value,
                                self.abs_error_estimate + other.abs_error_estimate)

    def scaled(self, c: complex) -> "OscillatoryValue":
        return OscillatoryValue(self.value * c, self.abs_error_estimate * abs(c))


# ---------------------------------------------------------------------------
# Bessel evaluation and the phase/envelope splitting
# ---------------------------------------------------------------------------

_SERIES_CUT = 16.0


def bessel_J(order: int, x: float) -> float:
    """J_order(x) for x >= 0: ascending series for small x, quadrature of
    the cosine integral representation beyond (1e-10 absolute target)."""
    if x < 0:
        raise DomainError("bessel_J expects x >= 0")
    if x <= _SERIES_CUT:
        half = x / 2.0
        if half == 0.0:
            return 1.0 if order == 0 else 0.0
        terms = []
        term = half ** order / math.factorial(order)
        m = 0
        while True:
            terms.append(term if m % 2 == 0 else -term)
            m += 1
            term *= half * half / (m * (m + order))
            if term < 1e-18 and m > 4:
                break
        return math.fsum(terms)
    # J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt
    panels = max(8, int((x + order) / 2))
    nodes, weights = gauss_legendre_nodes(0.0, math.pi, panels, order=10)
    vals = np.cos(order * nodes - x * np.sin(nodes))
    return float(np.sum(weights * vals) / math.pi)


def hankel_envelope(k: int, eps: int, x) -> np.ndarray:
    """The smooth envelope w_{k,eps} with
    J_{k-1}(x) = x^{-1/2} * (w_{k,+}(x) e^{ix} + w_{k,-}(x) e^{-ix}),
    realized through Hankel functions: w_{k,+-} = (sqrt(x)/2) H^(1,2)_{k-1}(x) e^{-+ix}."""
    x = np.asarray(x, dtype=np.float64)
    j = sp.jv(k - 1, x)
    y = sp.yv(k - 1, x)
    h = j + 1j * y if eps > 0 else j - 1j * y
    return 0.5 * np.sqrt(x) * h * np.exp(-1j * eps * x)


# ---------------------------------------------------------------------------
# Delta-method kernel
# ---------------------------------------------------------------------------

class DeltaKernel:
    """Tabulated delta-method kernel g(q, x) for one value of Q.

    pad controls the x-grid density: spacing q/(pad*Q).  pad=4 is enough
    for trapezoid sums of g against slow phases; integrals whose other
    factors carry phases up to ~4Q/q cycles per unit x (the triple
    integrals of the pipeline) need pad=16.
    """

    def __init__(self, Q: float, pad: int = 4, x_max: float = 32.0,
                 samples_scale: int = 256):
        if Q < 1.0:
            raise DomainError("kernel needs Q >= 1")
        self.Q = Q
        self.pad = pad
        self.x_max = x_max
        self.qmax = int(Q)
        self._w_bump = BumpFunction(0.5, 1.0)
        # omega(u) = w(u/Q)/Q; c_Q normalizes the integer mass exactly.
        dgrid = np.arange(1, int(Q) + 1)
        mass = float(np.sum(self._omega(dgrid)))
        if mass <= 0:
            raise DomainError("empty omega support; increase Q")
        self.c_Q = 1.0 / mass
        self._samples_scale = samples_scale
        self._tables: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def _omega(self, u) -> np.ndarray:
        return self._w_bump(np.asarray(u, dtype=np.float64) / self.Q) / self.Q

    def _phi(self, y: np.ndarray) -> np.ndarray:
        """Even cutoff: 1 on |y| <= 1/2, 0 beyond |y| >= 1."""
        return _smoothstep(2.0 * (np.abs(y) - 0.5))

    def bracket(self, q: int, y) -> np.ndarray:
        """c_Q * Q * sum_j (1/j)(omega(qj) - omega(|y| Q^2/(qj))), the exact
        n-bracket at y = n/Q^2 (before the cutoff)."""
        y = np.asarray(y, dtype=np.float64)
        jmax = max(1, int(2.0 * self.Q / q) + 1)
        out = np.zeros_like(y)
        const = 0.0
        for j in range(1, jmax + 1):
            const += float(self._omega(np.array([q * j]))[0]) / j
            out -= self._omega(np.abs(y) * self.Q ** 2 / (q * j)) / j
        return self.c_Q * self.Q * (const + out)

    def _f_q(self, q: int, y: np.ndarray) -> np.ndarray:
        return self.bracket(q, y) * self._phi(y)

    def _build_table(self, q: int) -> tuple[np.ndarray, np.ndarray]:
        """FFT tabulation of g(q, x) = (Q/q) * FT[F_q](Q x / q)."""
        span = 4.0  # y in [-2, 2); F_q supported in [-1, 1]
        density = self._samples_scale * self.Q / q * self.pad / 4.0
        m = 1 << max(12, int(math.ceil(math.log2(span * density))))
        dy = span / m
        y = -span / 2.0 + dy * np.arange(m)
        fvals = self._f_q(q, y)
        # FT[F](xi_k) = dy * (-1)^k * FFT[fvals]_k at xi_k = k/span
        spec = np.fft.fft(fvals)
        k = np.arange(m)
        spec = dy * np.where(k % 2 == 0, 1.0, -1.0) * spec
        xi = np.fft.fftfreq(m, d=dy)
        order = np.argsort(xi)
        xi = xi[order]
        gvals = (self.Q / q) * np.real(spec[order])
        x = xi * q / self.Q
        keep = np.abs(x) <= self.x_max
        return x[keep], gvals[keep]

    def table(self, q: int) -> tuple[np.ndarray, np.ndarray]:
        if q < 1:
            raise DomainError("q >= 1")
        if q not in self._tables:
            self._tables[q] = self._build_table(q)
        return self._tables[q]

    def g_point(self, q: int, x: float) -> float:
        """Direct slow evaluation g(q,x) = (Q/q) int F_q(y) e(-Qxy/q) dy,
        the cross-check path for the FFT tables."""
        freq = self.Q * abs(x) / q
        val, _ = adaptive_quad(
            lambda y: self._f_q(q, y) * np.exp(-2j * np.pi * self.Q * x / q * y),
            -1.0, 1.0, tol_abs=1e-13, tol_rel=1e-12, cycles=2.0 * freq)
        return float(val.real * self.Q / q)

    def pair_integral(self, q: int, nu: float, x_cut: float | None = None) -> tuple[float, float]:
        """(integral of g(q,x) e(nu x) dx over |x| <= x_cut, error estimate).

        The error estimate combines the imaginary residual with a
        cutoff-refinement difference (the value change when the window
        shrinks to 60%), times a safety factor; the table tail oscillates,
        so an absolute-value tail bound would be far too pessimistic.
        """
        x, g = self.table(q)
        cut = x_cut if x_cut is not None else self.x_max
        phase = np.exp(2j * np.pi * nu * x)
        keep = np.abs(x) <= cut
        val = _trapz(g[keep] * phase[keep], x[keep])
        keep_in = np.abs(x) <= 0.6 * cut
        val_in = _trapz(g[keep_in] * phase[keep_in], x[keep_in])
        err = 3.0 * abs(val - val_in) + abs(float(val.imag))
        return float(val.real), err

    def deriv_table(self, q: int, j: int) -> tuple[np.ndarray, np.ndarray]:
        """x-derivative of order j on the same grid (spectral)."""
        span = 4.0
        density = self._samples_scale * self.Q / q * self.pad / 4.0
        m = 1 << max(12, int(math.ceil(math.log2(span * density))))
        dy = span / m
        y = -span / 2.0 + dy * np.arange(m)
        fvals = self._f_q(q, y) * (-2j * np.pi * self.Q / q * y) ** j
        spec = np.fft.fft(fvals)
        k = np.arange(m)
        spec = dy * np.where(k % 2 == 0, 1.0, -1.0) * spec
        xi = np.fft.fftfreq(m, d=dy)
        order = np.argsort(xi)
        xi = xi[order]
        gj = (self.Q / q) * spec[order]
        x = xi * q / self.Q
        keep = np.abs(x) <= self.x_max
        return x[keep], np.real(gj[keep])


def delta_reconstruct(n: int, L: float, kernel: DeltaKernel | None = None,
                      tol_delta: float = 1e-2, x_cut: float = 24.0) -> float:
    """Numerical evaluation of the delta expansion at integer n, |n| <= 2L.

    Finite q-sum, complete coprime a-sum (a Ramanujan sum), truncated
    x-quadrature of the tabulated kernel against e(nx/(qQ)).  Raises if
    the accumulated quadrature/tail estimate exceeds tol_delta.
    """
    Q = 2.0 * math.sqrt(L)
    if abs(n) > 2 * L:
        raise DomainError("delta expansion only valid for |n| <= 2L")
    kern = kernel if kernel is not None else DeltaKernel(Q)
    total = 0.0
    err = 0.0
    for q in range(1, int(Q) + 1):
        a = np.arange(q)
        a = a[np.gcd(a, q) == 1] if q > 1 else np.array([0])
        ramanujan = float(np.sum(np.cos(2 * np.pi * n * a / q)))
        if abs(ramanujan) < 1e-15:
            continue
        val, tail = kern.pair_integral(q, n / (q * Q), x_cut=x_cut)
        total += ramanujan * val / q
        err += abs(ramanujan) * tail / q
    total /= Q
    err /= Q
    if err > tol_delta:
        raise ArithmeticError(f"quadrature failure: error estimate {err} > {tol_delta}")
    return total


def delta_kernel_audit(kernel: DeltaKernel, qs: list[int] | None = None,
                       A: float = 2.0) -> dict[str, float]:
    """Measured implied constants of the three kernel properties.

    near_one:    |g - 1| / ((Q/q)(q/Q + |x|)^A) on small q and |x| <= 1/2
    decay:       |g| * |x|^A on |x| >= 1
    deriv:       per-differentiation-order constant
                 max_j (|x^j d^j g| / (log Q min(Q/q, 1/|x|)))^(1/j), j=1,2.
                 Each derivative of the kernel carries one 2 pi times
                 feature-frequency factor; the j-th root reports the
                 per-step constant, which is what one application of
                 integration by parts sees.  Raw j-ratios come along as
                 deriv_raw_j*.
    mass:        integral (|g| + |g|^2) dx  (the Q^eps-scale mass)
    """
    Q = kernel.Q
    qs = qs or sorted({1, 2, max(1, int(Q ** 0.5)), max(1, int(Q / 2)), int(Q)})
    out = {"near_one": 0.0, "decay": 0.0, "deriv": 0.0, "mass": 0.0,
           "deriv_raw_j1": 0.0, "deriv_raw_j2": 0.0}
    logq = max(math.log(Q), 1e-9)
    for q in qs:
        x, g = kernel.table(q)
        inner = np.abs(x) <= 0.5
        bound = (Q / q) * (q / Q + np.abs(x[inner])) ** A
        out["near_one"] = max(out["near_one"],
                              float(np.max(np.abs(g[inner] - 1.0) / np.maximum(bound, 1e-300))))
        outer = np.abs(x) >= 1.0
        if np.any(outer):
            out["decay"] = max(out["decay"],
                               float(np.max(np.abs(g[outer]) * np.abs(x[outer]) ** A)))
        for j in (1, 2):
            xs, gj = kernel.deriv_table(q, j)
            nz = np.abs(xs) > 1e-9
            bound = logq * np.minimum(Q / q, 1.0 / np.abs(xs[nz]))
            raw = float(np.max(np.abs(xs[nz] ** j * gj[nz]) / bound))
            out[f"deriv_raw_j{j}"] = max(out[f"deriv_raw_j{j}"], raw)
            out["deriv"] = max(out["deriv"], raw ** (1.0 / j))
        mass = float(_trapz(np.abs(g) + np.abs(g) ** 2, x))
        out["mass"] = max(out["mass"], mass)
    return out


# ---------------------------------------------------------------------------
# The oscillatory integrals of the decomposition
# ---------------------------------------------------------------------------

def integral_I(x: float, q: int, m: float, params: PipelineParams,
               bump=STANDARD_BUMP) -> OscillatoryValue:
    """I(x, q, m) = int V(z) e(-Nxz/(p^ell q Q)) e(-Nmz/(p^r q)) dz."""
    N, p, Q = params.N, params.p, params.Q
    c1 = N * x / (p ** params.ell * q * Q)
    c2 = N * m / (p ** params.r * q)
    cycles = abs(c1) + abs(c2)
    val, err = adaptive_quad(
        lambda z: bump(z) * np.exp(-2j * np.pi * (c1 + c2) * z),
        bump.lo, bump.hi, tol_abs=1e-13, tol_rel=1e-11, cycles=cycles)
    return OscillatoryValue(val, err)


def _j_phase_coeffs(eps: int, q: int, x: float, n: float, ell1: int,
                    params: PipelineParams) -> tuple[float, float, float]:
    N, p, Q = params.N, params.p, params.Q
    c_lin = x * N / (p ** params.ell * q * Q)
    c_sqrt = 2.0 * eps * math.sqrt(n * N) / (p ** (params.ell - ell1) * q)
    xt_scale = 2.0 * math.pi * 2.0 * math.sqrt(n * N) / (p ** (params.ell - ell1) * q)
    return c_lin, c_sqrt, xt_scale


def integral_J(eps: int, q: int, x: float, n: float, ell1: int,
               params: PipelineParams, weight: int = 12,
               bump=STANDARD_BUMP) -> OscillatoryValue:
    """J(eps, q, x, n): the Bessel-transform integral of the dual n-term.

    The envelope normalization makes the dual identity exact: with
    xt(y) = 4 pi sqrt(nNy)/(p^(ell-ell1) q),

        W1_eps(y) = W(y) w_{weight,eps}(xt(y)) / (2 sqrt(pi) y^(1/4)),

    so that summing the two eps terms against e(eps*2 sqrt(nNy)/...)
    rebuilds W(y) sqrt(xt) J_{weight-1}(xt) pointwise.
    """
    if n <= 0:
        raise DomainError("dual frequency n must be positive")
    c_lin, c_sqrt, xt_scale = _j_phase_coeffs(eps, q, x, n, ell1, params)
    cycles = abs(c_lin) + abs(c_sqrt) * (math.sqrt(2.0) - 1.0)

    def f(y: np.ndarray) -> np.ndarray:
        xt = xt_scale * np.sqrt(y) / (2.0 * math.pi) * (2.0 * math.pi)
        # xt(y) = xt_scale*sqrt(y) with xt_scale = 4 pi sqrt(nN)/(p^(l-l1) q)
        env = hankel_envelope(weight, eps, xt_scale * np.sqrt(y))
        w1 = bump(y) * env / (2.0 * math.sqrt(math.pi) * y ** 0.25)
        return w1 * np.exp(2j * np.pi * (c_lin * y + c_sqrt * np.sqrt(y)))

    val, err = adaptive_quad(f, bump.lo, bump.hi, tol_abs=1e-13, tol_rel=1e-11,
                             cycles=cycles)
    return OscillatoryValue(val, err)


def stationary_phase_J(eps: int, q: int, x: float, n: float, ell1: int,
                       params: PipelineParams, weight: int = 12,
                       bump=STANDARD_BUMP,
                       x_threshold: float = 1e-3) -> OscillatoryValue:
    """Leading-order stationary-phase value of integral_J.

    After y -> y^2 the phase is f(u) = c_lin u^2 + c_sqrt u with
    stationary point u0 = -c_sqrt/(2 c_lin) and f'' = 2 c_lin; the value
    is 2 u0 W1(u0^2) e(f(u0) + sgn(f'')/8)/sqrt(|f''|).  Outside the
    support image the value is 0 with the non-stationary bound as error.
    """
    if abs(x) < x_threshold:
        raise DomainError(f"|x| below stationary-phase threshold {x_threshold}")
    c_lin, c_sqrt, xt_scale = _j_phase_coeffs(eps, q, x, n, ell1, params)
    u0 = -c_sqrt / (2.0 * c_lin)
    fpp = 2.0 * c_lin
    amp_bound = 1.0 / math.sqrt(abs(fpp))
    lo, hi = math.sqrt(bump.lo), math.sqrt(bump.hi)
    if not lo <= u0 <= hi:
        # no stationary point: first-derivative bound on the whole range
        min_grad = min(abs(2 * c_lin * lo + c_sqrt), abs(2 * c_lin * hi + c_sqrt))
        return OscillatoryValue(0j, 1.0 / max(min_grad * TWO_PI, 1e-300))
    y0 = u0 * u0
    env = complex(hankel_envelope(weight, eps, xt_scale * u0)[()])
    w1 = bump(np.array([y0]))[0] * env / (2.0 * math.sqrt(math.pi) * y0 ** 0.25)
    phase = c_lin * u0 * u0 + c_sqrt * u0
    val = (2.0 * u0 * w1 * np.exp(2j * np.pi * phase)
           * np.exp(1j * math.copysign(math.pi / 4.0, fpp)) * amp_bound)
    # crude next-order error: amplitude / (f'' * support width^2)
    err = abs(val) / max(abs(fpp) * (hi - lo) ** 2, 1.0)
    return OscillatoryValue(complex(val), float(err))


def integral_frak(eps: int, q: int, n: float, m: float, params: PipelineParams,
                  kernel: DeltaKernel, x_cut: float | None = None,
                  weight: int = 12) -> OscillatoryValue:
    """frakI(eps, q, n, m) = int g(q, x) J(eps, q, x, n) I(x, q, m) dx over
    the cutoff window, trapezoid on the kernel grid (band-limited in x)."""
    if x_cut is None:
        x_cut = params.eps_cutoff()
    xg, gv = kernel.table(q)
    keep = np.abs(xg) <= x_cut
    xs, gs = xg[keep], gv[keep]
    vals = np.empty(len(xs), dtype=np.complex128)
    errs = 0.0
    for i, xv in enumerate(xs):
        jv_ = integral_J(eps, q, xv, n, params.ell1, params, weight=weight)
        iv = integral_I(xv, q, m, params)
        vals[i] = gs[i] * jv_.value * iv.value
        errs += abs(gs[i]) * (jv_.abs_error_estimate * abs(iv.value)
                              + abs(jv_.value) * iv.abs_error_estimate)
    total = _trapz(vals, xs)
    h = xs[1] - xs[0] if len(xs) > 1 else 0.0
    errs = errs * h + float(_trapz(np.abs(vals), xs) * 1e-12)
    # trapezoid self-check on the halved grid
    coarse = _trapz(vals[::2], xs[::2])
    errs += abs(total - coarse)
    return OscillatoryValue(complex(total), errs)


class FrakCache:
    """Memoizes integral_frak over the (eps, q, n, m) grid of a theta run."""

    def __init__(self, params: PipelineParams, kernel: DeltaKernel,
                 x_cut: float | None = None, weight: int = 12):
        self.params = params
        self.kernel = kernel
        self.x_cut = x_cut
        self.weight = weight
        self._store: dict[tuple[int, int, float, float], OscillatoryValue] = {}

    def get(self, eps: int, q: int, n: float, m: float) -> OscillatoryValue:
        key = (eps, q, float(n), float(m))
        if key not in self._store:
            self._store[key] = integral_frak(eps, q, n, m, self.params,
                                             self.kernel, self.x_cut, self.weight)
        return self._store[key]

    def __len__(self) -> int:
        return len(self._store)


def integral_frak1(n: int, q1: int, q2: int, m1: float, m2: float, eps: int,
                   params: PipelineParams, frak: FrakCache,
                   bump=STANDARD_BUMP,
                   panels: tuple[int, int] = (6, 12)) -> OscillatoryValue:
    """frakI1 = int W2(y) frakI(eps,q1,N0 y,m1) conj(frakI(eps,q2,N0 y,m2))
    e(-n N0 y/(p^(ell-ell1) q1 q2)) dy on two nested composite grids."""
    N0 = params.N0
    freq = n * N0 / (params.p ** params.s * q1 * q2)

    def on_grid(npan: int) -> tuple[complex, float]:
        nodes, weights = gauss_legendre_nodes(bump.lo, bump.hi, npan)
        tot = 0j
        err = 0.0
        wb = bump(nodes)
        for y, wq, wy in zip(nodes, weights, wb):
            f1 = frak.get(eps, q1, N0 * y, m1)
            f2 = frak.get(eps, q2, N0 * y, m2)
            term = f1.value * np.conj(f2.value) * np.exp(-2j * np.pi * freq * y)
            tot += wq * wy * term
            err += abs(wq) * wy * (f1.abs_error_estimate * abs(f2.value)
                                   + abs(f1.value) * f2.abs_error_estimate)
        return tot, err

    v_coarse, _ = on_grid(panels[0])
    v_fine, inner_err = on_grid(panels[1])
    return OscillatoryValue(v_fine, abs(v_fine - v_coarse) + inner_err)
