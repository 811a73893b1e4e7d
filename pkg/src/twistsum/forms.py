"""Exact Fourier coefficients of the weight-12 level-1 eigenform.

The concrete form is the discriminant cusp form: its q-expansion is
q prod (1-q^n)^24 with integer coefficients tau(n), and the normalized
coefficients lambda(n) = tau(n)/n^(11/2) are what the sums consume.
Working with this fixed form gives exact integer ground truth for every
Hecke-relation and Deligne-bound check; the pipeline itself never uses
more than the eigenform structure.

Construction: Jacobi's formula gives the cube of the Euler product as the
sparse series sum_{k>=0} (-1)^k (2k+1) q^(k(k+1)/2); cubing once and then
squaring three times (with truncation after every multiply) yields the
24th power.  The dense squarings run through Kronecker substitution --
coefficients packed into one big integer so gmpy2's FFT multiplication
does the convolution exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
import numpy as np

from .modarith import DomainError, is_prime


class ResourceBudgetError(RuntimeError):
    """Requested table exceeds the configured memory budget."""


WEIGHT = 12

# Table construction above this nmax is refused (roughly 1 GB of packed
# integers at the default coefficient width).
NMAX_BUDGET = 2_000_000


def _pack(coeffs: list[int], width_bytes: int) -> gmpy2.mpz:
    """Pack nonnegative coefficients into one integer, width_bytes apart."""
    buf = bytearray(len(coeffs) * width_bytes)
    for i, c in enumerate(coeffs):
        if c:
            buf[i * width_bytes:(i + 1) * width_bytes] = c.to_bytes(width_bytes, "little")
    return gmpy2.mpz(int.from_bytes(buf, "little"))


def _unpack(big: gmpy2.mpz, n: int, width_bytes: int) -> list[int]:
    nbytes = max(n * width_bytes, (int(big).bit_length() + 7) // 8) + 16
    buf = int(big).to_bytes(nbytes, "little")
    return [int.from_bytes(buf[i * width_bytes:(i + 1) * width_bytes], "little")
            for i in range(n)]


def _square_truncated(coeffs: list[int], nmax: int) -> list[int]:
    """Exact truncated square of an integer polynomial via Kronecker packing.

    Splits into positive and negative parts so the packed digits stay
    nonnegative; the digit width is sized from the coefficient magnitudes
    so convolution sums cannot carry across digit boundaries.
    """
    n = min(len(coeffs), nmax + 1)
    coeffs = coeffs[:n]
    maxabs = max(1, max(abs(c) for c in coeffs))
    # |convolution coefficient| <= n * maxabs^2; add headroom bits.
    width_bytes = ((n * maxabs * maxabs).bit_length() + 2 + 7) // 8
    pos = [c if c > 0 else 0 for c in coeffs]
    neg = [-c if c < 0 else 0 for c in coeffs]
    bp = _pack(pos, width_bytes)
    bn = _pack(neg, width_bytes)
    out_len = min(2 * n - 1, nmax + 1)
    vals_pp = _unpack(bp * bp, out_len, width_bytes)
    vals_nn = _unpack(bn * bn, out_len, width_bytes)
    vals_pn = _unpack(bp * bn, out_len, width_bytes)
    return [vals_pp[i] + vals_nn[i] - 2 * vals_pn[i] for i in range(out_len)]


def _eta_cube(nmax: int) -> list[int]:
    """Coefficients of prod(1-q^n)^3 = sum (-1)^k (2k+1) q^(k(k+1)/2)."""
    out = [0] * (nmax + 1)
    k = 0
    while k * (k + 1) // 2 <= nmax:
        out[k * (k + 1) // 2] = (2 * k + 1) * (-1 if k % 2 else 1)
        k += 1
    return out


@dataclass
class FormTable:
    """tau(1..nmax) exactly plus lambda(n) = tau(n)/n^(11/2) as doubles.

    tau entries are exact for n <= tau_exact_upto (always the whole table
    when freshly built; possibly a prefix when loaded from a cache file).
    """

    weight: int
    nmax: int
    tau: list[int]          # tau[0] unused, tau[n] for 1 <= n <= tau_exact_upto
    lam: np.ndarray         # lam[n] for 1 <= n <= nmax, lam[0] = 0.0
    tau_exact_upto: int

    def lambda_(self, n: int) -> float:
        if not 1 <= n <= self.nmax:
            raise DomainError(f"n={n} outside table range 1..{self.nmax}")
        return float(self.lam[n])

    def tau_(self, n: int) -> int:
        if not 1 <= n <= self.tau_exact_upto:
            raise DomainError(f"exact tau only stored up to {self.tau_exact_upto}")
        return self.tau[n]


def build_delta_table(nmax: int) -> FormTable:
    """Exact tau(n), n <= nmax, from the 24th power of the Euler product."""
    if nmax < 1:
        raise DomainError("nmax must be >= 1")
    if nmax > NMAX_BUDGET:
        raise ResourceBudgetError(f"nmax={nmax} exceeds budget {NMAX_BUDGET}")
    # tau(n) multiplies q^(n-1) in the 24th power, so truncate there.
    e3 = _eta_cube(nmax - 1)
    e6 = _square_truncated(e3, nmax - 1)
    e12 = _square_truncated(e6, nmax - 1)
    e24 = _square_truncated(e12, nmax - 1)
    tau = [0] * (nmax + 1)
    for i, c in enumerate(e24):
        tau[i + 1] = c
    n = np.arange(nmax + 1, dtype=np.float64)
    lam = np.zeros(nmax + 1)
    lam[1:] = np.array([float(t) for t in tau[1:]], dtype=np.float64)
    lam[1:] /= n[1:] ** 5.5
    return FormTable(WEIGHT, nmax, tau, lam, nmax)


def lambda_(table: FormTable, n: int) -> float:
    return table.lambda_(n)


def hecke_relation_check(table: FormTable, p0: int, n: int) -> bool:
    """tau(p0) tau(n) = tau(p0 n) + p0^11 tau(n/p0), exactly in integers."""
    if not is_prime(p0):
        raise DomainError(f"p0={p0} is not prime")
    if p0 * n > table.tau_exact_upto:
        raise DomainError("p0*n beyond the exact range of the table")
    lhs = table.tau_(p0) * table.tau_(n)
    rhs = table.tau_(p0 * n)
    if n % p0 == 0:
        rhs += p0 ** 11 * table.tau_(n // p0)
    return lhs == rhs


def divisor_counts(nmax: int) -> np.ndarray:
    """d(n) for n = 0..nmax by sieve (d[0] = 0)."""
    d = np.zeros(nmax + 1, dtype=np.int64)
    for k in range(1, nmax + 1):
        d[k::k] += 1
    return d
