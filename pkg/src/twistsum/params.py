"""Parameter tuple for the decomposition pipeline.

Collects (N, p, r, ell, ell1) with the derived quantities Q, M0, N0 and
the cutoff policy: every N^epsilon factor in a truncation is realized as
(log N)^c_eps with configurable c_eps (N^epsilon itself is not computable;
log powers keep the integration-by-parts structure of every truncation at
desk scale).  c_eps = 0 gives bare cutoffs for micro instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .modarith import DomainError, is_prime


@dataclass(frozen=True)
class PipelineParams:
    N: float
    p: int
    r: int
    ell: int
    ell1: int = 0
    c_eps: float = 3.0

    def __post_init__(self):
        if not is_prime(self.p) or self.p < 3:
            raise DomainError(f"p must be an odd prime, got {self.p}")
        if not 1 <= self.ell <= self.r:
            raise DomainError(f"need 1 <= ell <= r, got ell={self.ell}, r={self.r}")
        if not 0 <= self.ell1 <= self.ell:
            raise DomainError(f"need 0 <= ell1 <= ell, got ell1={self.ell1}")
        if self.p ** self.ell > self.N:
            raise DomainError(f"need p^ell <= N, got {self.p}^{self.ell} > {self.N}")

    @property
    def s(self) -> int:
        """Depth ell - ell1 of the quadratic expansion in the dual analysis."""
        return self.ell - self.ell1

    @property
    def Q(self) -> float:
        """Modulus cap of the delta expansion, Q = sqrt(N / p^ell)."""
        return math.sqrt(self.N / self.p ** self.ell)

    def eps_cutoff(self) -> float:
        """(log N)^c_eps, the stand-in for N^epsilon in truncations."""
        return math.log(self.N) ** self.c_eps if self.c_eps else 1.0

    @property
    def M0(self) -> float:
        """Truncation of the dual m-sum after Poisson."""
        return self.p ** self.r * self.Q / self.N * self.eps_cutoff()

    @property
    def N0(self) -> float:
        """Truncation of the dual n-sum after Voronoi."""
        return self.p ** (self.ell - 2 * self.ell1) * self.eps_cutoff()

    def require_expansion_depth(self) -> None:
        """Uses of the quadratic expansion need ell <= 2r/3."""
        if 3 * self.ell > 2 * self.r:
            raise DomainError(
                f"expansion requires ell <= 2r/3, got ell={self.ell}, r={self.r}")

    def require_even_depth(self) -> None:
        """The nonzero-frequency closed form splits alpha at depth s/2."""
        if self.s % 2 != 0 or self.s < 2:
            raise DomainError(f"need ell - ell1 even and >= 2, got {self.s}")
