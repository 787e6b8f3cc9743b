"""Siegel gamma and beta functions of the cone, and Stiefel manifold
volumes.

These are the closed-form constants every verification in the package is
checked against.  The rank-l gamma function is the product

    pi^(l(l-1)/4) * prod_{j=0}^{l-1} Gamma(alpha - j/2),

its log form is restricted to the region where every scalar factor is
positive, and all ratio constants used elsewhere are assembled in log
space and exponentiated once so that frame dimensions up to a dozen never
overflow.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gamma as _scalar_gamma
from scipy.special import gammaln as _scalar_gammaln

from .core import DimError, DomainError, PoleError

LOG_PI = math.log(math.pi)

#: Distance tolerance for detecting gamma poles at non-positive integers.
POLE_TOL = 1e-9


def _check_rank(rank: int) -> int:
    rank = int(rank)
    if rank < 1:
        raise DimError("rank must be a positive integer")
    return rank


def siegel_log_gamma(rank: int, alpha: float) -> float:
    """log of the rank-``rank`` Siegel gamma function at ``alpha``.

    Requires alpha > (rank - 1)/2 so that every scalar gamma factor is
    positive (the log form is only defined there).
    """
    rank = _check_rank(rank)
    alpha = float(alpha)
    if alpha <= (rank - 1) / 2:
        raise DomainError(
            f"log form needs alpha > (rank-1)/2 = {(rank - 1) / 2}, got {alpha}"
        )
    j = np.arange(rank)
    return float(rank * (rank - 1) / 4 * LOG_PI + np.sum(_scalar_gammaln(alpha - j / 2)))


def siegel_gamma(rank: int, alpha: float) -> float:
    """Signed value of the Siegel gamma function.

    Valid for any real ``alpha`` that is not a pole of a factor
    Gamma(alpha - j/2); negative arguments go through the scalar gamma's
    reflection, so the result carries the correct sign.

    Raises
    ------
    PoleError
        If some alpha - j/2 is within ``POLE_TOL`` of a non-positive
        integer.
    """
    rank = _check_rank(rank)
    alpha = float(alpha)
    args = alpha - np.arange(rank) / 2
    near_int = np.abs(args - np.round(args)) < POLE_TOL
    if np.any(near_int & (np.round(args) <= 0)):
        raise PoleError(f"alpha={alpha} hits a gamma pole at rank {rank}")
    return float(math.pi ** (rank * (rank - 1) / 4) * np.prod(_scalar_gamma(args)))


def siegel_beta(rank: int, alpha: float, beta: float) -> float:
    """Beta function of the cone: Gamma_l(a) Gamma_l(b) / Gamma_l(a+b).

    Computed in log space; symmetric in (alpha, beta) exactly because the
    log terms are added commutatively.
    """
    rank = _check_rank(rank)
    lo = (rank - 1) / 2
    if alpha <= lo or beta <= lo:
        raise DomainError(f"need alpha, beta > {lo}, got {alpha}, {beta}")
    return math.exp(
        siegel_log_gamma(rank, alpha)
        + siegel_log_gamma(rank, beta)
        - siegel_log_gamma(rank, alpha + beta)
    )


def stiefel_volume(n: int, m: int) -> float:
    """Total volume 2^m pi^(nm/2) / Gamma_m(n/2) of the manifold of
    orthonormal m-frames in R^n."""
    n, m = int(n), int(m)
    if not 1 <= m <= n:
        raise DimError(f"need 1 <= m <= n, got n={n}, m={m}")
    return math.exp(m * math.log(2.0) + n * m / 2 * LOG_PI - siegel_log_gamma(m, n / 2))


def siegel_gamma_ratio(rank: int, num: float, den: float) -> float:
    """Gamma_l(num) / Gamma_l(den) in log space (both in the log domain)."""
    return math.exp(siegel_log_gamma(rank, num) - siegel_log_gamma(rank, den))
