"""Radon transforms between Grassmann manifolds and their verification
against the cone fractional integrals.

Planes are parametrized by orthonormal frames: an m-plane by a frame
v in V_{n,m} spanning it, a k-plane by a frame xi in V_{n,n-k} spanning
its orthogonal complement.  Canonical frames sit in the bottom block of
the ambient space, and sigma_l denotes the frame of the last l coordinate
axes, so "bottom l rows" is the projection onto those axes throughout.

The Radon transform averages a function of the m-plane over all m-planes
inside a fixed k-plane; the dual transform averages over all k-planes
containing a fixed m-plane.  For functions depending on the plane only
through its interaction with the last l axes (l-zonal functions), both
transforms reduce to two-parameter fractional integrals on the rank-l
cone, and the verifiers below estimate both sides of that reduction
independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ConstraintViolation,
    DegenerateProjection,
    DimError,
    SpdMatrix,
    StiefelFrame,
    SymmetricMatrix,
    TestFunction,
    max_norm,
)
from .fracint import ALPHA_MARGIN, WallachParameter, cone_half_dim, ek_integral
from .sampling import MonteCarloEstimate, RngState, run_mc, sample_stiefel, sample_stiefel_batch
from .special import siegel_log_gamma

_ROTATION_SUBSTREAM = 0
_MC_SUBSTREAM = 1
_POINT_SUBSTREAM = 2


@dataclass(frozen=True)
class GrassmannConfig:
    """Ambient dimension n, source plane dim m, target plane dim k, and
    the zonality rank l."""

    n: int
    m: int
    k: int
    ell: int

    def __post_init__(self):
        if not 1 <= self.m < self.k <= self.n - 1:
            raise ConstraintViolation(
                f"need 1 <= m < k <= n-1, got n={self.n}, m={self.m}, k={self.k}"
            )
        if self.ell < 1:
            raise ConstraintViolation("zonality rank must be >= 1")

    @property
    def alpha(self) -> float:
        return (self.k - self.m) / 2

    def check_zonal_radon(self):
        if self.ell > self.k - self.m:
            raise ConstraintViolation(
                f"zonal reduction needs ell <= k - m = {self.k - self.m}, got {self.ell}"
            )

    def check_zonal_dual(self):
        cap = min(self.k - self.m, self.n - self.m)
        if self.ell > cap:
            raise ConstraintViolation(
                f"dual zonal reduction needs ell <= min(k-m, n-m) = {cap}, got {self.ell}"
            )

    def check_variance_margin(self):
        """Estimator-side guard: the kernel exponent must sit at least
        ALPHA_MARGIN above the convergence threshold, unless the rank-1
        quadrature path applies."""
        d = cone_half_dim(self.ell)
        if self.ell > 1 and self.alpha <= d - 1 + ALPHA_MARGIN:
            raise ConstraintViolation(
                f"(k-m)/2 = {self.alpha} within the variance margin "
                f"{d - 1 + ALPHA_MARGIN} at rank {self.ell}"
            )


@dataclass(frozen=True)
class ZonalFunction:
    """Lift of a rank-l profile to frames: value depends on the frame
    only through the Gram matrix of its bottom l rows.

    By construction the lift is right-invariant (it sees only v v') and
    invariant under rotations fixing the last l coordinate axes.
    """

    rank: int
    profile: TestFunction
    n: int
    cols: int

    def batch(self, frames: np.ndarray) -> np.ndarray:
        bottom = frames[..., self.n - self.rank :, :]
        gram = bottom @ np.swapaxes(bottom, -1, -2)
        return self.profile.fn(gram)

    def __call__(self, frame) -> float:
        arr = np.asarray(frame, dtype=float)
        return float(self.batch(arr[None])[0])


def _evaluator(f):
    return f.batch if isinstance(f, ZonalFunction) else f


def rotation_to_frame(xi: StiefelFrame, rng: RngState | None = None) -> np.ndarray:
    """An orthogonal matrix g mapping the canonical bottom-block frame to
    xi: g [0; I_p] = xi.

    The complement columns come from QR-orthonormalizing a random Gaussian
    block projected off xi; any completion is valid, and transforms of
    right-invariant functions do not depend on the choice.
    """
    if rng is None:
        rng = RngState(0)
    x = xi.matrix
    n, p = x.shape
    if p == n:
        return np.array(x)
    gen = rng.generator()
    for _ in range(32):
        raw = gen.standard_normal((n, n - p))
        raw -= x @ (x.T @ raw)
        q, r = np.linalg.qr(raw)
        diag = np.diagonal(r)
        if np.min(np.abs(diag)) > 1e-10:
            break
    else:
        raise RuntimeError("could not complete the frame to a basis")
    comp = q * np.sign(diag)
    g = np.concatenate([comp, x], axis=1)
    if max_norm(g.T @ g - np.eye(n)) > 1e-10:
        raise RuntimeError("completion lost orthogonality")
    return g


def radon(
    f,
    xi: StiefelFrame,
    cfg: GrassmannConfig,
    n_samples: int,
    rng: RngState,
    rotation: np.ndarray | None = None,
) -> MonteCarloEstimate:
    """Average of the right-invariant function f over the m-planes inside
    the k-plane whose complement frame is xi.

    Monte Carlo over Haar frames w in V_{k,m}: the plane frames are
    g_xi [w; 0] with g_xi any rotation carrying the canonical frame to
    xi.  The averaging measure is a probability measure, so a plain mean.
    """
    if xi.n != cfg.n or xi.m != cfg.n - cfg.k:
        raise DimError(
            f"expected a {cfg.n} x {cfg.n - cfg.k} complement frame, got {xi.n} x {xi.m}"
        )
    if rotation is None:
        rotation = rotation_to_frame(xi, rng.substream(_ROTATION_SUBSTREAM))
    top_cols = rotation[:, : cfg.k]
    fn = _evaluator(f)

    def chunk(gen, size):
        w = sample_stiefel_batch(cfg.k, cfg.m, size, gen)
        return fn(top_cols @ w)

    return run_mc(chunk, n_samples, rng.substream(_MC_SUBSTREAM))


def dual_radon(
    phi,
    v: StiefelFrame,
    cfg: GrassmannConfig,
    n_samples: int,
    rng: RngState,
    rotation: np.ndarray | None = None,
) -> MonteCarloEstimate:
    """Average of the right-invariant function phi over the k-planes
    containing the m-plane spanned by v.

    Monte Carlo over Haar frames u in V_{n-m,n-k}: the complement frames
    are gamma_v [u; 0] with gamma_v any rotation carrying the canonical
    frame to v.
    """
    if v.n != cfg.n or v.m != cfg.m:
        raise DimError(f"expected a {cfg.n} x {cfg.m} frame, got {v.n} x {v.m}")
    if rotation is None:
        rotation = rotation_to_frame(v, rng.substream(_ROTATION_SUBSTREAM))
    top_cols = rotation[:, : cfg.n - cfg.m]
    fn = _evaluator(phi)

    def chunk(gen, size):
        u = sample_stiefel_batch(cfg.n - cfg.m, cfg.n - cfg.k, size, gen)
        return fn(top_cols @ u)

    return run_mc(chunk, n_samples, rng.substream(_MC_SUBSTREAM))


def projection_profile(xi: StiefelFrame, ell: int) -> SymmetricMatrix:
    """The rank-l profile point of a complement frame: I_l minus the Gram
    matrix of the bottom l rows, i.e. the last-l-axes block of the
    orthogonal projection onto the plane.  Eigenvalues are clamped to
    [0, 1] against roundoff."""
    if ell > xi.n:
        raise DimError("profile rank exceeds the ambient dimension")
    bottom = xi.matrix[xi.n - ell :, :]
    raw = np.eye(ell) - bottom @ bottom.T
    eigs, vecs = np.linalg.eigh(raw)
    eigs = np.clip(eigs, 0.0, 1.0)
    return SymmetricMatrix.from_full((vecs * eigs) @ vecs.T)


@dataclass(frozen=True)
class TheoremCheck:
    """One verification of a zonal-reduction theorem: both sides with
    standard errors and the z-score of their difference."""

    lhs: MonteCarloEstimate
    rhs: MonteCarloEstimate
    z: float
    point: SymmetricMatrix
    resamples: int


def _draw_interior_point(sample_frame, profile_of, margin: float, max_tries: int):
    for attempt in range(max_tries):
        frame = sample_frame(attempt)
        prof = profile_of(frame)
        eigs = np.linalg.eigvalsh(prof.full())
        if eigs[0] >= margin and eigs[-1] <= 1.0 - margin:
            return frame, prof, attempt
    raise DegenerateProjection(f"no interior profile point in {max_tries} draws")


def verify_radon_theorem(
    cfg: GrassmannConfig,
    f0: TestFunction,
    n_samples: int,
    rng: RngState,
    margin: float = 0.05,
    max_tries: int = 100,
    rhs_samples: int | None = None,
) -> TheoremCheck:
    """Check that the Radon transform of the zonal lift of f0 equals
    Gamma_l(k/2) times the two-parameter fractional integral of f0 with
    exponents (k-m)/2 and m/2, at a random interior profile point.

    Both sides are independent Monte Carlo estimates (the right side is
    quadrature at rank 1); the z-score of their difference is the check
    statistic.
    """
    cfg.check_zonal_radon()
    cfg.check_variance_margin()
    ell = cfg.ell

    def sample_frame(attempt):
        return sample_stiefel(
            cfg.n, cfg.n - cfg.k, rng.substream(_POINT_SUBSTREAM).substream(attempt)
        )

    xi, prof, tries = _draw_interior_point(
        sample_frame, lambda fr: projection_profile(fr, ell), margin, max_tries
    )
    lift = ZonalFunction(ell, f0, cfg.n, cfg.m)
    lhs = radon(lift, xi, cfg, n_samples, rng.substream(10))
    beta = (
        WallachParameter.half(cfg.m)
        if cfg.m < ell
        else WallachParameter.generic(cfg.m / 2)
    )
    s = SpdMatrix.from_full(prof.full())
    raw = ek_integral(
        "left", cfg.alpha, beta, f0, s, rhs_samples or n_samples, rng.substream(11)
    )
    rhs = raw.scaled(math.exp(siegel_log_gamma(ell, cfg.k / 2)))
    return TheoremCheck(lhs, rhs, lhs.z_against(rhs), prof, tries)


def verify_dual_theorem(
    cfg: GrassmannConfig,
    phi0: TestFunction,
    n_samples: int,
    rng: RngState,
    margin: float = 0.05,
    max_tries: int = 100,
    rhs_samples: int | None = None,
) -> TheoremCheck:
    """Check that the dual Radon transform of the zonal lift of phi0
    equals Gamma_l((n-m)/2) times the two-parameter fractional integral
    of phi0 with exponents (k-m)/2 and (n-k)/2, at a random interior
    profile point of the source frame."""
    cfg.check_zonal_dual()
    cfg.check_variance_margin()
    ell = cfg.ell

    def sample_frame(attempt):
        return sample_stiefel(
            cfg.n, cfg.m, rng.substream(_POINT_SUBSTREAM).substream(attempt)
        )

    v, prof, tries = _draw_interior_point(
        sample_frame, lambda fr: projection_profile(fr, ell), margin, max_tries
    )
    lift = ZonalFunction(ell, phi0, cfg.n, cfg.n - cfg.k)
    lhs = dual_radon(lift, v, cfg, n_samples, rng.substream(10))
    nk = cfg.n - cfg.k
    beta = (
        WallachParameter.half(nk) if nk < ell else WallachParameter.generic(nk / 2)
    )
    r = SpdMatrix.from_full(prof.full())
    raw = ek_integral(
        "left", cfg.alpha, beta, phi0, r, rhs_samples or n_samples, rng.substream(11)
    )
    rhs = raw.scaled(math.exp(siegel_log_gamma(ell, (cfg.n - cfg.m) / 2)))
    return TheoremCheck(lhs, rhs, lhs.z_against(rhs), prof, tries)


def block_rotation(rho: np.ndarray, n: int) -> np.ndarray:
    """The ambient rotation diag(rho, I_{n-r}) fixing the last n - r
    coordinate axes (r = rho's size)."""
    r = rho.shape[0]
    g = np.eye(n)
    g[:r, :r] = rho
    return g
