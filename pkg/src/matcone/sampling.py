"""Seeded random generation on Stiefel manifolds and matrix intervals,
plus the measure decompositions used as integration devices.

Randomness is counter-based: an ``RngState`` is a (seed, substream path)
pair, and every estimator derives disjoint substreams from its own state,
so results are bit-reproducible regardless of how work is distributed
across threads.  Monte Carlo runs accumulate chunk sums in a fixed order
for the same reason.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    DegenerateBlock,
    NotPositiveDefinite,
    RankDeficient,
    RankTooLarge,
    SpdMatrix,
    StiefelFrame,
    as_full,
    det_stack,
    is_pd_stack,
    sqrt_psd_stack,
)
from .special import siegel_log_gamma

#: Default number of draws per Monte Carlo chunk.
CHUNK = 1 << 19


@dataclass(frozen=True)
class RngState:
    """A reproducible random stream: 64-bit seed plus a substream path.

    Identical (seed, path) always reproduces the same sample sequence.
    ``substream(i)`` derives a child stream; children with distinct
    indices are statistically independent (Philox counter streams keyed
    by a spawn path).
    """

    seed: int
    path: tuple = ()

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))

    def substream(self, index: int) -> "RngState":
        return RngState(self.seed, self.path + (int(index),))


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Value, standard error (sample std / sqrt(n)), sample count, seed."""

    value: float
    stderr: float
    n_samples: int
    seed: int

    def scaled(self, c: float) -> "MonteCarloEstimate":
        return MonteCarloEstimate(
            c * self.value, abs(c) * self.stderr, self.n_samples, self.seed
        )

    def z_against(self, other) -> float:
        """z-score of the difference against another estimate or an exact
        reference value."""
        if isinstance(other, MonteCarloEstimate):
            var = self.stderr**2 + other.stderr**2
            delta = self.value - other.value
        else:
            var = self.stderr**2
            delta = self.value - float(other)
        if var == 0.0:
            return 0.0 if delta == 0.0 else float("inf")
        return abs(delta) / np.sqrt(var)


def combine_estimates(parts) -> MonteCarloEstimate:
    """Sample-size-weighted merge of independent estimates.

    Associative and order-deterministic given the same part order, so a
    parallel run merging per-substream parts reproduces a serial run.
    """
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to combine")
    n = sum(p.n_samples for p in parts)
    value = sum(p.n_samples * p.value for p in parts) / n
    var = sum((p.n_samples * p.stderr) ** 2 for p in parts) / n**2
    return MonteCarloEstimate(value, float(np.sqrt(var)), n, parts[0].seed)


def run_mc(
    chunk_values: Callable[[np.random.Generator, int], np.ndarray],
    n_samples: int,
    rng: RngState,
    chunk_size: int = CHUNK,
) -> MonteCarloEstimate:
    """Drive a vectorized sampler in fixed-size substream chunks.

    ``chunk_values(gen, size)`` must return ``size`` integrand values.
    Chunk i always uses ``rng.substream(i)``; sums accumulate in chunk
    order, so the estimate is independent of any outer parallelism.
    """
    n_samples = int(n_samples)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    total = 0
    sx = 0.0
    sxx = 0.0
    i = 0
    while total < n_samples:
        size = min(chunk_size, n_samples - total)
        vals = np.asarray(chunk_values(rng.substream(i).generator(), size), dtype=float)
        if vals.shape != (size,):
            raise ValueError(f"chunk returned shape {vals.shape}, expected ({size},)")
        sx += float(vals.sum())
        sxx += float((vals * vals).sum())
        total += size
        i += 1
    mean = sx / total
    if total > 1:
        var = max(sxx - total * mean * mean, 0.0) / (total - 1)
        stderr = float(np.sqrt(var / total))
    else:
        stderr = 0.0
    return MonteCarloEstimate(mean, stderr, total, rng.seed)


def exact_estimate(value: float, rng: RngState, n_samples: int = 0) -> MonteCarloEstimate:
    """Wrap a deterministic (quadrature or closed-form) value."""
    return MonteCarloEstimate(float(value), 0.0, int(n_samples), rng.seed)


# ---------------------------------------------------------------------------
# Stiefel manifolds


def sample_stiefel_batch(n: int, m: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """Haar-uniform frames: QR of Gaussian matrices, R-diagonal forced
    positive.  The sign fix is mandatory; without it the distribution of Q
    is not the invariant one."""
    x = gen.standard_normal((size, n, m))
    q, r = np.linalg.qr(x)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    bad = np.abs(d).min(axis=-1) < 1e-12
    while np.any(bad):  # P ~ 0; redraw degenerate Gaussians
        k = int(bad.sum())
        x[bad] = gen.standard_normal((k, n, m))
        q, r = np.linalg.qr(x)
        d = np.diagonal(r, axis1=-2, axis2=-1)
        bad = np.abs(d).min(axis=-1) < 1e-12
    return q * np.sign(d)[..., None, :]


def sample_stiefel(n: int, m: int, rng: RngState) -> StiefelFrame:
    """One Haar-uniform orthonormal m-frame in R^n."""
    return StiefelFrame(sample_stiefel_batch(n, m, 1, rng.generator())[0])


def haar_orthogonal(n: int, rng: RngState) -> np.ndarray:
    """Haar-uniform matrix from the full orthogonal group."""
    return sample_stiefel_batch(n, n, 1, rng.generator())[0]


# ---------------------------------------------------------------------------
# Matrix intervals


def unit_box_volume(l: int) -> float:
    """Volume of the rejection box for the unit interval at rank l:
    diagonal entries in (0,1), off-diagonal in (-1,1)."""
    return 2.0 ** (l * (l - 1) // 2)


def unit_interval_candidates(l: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """Uniform draws from the rejection box containing {0 < w < I}.

    Any w with 0 < w < I has diagonal entries in (0,1) and off-diagonal
    entries in (-1,1), so the box covers the interval.
    """
    w = np.empty((size, l, l))
    diag = gen.uniform(0.0, 1.0, size=(size, l))
    for i in range(l):
        w[:, i, i] = diag[:, i]
    for i in range(l):
        for j in range(i + 1, l):
            off = gen.uniform(-1.0, 1.0, size=size)
            w[:, i, j] = off
            w[:, j, i] = off
    return w


def inside_unit_interval(w: np.ndarray) -> np.ndarray:
    """Mask of candidates strictly inside the unit interval 0 < w < I."""
    eye = np.eye(w.shape[-1])
    return is_pd_stack(w) & is_pd_stack(eye - w)


def sample_matrix_interval_batch(
    s, size: int, rng: RngState, max_rounds: int = 4096
) -> np.ndarray:
    """Lebesgue-uniform samples from the matrix interval (0, s), rank <= 3.

    Rejection from the unit box, then the congruence r = s^(1/2) w s^(1/2),
    which maps Lebesgue measure on (0, I) to Lebesgue measure on (0, s).
    """
    s = as_full(s)
    l = s.shape[0]
    if l > 3:
        raise RankTooLarge("interval sampling supported for rank <= 3 only")
    shalf = SpdMatrix.from_full(s).sqrt()
    # expected acceptance = vol{0<w<I} / box volume; ~1.0, 0.26, 0.014
    accept = {1: 1.0, 2: np.pi / 12, 3: 0.0137}[l]
    out = np.empty((size, l, l))
    have = 0
    for i in range(max_rounds):
        if have >= size:
            break
        gen = rng.substream(i).generator()
        draw = int(1.5 * (size - have) / accept) + 64
        w = unit_interval_candidates(l, draw, gen)
        good = w[inside_unit_interval(w)]
        take = min(good.shape[0], size - have)
        out[have : have + take] = good[:take]
        have += take
    if have < size:
        raise RuntimeError("interval rejection sampling failed to fill the batch")
    return shalf @ out @ shalf


def sample_matrix_interval(s, rng: RngState) -> SpdMatrix:
    """One Lebesgue-uniform point of the matrix interval (0, s)."""
    return SpdMatrix.from_full(sample_matrix_interval_batch(s, 1, rng)[0])


# ---------------------------------------------------------------------------
# Decompositions


def polar_decompose(x) -> tuple[StiefelFrame, SpdMatrix]:
    """x = v r^(1/2) with v an orthonormal frame and r = x'x.

    Raises
    ------
    RankDeficient
        If x does not have full column rank (Cholesky of x'x fails).
    """
    x = np.asarray(x, dtype=float)
    gram = x.T @ x
    try:
        r = SpdMatrix.from_full(gram)
    except NotPositiveDefinite as exc:
        raise RankDeficient("x'x is not positive definite") from exc
    v = StiefelFrame(x @ r.inv_sqrt())
    return v, r


def bistiefel_decompose(v: StiefelFrame, k: int) -> tuple[np.ndarray, StiefelFrame]:
    """Split a frame into its top k x m block a and the lower frame u with
    v = [a; u (I - a'a)^(1/2)].

    Raises
    ------
    DegenerateBlock
        If I - a'a is numerically singular.
    """
    n, m = v.n, v.m
    if k + m > n:
        raise DegenerateBlock(f"need k + m <= n, got k={k}, m={m}, n={n}")
    a = np.array(v.matrix[:k, :])
    rest = v.matrix[k:, :]
    block = np.eye(m) - a.T @ a
    eigs, vecs = np.linalg.eigh(block)
    if eigs[0] < 1e-12:
        raise DegenerateBlock(f"I - a'a has smallest eigenvalue {eigs[0]:.3e}")
    inv_half = (vecs / np.sqrt(eigs)) @ vecs.T
    return a, StiefelFrame(rest @ inv_half)


# ---------------------------------------------------------------------------
# Gamma-type importance proposals on the cone


def sample_cone_gamma_batch(
    l: int, shape_p: int, size: int, gen: np.random.Generator
) -> np.ndarray:
    """Draws r = w'w / 2 with w a (shape_p x l) standard Gaussian matrix.

    For shape_p >= l the density on the cone is
    det(r)^(shape_p/2 - (l+1)/2) exp(-tr r) / Gamma_l(shape_p/2),
    the natural unnormalized-gamma proposal for cone integrals.
    """
    if shape_p < l:
        raise ValueError("need shape_p >= l for an absolutely continuous law")
    w = gen.standard_normal((size, shape_p, l))
    return 0.5 * np.swapaxes(w, -1, -2) @ w


def cone_gamma_log_density(r: np.ndarray, l: int, shape_p: int) -> np.ndarray:
    d = (l + 1) / 2
    dets = det_stack(r)
    tr = np.trace(r, axis1=-2, axis2=-1)
    return (shape_p / 2 - d) * np.log(dets) - tr - siegel_log_gamma(l, shape_p / 2)


__all__ = [
    "RngState",
    "MonteCarloEstimate",
    "combine_estimates",
    "run_mc",
    "exact_estimate",
    "sample_stiefel",
    "sample_stiefel_batch",
    "haar_orthogonal",
    "unit_box_volume",
    "unit_interval_candidates",
    "inside_unit_interval",
    "sample_matrix_interval",
    "sample_matrix_interval_batch",
    "polar_decompose",
    "bistiefel_decompose",
    "sample_cone_gamma_batch",
    "cone_gamma_log_density",
]
