"""Dense small-matrix types, the Loewner order, and the factorizations
every other module consumes.

Everything is sized for desk scale (matrix ranks <= 8, frames up to a dozen
rows): plain float64 numpy arrays, no sparsity.  All types are immutable
after construction and safe to share across threads; all operations here
are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MAX_RANK = 8

# Support descriptors for scalar functions of a symmetric matrix argument.
SUPPORT_CONE = "cone"                    # all positive semi-definite matrices
SUPPORT_UNIT_INTERVAL = "unit-interval"  # the matrix interval (0, I)
SUPPORT_COMPACT = "compact-in-Q"         # compact subset strictly inside (0, I)

_SUPPORTS = (SUPPORT_CONE, SUPPORT_UNIT_INTERVAL, SUPPORT_COMPACT)


class DimError(ValueError):
    """Dimensions are out of the supported range or inconsistent."""


class DimMismatch(DimError):
    """Two operands have different dimensions."""


class NotPositiveDefinite(ValueError):
    """A matrix required to be positive definite is not."""


class RankDeficient(ValueError):
    """A matrix required to have full column rank does not."""


class RankTooLarge(DimError):
    """The requested rank exceeds what the sampler supports."""


class DegenerateBlock(ValueError):
    """A decomposition block is numerically singular."""


class DomainError(ValueError):
    """A parameter lies outside the domain of an operation."""


class PoleError(DomainError):
    """The argument hits a pole of a gamma factor."""


class PointOutsideQ(DomainError):
    """The evaluation point is not strictly inside the unit interval."""


class StepTooSmall(ValueError):
    """Finite-difference step too small to be trustworthy."""


class DegenerateProjection(RuntimeError):
    """Could not draw a frame whose projection profile is interior."""


class ConstraintViolation(ValueError):
    """A Grassmannian configuration violates its standing assumptions."""


def symmetrize(a):
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def max_norm(a) -> float:
    """Entrywise max-abs norm."""
    return float(np.max(np.abs(a)))


def det_stack(a: np.ndarray) -> np.ndarray:
    """Determinants of a stack (..., l, l), closed forms for l <= 3."""
    a = np.asarray(a, dtype=float)
    l = a.shape[-1]
    if l == 1:
        return a[..., 0, 0].copy()
    if l == 2:
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    if l == 3:
        return (
            a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
            - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
            + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0])
        )
    return np.linalg.det(a)


def eigvalsh_stack(a: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a stack of symmetric matrices.

    Closed forms for l <= 2 (the hot path in the samplers), LAPACK above.
    """
    a = np.asarray(a, dtype=float)
    l = a.shape[-1]
    if l == 1:
        return a[..., 0, 0][..., None].copy()
    if l == 2:
        half_tr = 0.5 * (a[..., 0, 0] + a[..., 1, 1])
        # discriminant is >= 0 for symmetric input; clip guards roundoff
        disc = np.sqrt(np.clip(half_tr**2 - det_stack(a), 0.0, None))
        return np.stack([half_tr - disc, half_tr + disc], axis=-1)
    return np.linalg.eigvalsh(a)


def is_pd_stack(a: np.ndarray) -> np.ndarray:
    """Positive-definiteness mask for a stack of symmetric matrices.

    Uses Sylvester's criterion (leading principal minors) for l <= 3,
    eigenvalues above.  Exact in the sense that no tolerance slack is
    applied; candidates on the boundary fail.
    """
    a = np.asarray(a, dtype=float)
    l = a.shape[-1]
    if l == 1:
        return a[..., 0, 0] > 0.0
    if l == 2:
        return (a[..., 0, 0] > 0.0) & (det_stack(a) > 0.0)
    if l == 3:
        m1 = a[..., 0, 0]
        m2 = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
        return (m1 > 0.0) & (m2 > 0.0) & (det_stack(a) > 0.0)
    return eigvalsh_stack(a)[..., 0] > 0.0


def cholesky_spd(a, pivot_tol: float = 1e-12) -> np.ndarray:
    """Lower Cholesky factor of a single symmetric matrix.

    Pivots must exceed ``pivot_tol * max_norm(a)``; this is the certified
    positive-definiteness test used throughout.

    Raises
    ------
    NotPositiveDefinite
        If any pivot falls at or below the tolerance.
    """
    a = np.asarray(a, dtype=float)
    l = a.shape[0]
    tol = pivot_tol * max(max_norm(a), 1e-300)
    low = np.zeros((l, l))
    for j in range(l):
        d = a[j, j] - low[j, :j] @ low[j, :j]
        if d <= tol:
            raise NotPositiveDefinite(f"pivot {j} is {d:.3e} (tol {tol:.3e})")
        low[j, j] = np.sqrt(d)
        for i in range(j + 1, l):
            low[i, j] = (a[i, j] - low[i, :j] @ low[j, :j]) / low[j, j]
    return low


def is_pd(a) -> bool:
    """Certified positive-definiteness test (Cholesky success)."""
    try:
        cholesky_spd(a)
    except NotPositiveDefinite:
        return False
    return True


def is_psd(a, slack: float = 1e-10) -> bool:
    """Membership in the closed cone, with eigenvalue slack below zero.

    The slack admits rank-deficient Gram matrices w'w whose smallest
    eigenvalues are tiny negative roundoff.
    """
    a = np.asarray(a, dtype=float)
    eigs = np.linalg.eigvalsh(a)
    return bool(eigs[0] >= -slack * max(1.0, max_norm(a)))


def _check_square_symmetric(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class SymmetricMatrix:
    """A real symmetric matrix stored as its upper triangle (row-major).

    Symmetry is structural: only one copy of each off-diagonal entry
    exists, so the represented matrix is symmetric by construction.
    """

    dim: int
    upper: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise DimError("dim must be >= 1")
        want = self.dim * (self.dim + 1) // 2
        upper = np.array(self.upper, dtype=float).reshape(-1)
        if upper.size != want:
            raise DimError(f"expected {want} upper-triangle entries, got {upper.size}")
        upper.setflags(write=False)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def from_full(cls, a) -> "SymmetricMatrix":
        a = _check_square_symmetric(a)
        a = symmetrize(a)
        iu = np.triu_indices(a.shape[0])
        return cls(a.shape[0], a[iu])

    def full(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        iu = np.triu_indices(self.dim)
        out[iu] = self.upper
        out.T[iu] = self.upper
        return out

    def __array__(self, dtype=None, copy=None):
        return self.full() if dtype is None else self.full().astype(dtype)


@dataclass(frozen=True)
class SpdMatrix:
    """A symmetric matrix certified positive definite at construction."""

    sym: SymmetricMatrix

    def __post_init__(self):
        cholesky_spd(self.sym.full())  # raises NotPositiveDefinite

    @classmethod
    def from_full(cls, a) -> "SpdMatrix":
        return cls(SymmetricMatrix.from_full(a))

    @property
    def dim(self) -> int:
        return self.sym.dim

    def full(self) -> np.ndarray:
        return self.sym.full()

    def det(self) -> float:
        return float(np.linalg.det(self.full()))

    def sqrt(self) -> np.ndarray:
        return sqrt_spd(self).full()

    def inv_sqrt(self) -> np.ndarray:
        eigs, vecs = np.linalg.eigh(self.full())
        return (vecs / np.sqrt(eigs)) @ vecs.T

    def __array__(self, dtype=None, copy=None):
        return self.sym.__array__(dtype)


def as_full(a) -> np.ndarray:
    """Coerce SymmetricMatrix / SpdMatrix / array-like to a dense array."""
    if isinstance(a, (SymmetricMatrix, SpdMatrix)):
        return a.full()
    return np.asarray(a, dtype=float)


@dataclass(frozen=True)
class StiefelFrame:
    """An n x m matrix with orthonormal columns.

    Nearly-orthonormal input (defect above 1e-10) is re-orthonormalized by
    a sign-fixed QR; genuinely rank-deficient input raises.
    """

    matrix: np.ndarray

    def __post_init__(self):
        x = np.array(self.matrix, dtype=float)
        if x.ndim != 2:
            raise DimError("a frame must be a 2-d array")
        n, m = x.shape
        if not 1 <= m <= n:
            raise DimError(f"need 1 <= m <= n, got n={n}, m={m}")
        if self._defect(x) > 1e-10:
            q, r = np.linalg.qr(x)
            diag = np.diagonal(r)
            if np.min(np.abs(diag)) < 1e-12 * max(max_norm(x), 1.0):
                raise RankDeficient("columns are numerically dependent")
            x = q * np.sign(diag)
            if self._defect(x) > 1e-10:
                raise RankDeficient("re-orthonormalization failed")
        x.setflags(write=False)
        object.__setattr__(self, "matrix", x)

    @staticmethod
    def _defect(x) -> float:
        m = x.shape[1]
        return max_norm(x.T @ x - np.eye(m))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.matrix.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class TestFunction:
    """A scalar integrand on symmetric matrices with support metadata.

    ``fn`` must accept a stacked array (..., dim, dim) and return values of
    shape (...); it must be deterministic and finite on the declared
    support.  ``cayley_plus`` optionally holds a closed-form image under
    the raised determinant-derivative operator (see fracint.cayley_apply),
    used where tests need an exact derivative.  ``det_growth`` hints the
    determinant power of the integrand near the cone boundary, consumed by
    importance-sampling proposals.
    """

    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    support: str = SUPPORT_CONE
    smooth: bool = True
    name: str = ""
    det_growth: float | None = None
    cayley_plus: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.support not in _SUPPORTS:
            raise ValueError(f"unknown support {self.support!r}")
        if self.dim < 1:
            raise DimError("dim must be >= 1")

    def __call__(self, r) -> float:
        r = as_full(r)
        return float(self.fn(r[None, :, :])[0])


def det(a) -> float:
    """Determinant of a symmetric matrix."""
    return float(np.linalg.det(as_full(a)))


def sqrt_spd(a) -> SpdMatrix:
    """Symmetric positive definite square root, via eigendecomposition.

    Raises
    ------
    NotPositiveDefinite
        If the smallest eigenvalue is <= 0.
    """
    a = as_full(a)
    eigs, vecs = np.linalg.eigh(a)
    if eigs[0] <= 0.0:
        raise NotPositiveDefinite(f"smallest eigenvalue {eigs[0]:.3e} <= 0")
    root = (vecs * np.sqrt(eigs)) @ vecs.T
    return SpdMatrix.from_full(root)


def loewner_lt(a, b) -> bool:
    """Strict Loewner order: a < b iff b - a is positive definite."""
    a, b = as_full(a), as_full(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shapes {a.shape} and {b.shape} differ")
    return is_pd(b - a)


def sqrt_psd_stack(a: np.ndarray) -> np.ndarray:
    """Symmetric square roots of a stack of PSD matrices (eigenvalues
    clipped at zero to absorb roundoff)."""
    eigs, vecs = np.linalg.eigh(a)
    root = np.sqrt(np.clip(eigs, 0.0, None))
    return (vecs * root[..., None, :]) @ np.swapaxes(vecs, -1, -2)
