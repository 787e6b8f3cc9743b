"""Fractional integrals associated to the cone of positive definite
matrices.

The left/right determinant-kernel integrals over matrix intervals, their
half-integer forms as Gaussian-matrix integrals, the two-parameter
determinant-weighted (Erdelyi-Kober type) integrals in both parameter
branches, the determinant differential operators, determinant-power
distributions on the cone, and the matrix Laplace transform.

Evaluation strategy: rank 1 goes through Gauss-Legendre quadrature with
singularity-absorbing substitutions; rank >= 2 through unbiased
rejection-box Monte Carlo (candidates drawn uniformly on a box enclosing
the integration region, rejected points contributing zero, so the plain
sample mean is unbiased and the reported standard error includes the
rejection variance); unbounded cone integrals through Wishart-type
importance proposals r = w'w/2.

Verification suites should keep alpha at least 0.25 above the convergence
threshold so the determinant kernels have manageable variance under
uniform sampling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .core import (
    DomainError,
    PointOutsideQ,
    SpdMatrix,
    StepTooSmall,
    SUPPORT_CONE,
    TestFunction,
    as_full,
    det_stack,
    is_pd,
    is_pd_stack,
    max_norm,
)
from .sampling import (
    MonteCarloEstimate,
    RngState,
    exact_estimate,
    run_mc,
    sample_cone_gamma_batch,
    sample_stiefel_batch,
    unit_box_volume,
    unit_interval_candidates,
    inside_unit_interval,
)
from .special import siegel_log_gamma, stiefel_volume

SIDES = ("left", "right")

#: Variance margin: suites keep alpha >= cone_half_dim - 1 + this.
ALPHA_MARGIN = 0.25


def cone_half_dim(l: int) -> float:
    """The pivot exponent (l + 1)/2 of all determinant kernels."""
    return (l + 1) / 2


@dataclass(frozen=True)
class WallachParameter:
    """Second parameter of the two-parameter integrals.

    Either a half-integer m/2 carried as its numerator m (the discrete
    part of the admissible set, m <= l-1), or a generic real above
    (l-1)/2.  Half-integers with m >= l lie in the overlap of the two
    branches and resolve to the generic one.
    """

    value: float
    half_numerator: int | None = None

    @classmethod
    def half(cls, m: int) -> "WallachParameter":
        m = int(m)
        if m < 1:
            raise DomainError("half-integer numerator must be >= 1")
        return cls(m / 2, m)

    @classmethod
    def generic(cls, beta: float) -> "WallachParameter":
        return cls(float(beta), None)

    def resolve(self, l: int) -> tuple[str, float]:
        """Branch for rank l: ("omega", m) or ("generic", beta)."""
        if self.half_numerator is not None:
            if self.half_numerator >= l:
                return "generic", self.half_numerator / 2
            return "omega", float(self.half_numerator)
        if self.value <= (l - 1) / 2:
            raise DomainError(
                f"generic parameter must exceed (l-1)/2 = {(l - 1) / 2}, got {self.value}"
            )
        return "generic", self.value


@dataclass(frozen=True)
class IntegralSpec:
    """Everything needed to evaluate one fractional integral at a point."""

    side: str
    alpha: float
    s: SpdMatrix
    n_samples: int
    rng: RngState
    beta: WallachParameter | None = None

    def __post_init__(self):
        if self.side not in SIDES:
            raise DomainError(f"side must be one of {SIDES}, got {self.side!r}")
        _require_alpha(self.alpha, self.s.dim)
        _require_interior(self.s)


def _require_alpha(alpha: float, l: int):
    d = cone_half_dim(l)
    if alpha <= d - 1:
        raise DomainError(f"need alpha > {d - 1} at rank {l}, got {alpha}")


def _require_interior(s: SpdMatrix):
    if not is_pd(np.eye(s.dim) - s.full()):
        raise PointOutsideQ("evaluation point must satisfy s < I strictly")


def _gram(w: np.ndarray) -> np.ndarray:
    return np.swapaxes(w, -1, -2) @ w


# ---------------------------------------------------------------------------
# Plain one-parameter integrals


def gg_integral(spec: IntegralSpec, f: TestFunction) -> MonteCarloEstimate:
    """Left/right fractional integral of f with kernel det(.)^(alpha - d)
    over the matrix interval (0, s) resp. (s, I).

    Rank 1 is evaluated by quadrature (stderr 0); higher ranks by
    rejection-box Monte Carlo.
    """
    l = spec.s.dim
    alpha = spec.alpha
    if l == 1:
        s0 = float(spec.s.full()[0, 0])
        return exact_estimate(
            quadrature.gg_quad(spec.side, alpha, f, s0), spec.rng, quadrature.DEFAULT_NODES
        )
    d = cone_half_dim(l)
    sfull = spec.s.full()
    eye = np.eye(l)
    if spec.side == "left":
        base_half = spec.s.sqrt()
        shift = None
        interval_det = float(np.linalg.det(sfull))
    else:
        comp = SpdMatrix.from_full(eye - sfull)
        base_half = comp.sqrt()
        shift = sfull
        interval_det = comp.det()
    const = (
        unit_box_volume(l)
        * interval_det**alpha
        * math.exp(-siegel_log_gamma(l, alpha))
    )

    def chunk(gen, size):
        w = unit_interval_candidates(l, size, gen)
        mask = inside_unit_interval(w)
        vals = np.zeros(size)
        wm = w[mask]
        if wm.shape[0]:
            r = base_half @ wm @ base_half
            if spec.side == "left":
                kern = det_stack(eye - wm) ** (alpha - d)
            else:
                r = shift + r
                kern = det_stack(wm) ** (alpha - d)
            vals[mask] = f.fn(r) * kern
        return const * vals

    return run_mc(chunk, spec.n_samples, spec.rng)


def gg_halfint(
    side: str,
    m: int,
    f: TestFunction,
    s: SpdMatrix,
    n_samples: int,
    rng: RngState,
) -> MonteCarloEstimate:
    """Half-integer-order integral in its Gaussian-matrix form:

    left:  pi^(-lm/2) * int_{w'w < s}     f(s - w'w) dw
    right: pi^(-lm/2) * int_{w'w < I - s} f(s + w'w) dw

    with w running over m x l matrices, sampled uniformly on the smallest
    axis-aligned box containing the constraint set.
    """
    m = int(m)
    if m < 1:
        raise DomainError("m must be a positive integer")
    if side not in SIDES:
        raise DomainError(f"side must be one of {SIDES}")
    _require_interior(s)
    l = s.dim
    sfull = s.full()
    bound_mat = sfull if side == "left" else np.eye(l) - sfull
    half_width = math.sqrt(float(np.linalg.eigvalsh(bound_mat)[-1]))
    const = (2.0 * half_width) ** (m * l) * math.pi ** (-l * m / 2)

    def chunk(gen, size):
        w = gen.uniform(-half_width, half_width, size=(size, m, l))
        gram = _gram(w)
        mask = is_pd_stack(bound_mat - gram)
        vals = np.zeros(size)
        if np.any(mask):
            arg = sfull - gram[mask] if side == "left" else sfull + gram[mask]
            vals[mask] = f.fn(arg)
        return const * vals

    return run_mc(chunk, n_samples, rng)


# ---------------------------------------------------------------------------
# Two-parameter integrals


def ek_integral(
    side: str,
    alpha: float,
    beta: WallachParameter,
    f: TestFunction,
    s: SpdMatrix,
    n_samples: int,
    rng: RngState,
    force_branch: str | None = None,
) -> MonteCarloEstimate:
    """Two-parameter determinant-weighted fractional integral.

    Generic branch (beta > (l-1)/2):

        det(s)^(d-a-b)/(G_l(a) G_l(b)) * int f(r) det(r)^(b-d) K dr

    over (0, s) (left, K = det(s-r)^(a-d)) or (s, I) (right,
    K = det(r-s)^(a-d)).  Half-integer branch (beta = m/2, m < l):

        det(s)^(d-a-m/2) pi^(-lm/2)/G_l(a)
            * int_{w'w < s} det(s - w'w)^(a-d) f(w'w) dw

    (left; the right side integrates over {w'w < I-s} with
    det(s + w'w)^(a-d)).  ``force_branch`` ("generic" | "omega") overrides
    the resolution where both branches are defined, which is how branch
    agreement is tested.
    """
    if side not in SIDES:
        raise DomainError(f"side must be one of {SIDES}")
    l = s.dim
    _require_alpha(alpha, l)
    _require_interior(s)
    branch, val = beta.resolve(l)
    if force_branch is not None:
        if force_branch == "omega":
            if beta.half_numerator is None:
                raise DomainError("omega branch needs a half-integer parameter")
            branch, val = "omega", float(beta.half_numerator)
        elif force_branch == "generic":
            branch, val = "generic", beta.value
        else:
            raise DomainError(f"unknown branch {force_branch!r}")
    if branch == "generic":
        return _ek_generic(side, alpha, val, f, s, n_samples, rng)
    return _ek_omega(side, alpha, int(val), f, s, n_samples, rng)


def _ek_generic(side, alpha, beta, f, s, n_samples, rng) -> MonteCarloEstimate:
    l = s.dim
    d = cone_half_dim(l)
    if beta <= d - 1:
        raise DomainError(f"generic branch needs beta > {d - 1}, got {beta}")
    if l == 1:
        s0 = float(s.full()[0, 0])
        return exact_estimate(
            quadrature.ek_quad(side, alpha, beta, f, s0), rng, quadrature.DEFAULT_NODES
        )
    sfull = s.full()
    eye = np.eye(l)
    det_s = float(np.linalg.det(sfull))
    log_gammas = siegel_log_gamma(l, alpha) + siegel_log_gamma(l, beta)
    if side == "left":
        # powers of det(s) cancel exactly under r = s^(1/2) w s^(1/2)
        base_half = s.sqrt()
        const = unit_box_volume(l) * math.exp(-log_gammas)

        def chunk(gen, size):
            w = unit_interval_candidates(l, size, gen)
            mask = inside_unit_interval(w)
            vals = np.zeros(size)
            wm = w[mask]
            if wm.shape[0]:
                r = base_half @ wm @ base_half
                weight = det_stack(wm) ** (beta - d) * det_stack(eye - wm) ** (alpha - d)
                vals[mask] = f.fn(r) * weight
            return const * vals

    else:
        comp = SpdMatrix.from_full(eye - sfull)
        base_half = comp.sqrt()
        const = (
            unit_box_volume(l)
            * det_s ** (d - alpha - beta)
            * comp.det() ** alpha
            * math.exp(-log_gammas)
        )

        def chunk(gen, size):
            w = unit_interval_candidates(l, size, gen)
            mask = inside_unit_interval(w)
            vals = np.zeros(size)
            wm = w[mask]
            if wm.shape[0]:
                r = sfull + base_half @ wm @ base_half
                weight = det_stack(r) ** (beta - d) * det_stack(wm) ** (alpha - d)
                vals[mask] = f.fn(r) * weight
            return const * vals

    return run_mc(chunk, n_samples, rng)


def _ek_omega(side, alpha, m, f, s, n_samples, rng) -> MonteCarloEstimate:
    l = s.dim
    d = cone_half_dim(l)
    sfull = s.full()
    bound_mat = sfull if side == "left" else np.eye(l) - sfull
    half_width = math.sqrt(float(np.linalg.eigvalsh(bound_mat)[-1]))
    det_s = float(np.linalg.det(sfull))
    const = (
        det_s ** (d - alpha - m / 2)
        * math.pi ** (-l * m / 2)
        * math.exp(-siegel_log_gamma(l, alpha))
        * (2.0 * half_width) ** (m * l)
    )

    def chunk(gen, size):
        w = gen.uniform(-half_width, half_width, size=(size, m, l))
        gram = _gram(w)
        mask = is_pd_stack(bound_mat - gram)
        vals = np.zeros(size)
        if np.any(mask):
            gm = gram[mask]
            arg = sfull - gm if side == "left" else sfull + gm
            vals[mask] = det_stack(arg) ** (alpha - d) * f.fn(gm)
        return const * vals

    return run_mc(chunk, n_samples, rng)


def ek_stiefel_form(
    alpha: float,
    m: int,
    f: TestFunction,
    s: SpdMatrix,
    n_samples: int,
    rng: RngState,
) -> MonteCarloEstimate:
    """Alternate form of the left half-integer integral for 1 <= m < l:

        c int_0^{I_m} det(q)^((l-m-1)/2) det(I_m - q)^(a-d) dq
          int f(s^(1/2) u q u' s^(1/2)) du,

    with u Haar on the orthonormal m-frames of R^l and
    c = 2^(-m) pi^(-lm/2) sigma_{l,m} / Gamma_l(a) (the frame average is
    normalized, so the unnormalized frame measure contributes its total
    volume sigma_{l,m}).
    """
    l = s.dim
    m = int(m)
    if not 1 <= m < l:
        raise DomainError(f"need 1 <= m < l, got m={m}, l={l}")
    _require_alpha(alpha, l)
    _require_interior(s)
    d = cone_half_dim(l)
    shalf = s.sqrt()
    eye_m = np.eye(m)
    const = (
        2.0**-m
        * math.pi ** (-l * m / 2)
        * stiefel_volume(l, m)
        * math.exp(-siegel_log_gamma(l, alpha))
        * unit_box_volume(m)
    )

    def chunk(gen, size):
        q = unit_interval_candidates(m, size, gen)
        mask = inside_unit_interval(q)
        u = sample_stiefel_batch(l, m, size, gen)
        vals = np.zeros(size)
        if np.any(mask):
            qm = q[mask]
            um = u[mask]
            mid = um @ qm @ np.swapaxes(um, -1, -2)
            r = shalf @ mid @ shalf
            weight = det_stack(qm) ** ((l - m - 1) / 2) * det_stack(eye_m - qm) ** (
                alpha - d
            )
            vals[mask] = weight * f.fn(r)
        return const * vals

    return run_mc(chunk, n_samples, rng)


# ---------------------------------------------------------------------------
# Determinant differential operators


def _coord_index(l: int):
    idx = {}
    for i in range(l):
        for j in range(i, l):
            idx[(i, j)] = len(idx)
    return idx


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def cayley_stencil(l: int, h: float) -> list[tuple[np.ndarray, float]]:
    """Central-difference stencil of the operator det(eta_ij d/dr_ij),
    eta = 1 on the diagonal and 1/2 off it, expanded over all l!
    permutation terms.  Returns (symmetric offset, weight) pairs."""
    idx = _coord_index(l)
    ncoord = len(idx)
    acc: dict[tuple, float] = {}
    for perm in itertools.permutations(range(l)):
        coeff = float(_perm_sign(perm))
        for i in range(l):
            if perm[i] != i:
                coeff *= 0.5
        points = {(0,) * ncoord: coeff}
        for i in range(l):
            c = idx[(min(i, perm[i]), max(i, perm[i]))]
            nxt: dict[tuple, float] = {}
            for vec, wgt in points.items():
                for step in (+1, -1):
                    v2 = list(vec)
                    v2[c] += step
                    key = tuple(v2)
                    nxt[key] = nxt.get(key, 0.0) + step * wgt / (2.0 * h)
            points = nxt
        for vec, wgt in points.items():
            acc[vec] = acc.get(vec, 0.0) + wgt
    basis = np.zeros((ncoord, l, l))
    for (i, j), c in idx.items():
        basis[c, i, j] = 1.0
        basis[c, j, i] = 1.0
    out = []
    for vec, wgt in sorted(acc.items()):
        if wgt == 0.0:
            continue
        offset = h * np.tensordot(np.array(vec, dtype=float), basis, axes=1)
        out.append((offset, wgt))
    return out


def cayley_apply(side: str, f: TestFunction, r, h: float | None = None) -> float:
    """Finite-difference value of the determinant differential operator.

    ``side`` "plus" applies det(eta_ij d/dr_ij); "minus" multiplies by
    (-1)^l.  The default step 1e-3 (1 + max|r|) balances truncation
    against cancellation for targets around 1e-3 relative.

    Raises
    ------
    StepTooSmall
        If h < 1e-5, where cancellation dominates.
    """
    if side not in ("plus", "minus"):
        raise DomainError("side must be 'plus' or 'minus'")
    r = as_full(r)
    l = r.shape[0]
    if h is None:
        h = 1e-3 * (1.0 + max_norm(r))
    if h < 1e-5:
        raise StepTooSmall(f"step {h} is below the cancellation guard 1e-5")
    total = 0.0
    for offset, weight in cayley_stencil(l, h):
        total += weight * float(f.fn((r + offset)[None])[0])
    if side == "minus" and l % 2 == 1:
        total = -total
    return total


def cayley_image(side: str, f: TestFunction, dim: int, h: float) -> TestFunction:
    """The operator applied pointwise, packaged as a stacked evaluator
    (used to feed derivative images back into the integrals)."""
    if h < 1e-5:
        raise StepTooSmall(f"step {h} is below the cancellation guard 1e-5")
    stencil = cayley_stencil(dim, h)
    flip = -1.0 if (side == "minus" and dim % 2 == 1) else 1.0

    def fn(rs):
        out = np.zeros(rs.shape[:-2])
        for offset, weight in stencil:
            out += weight * f.fn(rs + offset)
        return flip * out

    return TestFunction(dim, fn, f.support, smooth=f.smooth, name=f"D{side}[{f.name}]")


# ---------------------------------------------------------------------------
# Determinant-power distributions and the Laplace transform


def gg_distribution(
    alpha, f: TestFunction, n_samples: int, rng: RngState
) -> MonteCarloEstimate:
    """The distribution (1/Gamma_l(a)) int f(r) det(r)^(a-d) dr over the
    full cone, for a in the admissible set.

    a = 0 returns f(0) exactly.  Half-integers m/2 below the convergence
    threshold use the Gaussian-matrix form pi^(-lm/2) int f(w'w) dw with a
    standard-normal importance proposal.  Real a > d-1 uses the gamma-type
    proposal r = w'w/2 with row count p >= 2a - l + 1, so the proposal
    density dominates the determinant power.
    """
    l = f.dim
    d = cone_half_dim(l)
    m = None
    if isinstance(alpha, WallachParameter):
        if alpha.half_numerator is not None and alpha.value <= d - 1:
            m = alpha.half_numerator
        alpha = alpha.value
    alpha = float(alpha)
    if alpha == 0.0:
        return exact_estimate(f(np.zeros((l, l))), rng, 1)
    if m is None and alpha <= d - 1:
        twice = 2.0 * alpha
        if abs(twice - round(twice)) < 1e-12 and round(twice) >= 1:
            m = int(round(twice))
        else:
            raise DomainError(
                f"alpha={alpha} is neither > {d - 1} nor an admissible half-integer"
            )
    if m is not None:
        const = 2.0 ** (m * l / 2)

        def chunk(gen, size):
            w = gen.standard_normal((size, m, l))
            gram = _gram(w)
            tr = np.trace(gram, axis1=-2, axis2=-1)
            return const * f.fn(gram) * np.exp(0.5 * tr)

        return run_mc(chunk, n_samples, rng)

    p = max(l, math.ceil(2.0 * alpha - l + 1))
    const = math.exp(siegel_log_gamma(l, p / 2) - siegel_log_gamma(l, alpha))

    def chunk(gen, size):
        r = sample_cone_gamma_batch(l, p, size, gen)
        tr = np.trace(r, axis1=-2, axis2=-1)
        return const * f.fn(r) * det_stack(r) ** (alpha - p / 2) * np.exp(tr)

    return run_mc(chunk, n_samples, rng)


def laplace(
    f: TestFunction, z: SpdMatrix, n_samples: int, rng: RngState
) -> MonteCarloEstimate:
    """Laplace transform int_cone exp(-tr(z r)) f(r) dr at real z > 0.

    Rank 1 is quadrature.  Functions supported inside the unit interval
    use uniform box Monte Carlo there; cone-supported functions use the
    gamma-type proposal congruence-scaled by z^(-1/2), with the proposal
    row count driven by the declared determinant growth of f.
    """
    l = z.dim
    if f.dim != l:
        raise DomainError("test function and transform argument disagree on rank")
    d = cone_half_dim(l)
    if l == 1:
        z0 = float(z.full()[0, 0])
        return exact_estimate(quadrature.laplace_quad(f, z0), rng, quadrature.DEFAULT_NODES)
    zfull = z.full()
    if f.support != SUPPORT_CONE:
        const = unit_box_volume(l)

        def chunk(gen, size):
            w = unit_interval_candidates(l, size, gen)
            mask = inside_unit_interval(w)
            vals = np.zeros(size)
            wm = w[mask]
            if wm.shape[0]:
                tr = np.einsum("ij,sji->s", zfull, wm)
                vals[mask] = np.exp(-tr) * f.fn(wm)
            return const * vals

        return run_mc(chunk, n_samples, rng)

    alpha_hint = d + (f.det_growth or 0.0)
    p = max(l, math.ceil(2.0 * alpha_hint - l + 1))
    z_inv_half = z.inv_sqrt()
    log_det_z = float(np.linalg.slogdet(zfull)[1])
    const = math.exp(siegel_log_gamma(l, p / 2) - 0.5 * p * log_det_z)

    def chunk(gen, size):
        w = sample_cone_gamma_batch(l, p, size, gen)
        r = z_inv_half @ w @ z_inv_half
        return const * f.fn(r) * det_stack(r) ** (d - p / 2)

    return run_mc(chunk, n_samples, rng)
