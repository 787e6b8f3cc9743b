"""Deterministic quadrature backends.

Rank-1 cone integrals are one-dimensional, so the determinant-kernel
weight (s - r)^(alpha - 1) is an endpoint power singularity; substituting
(distance to the singular endpoint) = c * t^(1/alpha) absorbs it exactly
and leaves a smooth Gauss-Legendre integrand.  Two-sided kernels split at
the midpoint and absorb each endpoint separately.

``interval_box_quad`` integrates over a rank-1 or rank-2 matrix interval
(0, s) by a tensor Gauss-Legendre rule over the enclosing entry box.  It
is only accurate for integrands that vanish smoothly before the interval
boundary (compactly supported test functions); the suite uses it where
identities must be certified to deterministic tolerances.
"""

from __future__ import annotations

from functools import lru_cache
from math import gamma as _gamma

import numpy as np

from .core import DimError, as_full, det_stack, is_pd_stack

DEFAULT_NODES = 128


@lru_cache(maxsize=32)
def _gl01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def gl_nodes(n: int = DEFAULT_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    t, w = _gl01(int(n))
    return t.copy(), w.copy()


def _eval1(f, r: np.ndarray) -> np.ndarray:
    """Evaluate a matrix test function on scalar grid points."""
    return np.asarray(f.fn(r[:, None, None]), dtype=float)


def gg_quad(side: str, alpha: float, f, s: float, nodes: int = DEFAULT_NODES) -> float:
    """Rank-1 fractional integral with determinant kernel.

    Left:  (1/Gamma(a)) * int_0^s f(r) (s-r)^(a-1) dr
    Right: (1/Gamma(a)) * int_s^1 f(r) (r-s)^(a-1) dr
    """
    t, w = _gl01(nodes)
    u = t ** (1.0 / alpha)  # absorbs the endpoint power exactly
    if side == "left":
        r = s * (1.0 - u)
        scale = s**alpha
    elif side == "right":
        r = s + (1.0 - s) * u
        scale = (1.0 - s) ** alpha
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return scale / _gamma(alpha + 1.0) * float(w @ _eval1(f, r))


def ek_quad(
    side: str, alpha: float, beta: float, f, s: float, nodes: int = DEFAULT_NODES
) -> float:
    """Rank-1 two-parameter integral, both endpoint powers absorbed.

    Left:  s^(1-a-b)/(Gamma(a)Gamma(b)) * int_0^s f(r) r^(b-1) (s-r)^(a-1) dr
    Right: s^(1-a-b)/(Gamma(a)Gamma(b)) * int_s^1 f(r) r^(b-1) (r-s)^(a-1) dr
    """
    t, w = _gl01(nodes)
    norm = s ** (1.0 - alpha - beta) / (_gamma(alpha) * _gamma(beta))
    if side == "left":
        half = 0.5 * s
        # [0, s/2]: absorb r^(b-1); integrand keeps the smooth (s-r) factor
        r_lo = half * t ** (1.0 / beta)
        int_lo = (half**beta / beta) * float(
            w @ (_eval1(f, r_lo) * (s - r_lo) ** (alpha - 1.0))
        )
        # [s/2, s]: absorb (s-r)^(a-1)
        r_hi = s - half * t ** (1.0 / alpha)
        int_hi = (half**alpha / alpha) * float(
            w @ (_eval1(f, r_hi) * r_hi ** (beta - 1.0))
        )
        return norm * (int_lo + int_hi)
    if side == "right":
        half = 0.5 * (1.0 - s)
        # [s, (1+s)/2]: absorb (r-s)^(a-1); r^(b-1) is smooth for r >= s > 0
        r_lo = s + half * t ** (1.0 / alpha)
        int_lo = (half**alpha / alpha) * float(
            w @ (_eval1(f, r_lo) * r_lo ** (beta - 1.0))
        )
        # [(1+s)/2, 1]: no singular endpoint
        r_hi = s + half + half * t
        int_hi = half * float(
            w @ (_eval1(f, r_hi) * r_hi ** (beta - 1.0) * (r_hi - s) ** (alpha - 1.0))
        )
        return norm * (int_lo + int_hi)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def laplace_quad(f, z: float, nodes: int = DEFAULT_NODES) -> float:
    """Rank-1 Laplace transform int_0^inf exp(-z r) f(r) dr.

    [0, 1] directly; [1, inf) through r = 1 - log(u)/z, which maps the
    exponential tail to a smooth integrand on (0, 1].
    """
    if z <= 0.0:
        raise ValueError("need z > 0")
    t, w = _gl01(nodes)
    head = float(w @ (np.exp(-z * t) * _eval1(f, t)))
    if f.support != "cone":
        return head  # supported inside (0, 1)
    r_tail = 1.0 - np.log(t) / z
    tail = np.exp(-z) / z * float(w @ _eval1(f, r_tail))
    return head + tail


def interval_box_quad(integrand, s, nodes: int = 64) -> float:
    """Tensor Gauss-Legendre integral of ``integrand`` over {0 < r < s}.

    ``integrand`` takes a stack (N, l, l) and must vanish (smoothly) in a
    neighborhood of the interval boundary; points outside the open
    interval are masked to zero, which is exact for such integrands.
    Supports rank 1 and 2.
    """
    s = as_full(s)
    l = s.shape[0]
    t, w = _gl01(nodes)
    if l == 1:
        r = (s[0, 0] * t)[:, None, None]
        vals = np.asarray(integrand(r), dtype=float)
        return s[0, 0] * float(w @ vals)
    if l != 2:
        raise DimError("box quadrature implemented for rank 1 and 2 only")
    # entry box containing (0, s): r11 in (0, s11), r22 in (0, s22),
    # |r12| < sqrt(s11 s22)
    c = float(np.sqrt(s[0, 0] * s[1, 1]))
    g11 = s[0, 0] * t
    g22 = s[1, 1] * t
    g12 = c * (2.0 * t - 1.0)
    w11 = s[0, 0] * w
    w22 = s[1, 1] * w
    w12 = 2.0 * c * w
    a, b, x = np.meshgrid(g11, g22, g12, indexing="ij")
    r = np.empty(a.shape + (2, 2))
    r[..., 0, 0] = a
    r[..., 1, 1] = b
    r[..., 0, 1] = x
    r[..., 1, 0] = x
    r = r.reshape(-1, 2, 2)
    inside = is_pd_stack(r) & is_pd_stack(s - r)
    vals = np.zeros(r.shape[0])
    if np.any(inside):
        vals[inside] = np.asarray(integrand(r[inside]), dtype=float)
    weight = (w11[:, None, None] * w22[None, :, None] * w12[None, None, :]).reshape(-1)
    return float(weight @ vals)


def det_kernel(side: str, s, power: float):
    """Stacked evaluator of det(s - r)^power (left) or det(r - s)^power
    (right), for composing box-quadrature integrands."""
    s = as_full(s)

    def kernel(r):
        diff = s - r if side == "left" else r - s
        return det_stack(diff) ** power

    return kernel
