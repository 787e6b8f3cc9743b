"""Built-in named test functions.

The verification suite only ever integrates functions from this registry,
so every run is reproducible from a name and a dimension: ``const1``,
``exp-tr``, ``trace``, ``det-p`` (determinant power), and ``bump``, a
smooth compactly supported radial bump in eigenvalues used wherever an
identity needs an infinitely differentiable function supported strictly
inside the unit interval.
"""

from __future__ import annotations

import numpy as np

from .core import (
    SUPPORT_COMPACT,
    SUPPORT_CONE,
    TestFunction,
    det_stack,
    eigvalsh_stack,
)


def const_one(dim: int) -> TestFunction:
    return TestFunction(
        dim, lambda r: np.ones(r.shape[:-2]), SUPPORT_CONE, name="const1", det_growth=0.0
    )


def exp_neg_trace(dim: int) -> TestFunction:
    def fn(r):
        return np.exp(-np.trace(r, axis1=-2, axis2=-1))

    return TestFunction(dim, fn, SUPPORT_CONE, name="exp-tr", det_growth=0.0)


def trace_fn(dim: int) -> TestFunction:
    def fn(r):
        return np.trace(r, axis1=-2, axis2=-1)

    return TestFunction(dim, fn, SUPPORT_CONE, name="trace", det_growth=0.0)


def det_power(dim: int, power: float) -> TestFunction:
    """det(r)^power; for negative powers only defined on the open cone."""

    def fn(r):
        return det_stack(r) ** power

    return TestFunction(dim, fn, SUPPORT_CONE, name="det-p", det_growth=float(power))


class _BumpProfile:
    """exp(-tau u^2/(1-u^2)) on the eigenvalue band (lo, hi), 0 outside.

    All derivatives vanish at the band edges, so products of this profile
    over eigenvalues are C-infinity on symmetric matrices with support
    strictly inside the band.
    """

    def __init__(self, lo: float, hi: float, tau: float):
        if not 0.0 < lo < hi < 1.0:
            raise ValueError("need 0 < lo < hi < 1")
        self.lo, self.hi, self.tau = float(lo), float(hi), float(tau)
        self.slope = 2.0 / (hi - lo)

    def _u(self, lam):
        return (2.0 * lam - (self.hi + self.lo)) / (self.hi - self.lo)

    def value(self, lam):
        u = self._u(np.asarray(lam, dtype=float))
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        ui = u[inside]
        out[inside] = np.exp(-self.tau * ui**2 / (1.0 - ui**2))
        return out

    def deriv(self, lam):
        u = self._u(np.asarray(lam, dtype=float))
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        ui = u[inside]
        psi = np.exp(-self.tau * ui**2 / (1.0 - ui**2))
        dphi = -self.tau * 2.0 * ui / (1.0 - ui**2) ** 2 * self.slope
        out[inside] = dphi * psi
        return out

    def deriv2(self, lam):
        u = self._u(np.asarray(lam, dtype=float))
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        ui = u[inside]
        psi = np.exp(-self.tau * ui**2 / (1.0 - ui**2))
        dphi = -self.tau * 2.0 * ui / (1.0 - ui**2) ** 2 * self.slope
        d2phi = -self.tau * 2.0 * (1.0 + 3.0 * ui**2) / (1.0 - ui**2) ** 3 * self.slope**2
        out[inside] = (d2phi + dphi**2) * psi
        return out


def eigen_bump(
    dim: int, lo: float = 0.15, hi: float = 0.85, tau: float = 1.0
) -> TestFunction:
    """Product of a smooth compactly supported profile over eigenvalues.

    Supported on {lo <= eigenvalues <= hi}, a compact subset strictly
    inside the unit interval.  For dim <= 2 the closed-form image under
    the raised determinant-derivative operator is attached, providing an
    exact derivative for identity checks.
    """
    prof = _BumpProfile(lo, hi, tau)

    def fn(r):
        lam = eigvalsh_stack(r)
        return np.prod(prof.value(lam), axis=-1)

    cayley = None
    if dim == 1:

        def cayley(r):
            return prof.deriv(r[..., 0, 0])

    elif dim == 2:
        # For a spectral function F(r) = g(l1) g(l2) on 2x2 matrices the
        # operator det(eta_ij d/dr_ij) evaluates to
        #   g'(l1) g'(l2) - [g'(l1) g(l2) - g(l1) g'(l2)] / (2 (l1 - l2)),
        # with the divided difference replaced by its limit
        # (g'' g - g'^2)/2 near coincident eigenvalues.
        def cayley(r):
            lam = eigvalsh_stack(r)
            l1, l2 = lam[..., 0], lam[..., 1]
            p1, p2 = prof.value(l1), prof.value(l2)
            d1, d2 = prof.deriv(l1), prof.deriv(l2)
            gap = l1 - l2
            mid = 0.5 * (l1 + l2)
            narrow = np.abs(gap) < 1e-7
            divided = np.where(
                narrow,
                prof.deriv2(mid) * prof.value(mid) - prof.deriv(mid) ** 2,
                (d1 * p2 - p1 * d2) / np.where(narrow, 1.0, gap),
            )
            return d1 * d2 - 0.5 * divided

    return TestFunction(
        dim,
        fn,
        SUPPORT_COMPACT,
        name="bump",
        det_growth=0.0,
        cayley_plus=cayley,
    )


NAMED = ("const1", "exp-tr", "trace", "det-p", "bump")


def named_test_function(name: str, dim: int, power: float = 1.0) -> TestFunction:
    """Look up a built-in test function by CLI name."""
    if name == "const1":
        return const_one(dim)
    if name == "exp-tr":
        return exp_neg_trace(dim)
    if name == "trace":
        return trace_fn(dim)
    if name == "det-p":
        return det_power(dim, power)
    if name == "bump":
        return eigen_bump(dim)
    raise ValueError(f"unknown test function {name!r}; choose from {NAMED}")
