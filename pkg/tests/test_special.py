import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matcone.core import DimError, DomainError, PoleError
from matcone.sampling import RngState, inside_unit_interval, unit_interval_candidates
from matcone.special import (
    siegel_beta,
    siegel_gamma,
    siegel_log_gamma,
    stiefel_volume,
)

from conftest import assert_close_z
from matcone.sampling import MonteCarloEstimate


class TestLogGamma:
    def test_rank1_at_one(self):
        assert siegel_log_gamma(1, 1.0) == pytest.approx(0.0, abs=1e-14)

    def test_rank2_three_halves(self):
        # pi^(1/2) Gamma(3/2) Gamma(1) = pi/2
        assert siegel_log_gamma(2, 1.5) == pytest.approx(math.log(math.pi / 2), rel=1e-13)

    def test_rank2_three(self):
        # pi^(1/2) Gamma(3) Gamma(5/2) = 3 pi/2
        assert siegel_log_gamma(2, 3.0) == pytest.approx(
            math.log(3 * math.pi / 2), rel=1e-13
        )

    def test_domain_error(self):
        with pytest.raises(DomainError):
            siegel_log_gamma(2, 0.5)
        with pytest.raises(DimError):
            siegel_log_gamma(0, 1.0)


class TestGamma:
    def test_rank2_at_one(self):
        # pi^(1/2) Gamma(1) Gamma(1/2) = pi
        assert siegel_gamma(2, 1.0) == pytest.approx(math.pi, rel=1e-13)

    def test_rank3_three_halves(self):
        # pi^(3/2) Gamma(3/2) Gamma(1) Gamma(1/2) = pi^(5/2)/2
        assert siegel_gamma(3, 1.5) == pytest.approx(math.pi**2.5 / 2, rel=1e-13)

    def test_rank1_half(self):
        assert siegel_gamma(1, 0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)

    def test_signed_value_below_poles(self):
        # Gamma(-1/2) = -2 sqrt(pi) carries through the product
        assert siegel_gamma(1, -0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-12)

    def test_pole_detection(self):
        with pytest.raises(PoleError):
            siegel_gamma(2, 0.5)  # alpha - 1/2 = 0
        with pytest.raises(PoleError):
            siegel_gamma(1, -2.0)


class TestBeta:
    def test_scalar_beta_one(self):
        assert siegel_beta(1, 1.0, 1.0) == pytest.approx(1.0, rel=1e-13)

    def test_rank2_half_dim(self):
        # (pi/2)^2 / (3 pi/2) = pi/6
        assert siegel_beta(2, 1.5, 1.5) == pytest.approx(math.pi / 6, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            siegel_beta(2, 0.4, 1.0)

    def test_matches_interval_volume_mc(self):
        # B_2(3/2, 3/2) is the Lebesgue volume of {0 < r < I_2}: estimate it
        # as (acceptance rate) x (box volume 2) and compare within 3 stderr.
        rng = RngState(2024)
        n = 400_000
        w = unit_interval_candidates(2, n, rng.generator())
        acc = inside_unit_interval(w).mean()
        est = MonteCarloEstimate(
            2.0 * acc, 2.0 * math.sqrt(acc * (1 - acc) / n), n, rng.seed
        )
        assert_close_z(est, siegel_beta(2, 1.5, 1.5))


class TestStiefelVolume:
    def test_circle(self):
        assert stiefel_volume(2, 1) == pytest.approx(2 * math.pi, rel=1e-12)

    def test_sphere(self):
        assert stiefel_volume(3, 1) == pytest.approx(4 * math.pi, rel=1e-12)

    def test_full_frames_rank2(self):
        # 4 pi^2 / Gamma_2(1) = 4 pi
        assert stiefel_volume(2, 2) == pytest.approx(4 * math.pi, rel=1e-12)

    def test_dims(self):
        with pytest.raises(DimError):
            stiefel_volume(2, 3)


@given(
    st.integers(2, 4),
    st.floats(0.06, 8.0),
    st.integers(1, 3),
)
def test_gamma_ratio_identity(l, offset, k_raw):
    """Reducing the rank by k shifts the argument: the two gamma ratios agree."""
    k = min(k_raw, l - 1)
    alpha = l / 2 + offset
    lhs = siegel_log_gamma(l, alpha) - siegel_log_gamma(l, alpha + k / 2)
    rhs = siegel_log_gamma(k, alpha + (k - l) / 2) - siegel_log_gamma(k, alpha + k / 2)
    assert abs(math.expm1(lhs - rhs)) <= 1e-10


@given(st.integers(1, 4), st.floats(0.06, 6.0))
def test_gamma_recursion(l, offset):
    alpha = (l - 1) / 2 + offset
    ratio = math.exp(siegel_log_gamma(l, alpha + 1) - siegel_log_gamma(l, alpha))
    prod = float(np.prod(alpha - np.arange(l) / 2))
    assert ratio == pytest.approx(prod, rel=1e-10)


@given(st.integers(1, 4), st.floats(0.06, 5.0), st.floats(0.06, 5.0))
def test_beta_symmetric(l, da, db):
    a = (l - 1) / 2 + da
    b = (l - 1) / 2 + db
    assert siegel_beta(l, a, b) == siegel_beta(l, b, a)
