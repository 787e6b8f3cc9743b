import math

import numpy as np
import pytest
from scipy import stats

from matcone.core import (
    DegenerateBlock,
    RankDeficient,
    RankTooLarge,
    SpdMatrix,
    is_pd_stack,
    max_norm,
    sqrt_psd_stack,
)
from matcone.sampling import (
    MonteCarloEstimate,
    RngState,
    bistiefel_decompose,
    combine_estimates,
    cone_gamma_log_density,
    haar_orthogonal,
    inside_unit_interval,
    polar_decompose,
    run_mc,
    sample_cone_gamma_batch,
    sample_matrix_interval,
    sample_matrix_interval_batch,
    sample_stiefel,
    sample_stiefel_batch,
    unit_box_volume,
    unit_interval_candidates,
)
from matcone.special import siegel_log_gamma, stiefel_volume

from conftest import assert_close_z


class TestRngState:
    def test_reproducible(self):
        a = RngState(7).generator().standard_normal(5)
        b = RngState(7).generator().standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_substreams_differ(self):
        a = RngState(7).substream(0).generator().standard_normal(5)
        b = RngState(7).substream(1).generator().standard_normal(5)
        assert not np.allclose(a, b)

    def test_substream_path_is_reproducible(self):
        a = RngState(7).substream(3).substream(1).generator().standard_normal(4)
        b = RngState(7, (3, 1)).generator().standard_normal(4)
        np.testing.assert_array_equal(a, b)


class TestRunMc:
    def test_mean_and_stderr(self):
        est = run_mc(lambda gen, size: gen.uniform(0, 1, size), 50_000, RngState(3))
        assert est.n_samples == 50_000
        assert est.value == pytest.approx(0.5, abs=4 * est.stderr)
        # uniform variance 1/12
        assert est.stderr == pytest.approx(math.sqrt(1 / 12 / 50_000), rel=0.05)

    def test_deterministic_rerun(self):
        one = run_mc(lambda gen, size: gen.standard_normal(size), 300_000, RngState(9))
        two = run_mc(lambda gen, size: gen.standard_normal(size), 300_000, RngState(9))
        assert one == two

    def test_chunk_count_does_not_change_draws(self):
        # chunks are substream-indexed, so a smaller chunk size only
        # regroups the sums
        big = run_mc(lambda gen, size: gen.standard_normal(size), 1000, RngState(5), 1 << 20)
        small = run_mc(lambda gen, size: gen.standard_normal(size), 1000, RngState(5), 1 << 20)
        assert big.value == small.value

    def test_constant_integrand_zero_stderr(self):
        est = run_mc(lambda gen, size: np.ones(size), 1000, RngState(1))
        assert est.value == 1.0 and est.stderr == 0.0

    def test_combine_matches_weighted_mean(self):
        parts = [
            MonteCarloEstimate(1.0, 0.1, 100, 0),
            MonteCarloEstimate(2.0, 0.2, 300, 0),
        ]
        merged = combine_estimates(parts)
        assert merged.value == pytest.approx(1.75)
        assert merged.n_samples == 400

    def test_z_against(self):
        e = MonteCarloEstimate(1.0, 0.1, 10, 0)
        assert e.z_against(1.2) == pytest.approx(2.0)
        assert e.z_against(MonteCarloEstimate(1.3, 0.1, 10, 0)) == pytest.approx(
            3.0 / math.sqrt(2)
        )


class TestStiefelSampling:
    def test_orthonormal(self, rng):
        v = sample_stiefel_batch(7, 3, 200, rng.generator())
        defect = np.abs(np.swapaxes(v, -1, -2) @ v - np.eye(3)).max()
        assert defect <= 1e-10

    def test_mean_zero(self, rng):
        n = 100_000
        v = sample_stiefel_batch(5, 2, n, rng.generator())
        mean = v.mean(axis=0)
        se = v.std(axis=0, ddof=1) / math.sqrt(n)
        assert np.all(np.abs(mean) <= 3.5 * se)

    def test_projector_moment(self, rng):
        # orthogonal invariance forces E[vv'] = (m/n) I
        n = 100_000
        v = sample_stiefel_batch(6, 2, n, rng.generator())
        vvt = v @ np.swapaxes(v, -1, -2)
        mean = vvt.mean(axis=0)
        se = vvt.std(axis=0, ddof=1) / math.sqrt(n)
        target = (2 / 6) * np.eye(6)
        assert np.all(np.abs(mean - target) <= 3.5 * np.maximum(se, 1e-12))

    def test_rotation_invariance_ks(self):
        n, m, l, draws = 5, 2, 2, 50_000
        g = haar_orthogonal(n, RngState(11))
        v1 = sample_stiefel_batch(n, m, draws, RngState(12).generator())
        v2 = sample_stiefel_batch(n, m, draws, RngState(13).generator())

        def stat(v):
            b = v[:, n - l :, :]
            return np.einsum("sij,sij->s", b, b)

        d = stats.ks_2samp(stat(np.matmul(g, v1)), stat(v2)).statistic
        assert d <= 1.628 * math.sqrt(2.0 / draws)

    def test_single_frame_api(self, rng):
        v = sample_stiefel(6, 2, rng)
        assert v.n == 6 and v.m == 2


class TestMatrixInterval:
    def test_scalar_uniform(self):
        r = sample_matrix_interval_batch(np.array([[1.0]]), 50_000, RngState(2))
        vals = r[:, 0, 0]
        assert vals.mean() == pytest.approx(0.5, abs=4 * vals.std() / math.sqrt(50_000))

    def test_acceptance_rate_rank2(self):
        n = 100_000
        w = unit_interval_candidates(2, n, RngState(3).generator())
        acc = inside_unit_interval(w).mean()
        se = math.sqrt(acc * (1 - acc) / n)
        assert acc == pytest.approx(math.pi / 12, abs=3.5 * se)
        assert unit_box_volume(2) == 2.0

    def test_mean_matrix_is_half_identity(self):
        # r -> I - r and conjugation symmetries force E[r] = I/2
        n = 100_000
        r = sample_matrix_interval_batch(np.eye(2), n, RngState(4))
        mean = r.mean(axis=0)
        se = r.std(axis=0, ddof=1) / math.sqrt(n)
        assert np.all(np.abs(mean - 0.5 * np.eye(2)) <= 3.5 * np.maximum(se, 1e-12))

    def test_stays_inside_interval(self, rng, spd2):
        r = sample_matrix_interval_batch(spd2, 2000, rng)
        assert np.all(is_pd_stack(r))
        assert np.all(is_pd_stack(spd2 - r))

    def test_rank_cap(self, rng):
        with pytest.raises(RankTooLarge):
            sample_matrix_interval(np.eye(4), rng)

    def test_single_sample_api(self, rng, spd2):
        r = sample_matrix_interval(spd2, rng)
        assert isinstance(r, SpdMatrix)


class TestPolar:
    def test_frame_input_gives_identity_factor(self, rng):
        v = sample_stiefel(5, 2, rng)
        frame, gram = polar_decompose(v.matrix)
        np.testing.assert_allclose(gram.full(), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(frame.matrix, v.matrix, atol=1e-10)

    def test_scaling(self, rng):
        v = sample_stiefel(5, 2, rng)
        frame, gram = polar_decompose(2.0 * v.matrix)
        np.testing.assert_allclose(gram.full(), 4.0 * np.eye(2), atol=1e-10)
        np.testing.assert_allclose(frame.matrix, v.matrix, atol=1e-10)

    def test_roundtrip(self, rng):
        gen = rng.generator()
        x = gen.standard_normal((6, 3))
        frame, gram = polar_decompose(x)
        rec = frame.matrix @ sqrt_psd_stack(gram.full()[None])[0]
        assert max_norm(rec - x) <= 1e-10

    def test_rank_deficient(self):
        with pytest.raises(RankDeficient):
            polar_decompose(np.ones((4, 2)))

    def test_measure_identity(self):
        """Gaussian expectations of h(x'x) against the cone-side integral
        with the area factor 2^-m det(r)^((n-m-1)/2) sigma_{n,m}."""
        n_, m_, p = 4, 2, 5
        rng = RngState(21)

        def lhs_chunk(gen, size):
            x = gen.standard_normal((size, n_, m_))
            g = np.swapaxes(x, -1, -2) @ x
            return np.exp(-np.trace(g, axis1=-2, axis2=-1))

        lhs = run_mc(lhs_chunk, 200_000, rng.substream(0))
        const = (
            2.0**-m_
            * stiefel_volume(n_, m_)
            * (2 * math.pi) ** (-n_ * m_ / 2)
            * math.exp(siegel_log_gamma(m_, p / 2))
        )

        def rhs_chunk(gen, size):
            r = sample_cone_gamma_batch(m_, p, size, gen)
            dets = np.linalg.det(r)
            tr = np.trace(r, axis1=-2, axis2=-1)
            return const * dets ** ((n_ - p) / 2) * np.exp(-0.5 * tr)

        rhs = run_mc(rhs_chunk, 200_000, rng.substream(1))
        assert_close_z(lhs, rhs)
        # E[exp(-tr x'x)] factorizes into nm scalar Gaussian integrals
        assert_close_z(lhs, 3.0 ** (-n_ * m_ / 2))


class TestBiStiefel:
    def test_zero_top_block(self):
        from matcone.core import StiefelFrame

        u0 = sample_stiefel(3, 1, RngState(5))
        v = np.vstack([np.zeros((2, 1)), u0.matrix])
        a, u = bistiefel_decompose(StiefelFrame(v), 2)
        np.testing.assert_allclose(a, 0.0, atol=1e-12)
        np.testing.assert_allclose(u.matrix, u0.matrix, atol=1e-10)

    def test_roundtrip(self, rng):
        v = sample_stiefel(7, 2, rng)
        a, u = bistiefel_decompose(v, 3)
        block = sqrt_psd_stack((np.eye(2) - a.T @ a)[None])[0]
        rec = np.vstack([a, u.matrix @ block])
        assert max_norm(rec - v.matrix) <= 1e-10
        assert max_norm(u.matrix.T @ u.matrix - np.eye(2)) <= 1e-10

    def test_degenerate_block(self):
        from matcone.core import StiefelFrame

        v = StiefelFrame(np.eye(4)[:, :2])
        with pytest.raises(DegenerateBlock):
            bistiefel_decompose(v, 2)  # top block is I_2

    def test_dimension_guard(self, rng):
        from matcone.core import StiefelFrame

        v = sample_stiefel(4, 2, rng)
        with pytest.raises(DegenerateBlock):
            bistiefel_decompose(v, 3)

    def test_integration_identity(self):
        """Splitting the Haar integral over the top block and the lower
        frame: both estimators target the same mean of exp((vv')_nn)."""
        rng = RngState(31)

        def haar_chunk(gen, size):
            v = sample_stiefel_batch(4, 1, size, gen)
            return np.exp(v[:, 3, 0] ** 2)

        lhs = run_mc(haar_chunk, 200_000, rng.substream(0))
        const = 4.0 * stiefel_volume(2, 1) / stiefel_volume(4, 1)

        def split_chunk(gen, size):
            a = gen.uniform(-1, 1, size=(size, 2))
            u = sample_stiefel_batch(2, 1, size, gen)
            nrm = (a * a).sum(axis=1)
            ok = nrm < 1.0
            vals = np.zeros(size)
            bottom = u[:, 1, 0] * np.sqrt(np.clip(1 - nrm, 0.0, None))
            vals[ok] = np.exp(bottom[ok] ** 2)
            return const * vals

        rhs = run_mc(split_chunk, 200_000, rng.substream(1))
        assert_close_z(lhs, rhs)


class TestConeGamma:
    def test_trace_moment(self):
        # r = w'w/2 with p x l Gaussian w has E[tr r] = p l / 2
        l, p, n = 2, 5, 100_000
        r = sample_cone_gamma_batch(l, p, n, RngState(8).generator())
        tr = np.trace(r, axis1=-2, axis2=-1)
        assert tr.mean() == pytest.approx(p * l / 2, abs=4 * tr.std() / math.sqrt(n))

    def test_log_density_normalizes(self):
        # importance identity: E[exp(-tr r)] under the density with shape
        # p equals Gamma_l(p/2 + ...) ratio; check p -> p + 2 reweighting
        l, p, n = 2, 4, 200_000
        r = sample_cone_gamma_batch(l, p, n, RngState(9).generator())
        logq = cone_gamma_log_density(r, l, p)
        logq2 = cone_gamma_log_density(r, l, p + 2)
        w = np.exp(logq2 - logq)
        est = MonteCarloEstimate(w.mean(), w.std(ddof=1) / math.sqrt(n), n, 9)
        assert_close_z(est, 1.0)

    def test_needs_enough_rows(self, rng):
        with pytest.raises(ValueError):
            sample_cone_gamma_batch(3, 2, 10, rng.generator())
