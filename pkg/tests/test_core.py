import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matcone.core import (
    DimError,
    DimMismatch,
    NotPositiveDefinite,
    RankDeficient,
    SpdMatrix,
    StiefelFrame,
    SymmetricMatrix,
    TestFunction,
    cholesky_spd,
    det,
    det_stack,
    eigvalsh_stack,
    is_pd,
    is_pd_stack,
    is_psd,
    loewner_lt,
    max_norm,
    sqrt_spd,
)


class TestDet:
    def test_identity(self):
        assert det(np.eye(3)) == pytest.approx(1.0)

    def test_2x2_cofactor(self):
        assert det([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx(3.0)

    def test_diagonal_product(self):
        assert det(np.diag([2.0, 3.0, 4.0])) == pytest.approx(24.0)

    def test_det_stack_matches_numpy(self, rng):
        gen = rng.generator()
        for l in (1, 2, 3, 4):
            a = gen.standard_normal((20, l, l))
            a = 0.5 * (a + np.swapaxes(a, -1, -2))
            np.testing.assert_allclose(det_stack(a), np.linalg.det(a), rtol=1e-10)


class TestSqrtSpd:
    def test_diagonal(self):
        b = sqrt_spd(np.diag([4.0, 9.0]))
        np.testing.assert_allclose(b.full(), np.diag([2.0, 3.0]), atol=1e-12)

    def test_identity(self):
        np.testing.assert_allclose(sqrt_spd(np.eye(3)).full(), np.eye(3), atol=1e-13)

    def test_roundtrip(self, spd2):
        a = np.array([[2.0, 1.0], [1.0, 2.0]])
        b = sqrt_spd(a).full()
        assert max_norm(b @ b - a) <= 1e-12

    def test_random_roundtrip(self, rng):
        gen = rng.generator()
        for _ in range(20):
            l = int(gen.integers(1, 7))
            w = gen.standard_normal((l + 2, l))
            a = w.T @ w
            b = sqrt_spd(a).full()
            assert max_norm(b @ b - a) <= 1e-10 * max(1.0, max_norm(a))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            sqrt_spd(np.diag([1.0, -0.5]))


class TestLoewner:
    def test_zero_below_identity(self):
        assert loewner_lt(np.zeros((2, 2)), np.eye(2))

    def test_strict(self):
        assert not loewner_lt(np.eye(2), np.eye(2))

    def test_interior_point(self):
        # eigenvalues 0.1 and 0.9, both in (0, 1)
        a = np.array([[0.5, 0.4], [0.4, 0.5]])
        assert loewner_lt(np.zeros((2, 2)), a)
        assert loewner_lt(a, np.eye(2))

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            loewner_lt(np.eye(2), np.eye(3))

    def test_partial_order_on_chains(self, rng):
        gen = rng.generator()
        for _ in range(200):
            l = int(gen.integers(1, 4))
            w = [gen.standard_normal((l + 1, l)) for _ in range(3)]
            a = w[0].T @ w[0]
            b = a + w[1].T @ w[1]
            c = b + w[2].T @ w[2]
            assert not loewner_lt(a, a)
            assert loewner_lt(a, b) and loewner_lt(b, c) and loewner_lt(a, c)
            assert not loewner_lt(b, a)

    @given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(0.01, 2.0))
    def test_scalar_order_is_numeric_order(self, a, b, gap):
        assert loewner_lt([[a]], [[a + gap]])
        assert not loewner_lt([[b + gap]], [[b]])


class TestTypes:
    def test_symmetric_storage_roundtrip(self):
        a = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]])
        s = SymmetricMatrix.from_full(a)
        assert s.dim == 3
        assert s.upper.shape == (6,)
        np.testing.assert_allclose(s.full(), a)

    def test_symmetric_rejects_bad_sizes(self):
        with pytest.raises(DimError):
            SymmetricMatrix(0, np.array([]))
        with pytest.raises(DimError):
            SymmetricMatrix(2, np.array([1.0, 2.0]))

    def test_symmetric_is_immutable(self):
        s = SymmetricMatrix.from_full(np.eye(2))
        with pytest.raises(ValueError):
            s.upper[0] = 5.0

    def test_spd_certifies(self):
        SpdMatrix.from_full(np.eye(2))
        with pytest.raises(NotPositiveDefinite):
            SpdMatrix.from_full(np.diag([1.0, 0.0]))

    def test_spd_sqrt_and_inv_sqrt(self, spd2):
        s = SpdMatrix.from_full(spd2)
        np.testing.assert_allclose(s.sqrt() @ s.sqrt(), spd2, atol=1e-12)
        np.testing.assert_allclose(
            s.inv_sqrt() @ spd2 @ s.inv_sqrt(), np.eye(2), atol=1e-12
        )

    def test_stiefel_accepts_orthonormal(self):
        v = StiefelFrame(np.eye(4)[:, :2])
        assert v.n == 4 and v.m == 2

    def test_stiefel_reorthonormalizes(self):
        nearly = np.eye(4)[:, :2] + 1e-6
        v = StiefelFrame(nearly)
        assert max_norm(v.matrix.T @ v.matrix - np.eye(2)) <= 1e-10

    def test_stiefel_rejects_rank_deficient(self):
        x = np.ones((4, 2))
        with pytest.raises(RankDeficient):
            StiefelFrame(x)

    def test_stiefel_rejects_bad_shape(self):
        with pytest.raises(DimError):
            StiefelFrame(np.ones((2, 3)))

    def test_testfunction_support_validation(self):
        with pytest.raises(ValueError):
            TestFunction(2, lambda r: r[..., 0, 0], support="everywhere")

    def test_testfunction_call(self):
        f = TestFunction(2, lambda r: np.trace(r, axis1=-2, axis2=-1))
        assert f(np.eye(2)) == pytest.approx(2.0)


class TestPdMachinery:
    def test_cholesky_pivot_tolerance(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky_spd(np.diag([1.0, 1e-14]))
        low = cholesky_spd(np.diag([1.0, 4.0]))
        np.testing.assert_allclose(low, np.diag([1.0, 2.0]))

    def test_is_pd_matches_eigenvalues(self, rng):
        gen = rng.generator()
        for _ in range(100):
            l = int(gen.integers(1, 5))
            a = gen.standard_normal((l, l))
            a = 0.5 * (a + a.T)
            assert is_pd(a) == bool(np.linalg.eigvalsh(a)[0] > 1e-12 * max_norm(a))

    def test_is_pd_stack_matches_scalar(self, rng):
        gen = rng.generator()
        for l in (1, 2, 3):
            a = gen.standard_normal((50, l, l))
            a = 0.5 * (a + np.swapaxes(a, -1, -2))
            mask = is_pd_stack(a)
            for i in range(50):
                assert mask[i] == is_pd(a[i])

    def test_psd_admits_rank_deficient_gram(self, rng):
        # boundary points w'w with fewer rows than columns must pass
        gen = rng.generator()
        w = gen.standard_normal((1, 3))
        assert is_psd(w.T @ w)
        assert not is_psd(-np.eye(2))

    def test_eigvalsh_stack_closed_form(self, rng):
        gen = rng.generator()
        a = gen.standard_normal((30, 2, 2))
        a = 0.5 * (a + np.swapaxes(a, -1, -2))
        np.testing.assert_allclose(
            eigvalsh_stack(a), np.linalg.eigvalsh(a), atol=1e-12
        )
