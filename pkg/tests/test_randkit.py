# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
import numpy as np
import pytest

from acebench.errors import InvalidCovariance, NotPositiveDefinite
from acebench.randkit import (
    CovMatrix,
    cholesky,
    derive_seed,
    lkj_sample_corr,
    lognormal_sample,
    mvn_sample,
    split_rng,
)


class TestStreams:
    """(master_seed, stream_id) 쌍이 수열을 결정한다."""

    def test_same_pair_same_draws(self):
        a = split_rng(42, 3).standard_normal(10)
        b = split_rng(42, 3).standard_normal(10)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        a = split_rng(42, 3).standard_normal(10)
        b = split_rng(42, 4).standard_normal(10)
        c = split_rng(43, 3).standard_normal(10)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    @pytest.mark.parametrize("other", [1, 2, 7, 1000])
    def test_streams_are_uncorrelated(self, other):
        a = split_rng(42, 0).standard_normal(100_000)
        b = split_rng(42, other).standard_normal(100_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.02

    def test_neighbouring_seeds_are_uncorrelated(self):
        a = split_rng(42, 0).standard_normal(100_000)
        b = split_rng(43, 0).standard_normal(100_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.02

    def test_derive_seed(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        assert derive_seed(1, 2, 3) != derive_seed(1, 2, 4)
        assert 0 <= derive_seed(5) < 2 ** 64


class TestCovMatrix:
    def test_identity(self):
        c = CovMatrix.identity(4)
        assert c.dim == 4
        np.testing.assert_array_equal(c.entries, np.eye(4))

    def test_entries_read_only(self):
        c = CovMatrix(np.eye(2))
        with pytest.raises(ValueError):
            c.entries[0, 0] = 2.0

    @pytest.mark.parametrize("entries", [
        [[1.0, 0.5, 0.0], [0.5, 1.0, 0.0]],          # 정방 아님
        [[1.0, 0.5], [0.4, 1.0]],                     # 비대칭
        [[1.0, 2.0], [2.0, 1.0]],                     # 음의 고유값
        [[1.0, np.nan], [np.nan, 1.0]],
    ])
    def test_rejects_invalid(self, entries):
        with pytest.raises(InvalidCovariance):
            CovMatrix(np.array(entries))

    def test_correlation_needs_unit_diagonal(self):
        with pytest.raises(InvalidCovariance):
            CovMatrix(np.array([[2.0, 0.0], [0.0, 1.0]]), correlation=True)


class TestCholesky:
    def test_reconstructs(self):
        S = np.array([[4.0, 1.2, 0.4], [1.2, 2.0, 0.3], [0.4, 0.3, 1.0]])
        L = cholesky(S)
        np.testing.assert_allclose(L @ L.T, S, atol=1e-12)
        assert np.allclose(L, np.tril(L))

    def test_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_singular(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky(np.array([[1.0, 1.0], [1.0, 1.0]]))


class TestSamplers:
    def test_mvn_covariance(self):
        S = np.array([[1.0, 0.5, 0.2], [0.5, 1.0, -0.3], [0.2, -0.3, 1.0]])
        X = mvn_sample([0.0, 1.0, -1.0], S, 100_000, split_rng(0, 0))
        np.testing.assert_allclose(np.cov(X, rowvar=False), S, atol=0.02)
        np.testing.assert_allclose(X.mean(axis=0), [0.0, 1.0, -1.0], atol=0.02)

    def test_mvn_deterministic(self):
        a = mvn_sample(0.0, np.eye(2), 5, split_rng(9, 1))
        b = mvn_sample(0.0, np.eye(2), 5, split_rng(9, 1))
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("eta", [1.0, 2.0, 5.0])
    def test_lkj_two_dim_variance(self, eta):
        """dim=2: Var(r) = 1 / (2 eta + 1)."""
        rng = split_rng(11, 0)
        r = np.array([lkj_sample_corr(2, eta, rng).entries[0, 1] for _ in range(20_000)])
        assert abs(r.var() - 1.0 / (2.0 * eta + 1.0)) < 0.01
        assert abs(r.mean()) < 0.02

    def test_lkj_is_correlation(self):
        rng = split_rng(12, 0)
        for dim in (3, 5, 20):
            C = lkj_sample_corr(dim, 2.0, rng).entries
            np.testing.assert_allclose(np.diag(C), 1.0)
            np.testing.assert_allclose(C, C.T)
            assert np.linalg.eigvalsh(C).min() > -1e-10
            assert np.all(np.abs(C) <= 1.0 + 1e-12)

    @pytest.mark.parametrize("dim,eta", [(1, 2.0), (3, 0.0), (3, -1.0)])
    def test_lkj_invalid(self, dim, eta):
        with pytest.raises(InvalidCovariance):
            lkj_sample_corr(dim, eta, split_rng(0, 0))

    def test_lognormal(self):
        x = lognormal_sample(0.0, 0.5, 50_000, split_rng(3, 0))
        assert np.all(x > 0)
        assert abs(np.log(x).std() - 0.5) < 0.01
        with pytest.raises(ValueError):
            lognormal_sample(0.0, 0.0, 10, split_rng(3, 0))
