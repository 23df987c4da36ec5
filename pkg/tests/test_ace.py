# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
from dataclasses import dataclass
from typing import Callable

import numpy as np
import pytest
from scipy.integrate import trapezoid

from acebench.ace import (
    Standardization,
    ace,
    add_interaction_columns,
    conditional_effects,
    interaction_ace,
    inverse_density_weights,
    kde_1d,
    standardize,
    unstandardize,
    weighted_ace,
)
from acebench.errors import SameFeature, ZeroVariance
from acebench.learners import LearnerKind, LinearModel
from acebench.randkit import split_rng
from acebench.scenarios import builtin, gen_linear


@dataclass(frozen=True)
class FnModel:
    """임의의 함수를 학습된 모형처럼 감싼다."""

    fn: Callable[[np.ndarray], np.ndarray]
    n_features: int
    kind: LearnerKind = LearnerKind.NEURAL_NET

    def predict(self, X):
        return self.fn(np.asarray(X, dtype=np.float64))


def _normal(n, p, seed=0):
    return np.random.default_rng(seed).standard_normal((n, p))


class TestConditionalEffects:
    def test_linear_model_recovers_coefficients(self):
        X = _normal(100, 2)
        m = LinearModel(0.5, [2.0, -1.0])
        rep = ace(m, X)
        np.testing.assert_allclose(rep.ce[:, 0], 2.0, atol=1e-10)
        np.testing.assert_allclose(rep.ace, [2.0, -1.0], atol=1e-10)
        np.testing.assert_allclose(rep.h, 0.1 * X.std(axis=0, ddof=1))

    def test_square_forward_and_central(self):
        """f = x^2: 전진차분은 2x + h, 중앙차분은 2x."""
        X = _normal(50, 1)
        m = FnModel(lambda X: X[:, 0] ** 2, 1)
        h = 0.1 * X[:, 0].std(ddof=1)
        np.testing.assert_allclose(conditional_effects(m, X, 0), 2 * X[:, 0] + h, atol=1e-9)
        np.testing.assert_allclose(conditional_effects(m, X, 0, central=True), 2 * X[:, 0], atol=1e-9)

    def test_at_one_with_unit_sd(self):
        x = np.array([1.0, 0.0, 2.0])  # sd = 1
        m = FnModel(lambda X: X[:, 0] ** 2, 1)
        assert conditional_effects(m, x[:, None], 0)[0] == pytest.approx(2.1)

    def test_forward_error_halves_with_h(self):
        X = _normal(50, 1)
        m = FnModel(lambda X: X[:, 0] ** 2, 1)
        err = [np.abs(conditional_effects(m, X, 0, h_fraction=f) - 2 * X[:, 0]).mean() for f in (0.2, 0.1)]
        assert err[1] == pytest.approx(err[0] / 2, rel=1e-6)

    def test_linearity_in_the_model(self):
        X = _normal(80, 3)
        f = FnModel(lambda X: np.sin(X[:, 0]) * X[:, 1], 3)
        g = FnModel(lambda X: X[:, 2] ** 3, 3)
        combo = FnModel(lambda X: 2.0 * f.predict(X) - 3.0 * g.predict(X), 3)
        np.testing.assert_allclose(ace(combo, X).ace, 2.0 * ace(f, X).ace - 3.0 * ace(g, X).ace, atol=1e-9)

    def test_row_order_only_permutes(self):
        X = _normal(60, 2)
        m = FnModel(lambda X: X[:, 0] * X[:, 1] + X[:, 0] ** 2, 2)
        perm = np.random.default_rng(1).permutation(60)
        a, b = ace(m, X), ace(m, X[perm])
        np.testing.assert_allclose(b.ce, a.ce[perm], atol=1e-12)
        np.testing.assert_allclose(b.ace, a.ace, atol=1e-12)

    def test_feature_subset(self):
        X = _normal(30, 4)
        rep = ace(LinearModel(0.0, [1.0, 2.0, 3.0, 4.0]), X, features=[3, 1])
        assert rep.features == (3, 1)
        np.testing.assert_allclose(rep.ace, [4.0, 2.0], atol=1e-10)

    def test_zero_variance_feature(self):
        X = _normal(20, 2)
        X[:, 1] = 5.0
        with pytest.raises(ZeroVariance) as exc:
            ace(LinearModel(0.0, [1.0, 1.0]), X)
        assert exc.value.index == 1

    def test_bad_index(self):
        with pytest.raises(IndexError):
            conditional_effects(LinearModel(0.0, [1.0]), _normal(10, 1), 1)


    @pytest.mark.parametrize("call", [
        lambda m, X: conditional_effects(m, X, 0, h_fraction=0.0),
        lambda m, X: ace(m, X, h_fraction=0.0),
        lambda m, X: weighted_ace(m, X, 0, h_fraction=0.0),
        lambda m, X: interaction_ace(m, X, (0, 1), h_fraction=0.0),
    ])
    def test_explicit_zero_step_is_rejected(self, call):
        with pytest.raises(ValueError):
            call(LinearModel(0.0, [1.0, 1.0]), _normal(20, 2))


class TestDensity:
    def test_standard_normal_at_zero(self):
        x = split_rng(0, 0).standard_normal(100_000)
        assert kde_1d(x, at=[0.0])[0] == pytest.approx(1 / np.sqrt(2 * np.pi), abs=0.01)

    def test_integrates_to_one(self):
        x = split_rng(0, 1).standard_normal(2000)
        grid = np.linspace(-7, 7, 2001)
        dens = kde_1d(x, at=grid)
        assert np.all(dens > 0)
        assert trapezoid(dens, grid) == pytest.approx(1.0, abs=0.01)

    def test_constant_sample(self):
        with pytest.raises(ZeroVariance):
            kde_1d(np.ones(10))

    def test_weights_normalized(self):
        w = inverse_density_weights(split_rng(0, 2).standard_normal(500))
        assert np.all(w > 0)
        assert w.sum() == pytest.approx(1.0)

    def test_full_floor_gives_uniform_weights(self):
        x = split_rng(0, 3).standard_normal(300)
        np.testing.assert_allclose(inverse_density_weights(x, 1.0), 1 / 300)


    @pytest.mark.parametrize("fraction", [-0.1, 1.5])
    def test_floor_outside_unit_interval(self, fraction):
        with pytest.raises(ValueError):
            inverse_density_weights(split_rng(0, 4).standard_normal(50), fraction)

    def test_bandwidth_changes_weights(self):
        x = split_rng(0, 5).lognormal(0.0, 0.5, 500)
        narrow = inverse_density_weights(x, 0.0, bandwidth=0.05)
        wide = inverse_density_weights(x, 0.0, bandwidth=1.0)
        assert narrow.sum() == pytest.approx(1.0)
        assert narrow.max() > wide.max()


class TestWeightedAce:
    def test_full_floor_matches_unweighted(self):
        X = _normal(300, 2)
        m = FnModel(lambda X: X[:, 0] ** 3 + X[:, 1], 2)
        rep = weighted_ace(m, X, 0, density_floor_fraction=1.0)
        assert rep.weighted
        assert rep.ace[0] == pytest.approx(ace(m, X).ace[0], rel=1e-10)

    def test_uniform_feature_barely_changes(self):
        x = split_rng(1, 0).uniform(0.0, 1.0, 2000)
        m = FnModel(lambda X: X[:, 0] ** 2, 1)
        un = ace(m, x[:, None]).ace[0]
        w = weighted_ace(m, x[:, None], 0).ace[0]
        assert abs(w - un) < 0.05

    def test_skewed_feature_shifts_toward_tail(self):
        """lognormal x, f = 2 min(x, 2): 가중하면 꺾인 뒤 구간의 비중이 커진다."""
        spec = builtin("nonuniform")
        d = gen_linear(spec, 2000, split_rng(2, 0))
        m = FnModel(lambda X: 2.0 * np.minimum(X[:, 0], 2.0), 1)
        un = ace(m, d.X).ace[0]
        w = weighted_ace(m, d.X, 0)
        assert un > w.ace[0] + 0.2
        assert w.weights.sum() == pytest.approx(1.0)
        assert w.ce.shape == (2000, 1)


    def test_lower_floor_weights_tail_more(self):
        d = gen_linear(builtin("nonuniform"), 2000, split_rng(2, 0))
        m = FnModel(lambda X: 2.0 * np.minimum(X[:, 0], 2.0), 1)
        values = [weighted_ace(m, d.X, 0, density_floor_fraction=f).ace[0] for f in (1.0, 0.1, 0.01)]
        assert values[0] > values[1] >= values[2]


class TestInteractions:
    def test_bilinear(self):
        X = _normal(100, 3)
        m = FnModel(lambda X: 3.0 + X[:, 0] * X[:, 1] + X[:, 2], 3)
        rep = interaction_ace(m, X, (0, 1))
        assert rep.value == pytest.approx(1.0, abs=1e-9)

    def test_additive_model_has_none(self):
        X = _normal(100, 2)
        m = FnModel(lambda X: X[:, 0] ** 2 + np.sin(X[:, 1]), 2)
        assert interaction_ace(m, X, (0, 1)).value == pytest.approx(0.0, abs=1e-9)

    def test_symmetric(self):
        X = _normal(100, 2)
        m = FnModel(lambda X: np.exp(0.3 * X[:, 0]) * X[:, 1] ** 2, 2)
        assert interaction_ace(m, X, (0, 1)).value == pytest.approx(interaction_ace(m, X, (1, 0)).value)

    def test_same_feature(self):
        with pytest.raises(SameFeature):
            interaction_ace(LinearModel(0.0, [1.0, 1.0]), _normal(10, 2), (1, 1))


class TestStandardize:
    def test_round_trip(self):
        X = _normal(40, 3) * [1.0, 5.0, 0.1] + [0.0, -3.0, 7.0]
        Z, rec = standardize(X)
        np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(Z.std(axis=0, ddof=1), 1.0)
        np.testing.assert_allclose(unstandardize(Z, rec), X)
        assert isinstance(rec, Standardization)

    def test_constant_column(self):
        X = _normal(10, 3)
        X[:, 2] = 1.0
        with pytest.raises(ZeroVariance) as exc:
            standardize(X)
        assert exc.value.index == 2

    def test_single_row(self):
        with pytest.raises(ZeroVariance):
            standardize(np.ones((1, 2)))

    def test_add_interaction_columns(self):
        X = _normal(10, 3)
        Xa, names = add_interaction_columns(X, [(0, 1), (1, 2)], ["a", "b", "c"])
        assert Xa.shape == (10, 5)
        np.testing.assert_allclose(Xa[:, 3], X[:, 0] * X[:, 1])
        np.testing.assert_allclose(Xa[:, 4], X[:, 1] * X[:, 2])
        assert names == ("a", "b", "c", "a:b", "b:c")

    def test_add_interaction_columns_default_names(self):
        Xa, names = add_interaction_columns(_normal(5, 2), [])
        assert Xa.shape == (5, 2)
        assert names == ("x1", "x2")
        with pytest.raises(SameFeature):
            add_interaction_columns(_normal(5, 2), [(0, 0)])
