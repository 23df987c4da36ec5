# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
import pytest
from pydantic import ValidationError

from acebench.errors import EXIT_USAGE, UnknownLearner, UsageError
from acebench.learners import CONFIG_MODELS, PRESETS, LearnerKind, config_fields, resolve_learner


class TestRegistry:
    @pytest.mark.parametrize("kind", list(CONFIG_MODELS))
    def test_every_config_rejects_unknown_fields(self, kind):
        with pytest.raises(ValidationError):
            CONFIG_MODELS[kind](not_a_parameter=1)

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_are_valid(self, name):
        assert resolve_learner(name).name == name

    @pytest.mark.parametrize("name,params", [
        ("nn", {"dropout": 0.3}),
        ("rf", {"n_tree": 3}),
        ("gbt", {"learning_rate": 0.1}),
        ("ols", {"alpha": 0.5}),
    ])
    def test_misspelled_parameter_is_usage_error(self, name, params):
        with pytest.raises(UsageError) as exc:
            resolve_learner(name, params)
        assert exc.value.exit_code == EXIT_USAGE
        assert next(iter(params)) in exc.value.detail

    def test_out_of_range_value_is_usage_error(self):
        with pytest.raises(UsageError):
            resolve_learner("rf", {"n_trees": 0})

    def test_overrides_keep_preset_values(self):
        spec = resolve_learner("nn_dropout", {"epochs": 3})
        cfg = spec.config()
        assert cfg.dropout_rate == 0.3
        assert cfg.epochs == 3

    def test_lambda_alias(self):
        assert {"lambda", "lambda_", "alpha"} <= config_fields(LearnerKind.ELASTIC_NET)
        assert resolve_learner("ridge", {"lambda": 0.5}).config().lambda_ == 0.5

    def test_config_fields(self):
        assert config_fields(LearnerKind.OLS) == frozenset()
        assert "n_trees" in config_fields(LearnerKind.RANDOM_FOREST)
        assert "dropout_rate" in config_fields(LearnerKind.NEURAL_NET)

    def test_unknown_learner(self):
        with pytest.raises(UnknownLearner) as exc:
            resolve_learner("svm")
        assert "ols" in exc.value.catalog
