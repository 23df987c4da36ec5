# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
import json

import numpy as np
import openpyxl
import pytest

from acebench.cli import main
from acebench.errors import EXIT_IO, EXIT_OK, EXIT_USAGE
from acebench.export import manifest_path, read_csv, read_manifest


def _generate(tmp_path, scenario, n, name=None, seed=0):
    out = tmp_path / (name or f"{scenario}.csv")
    assert main(["generate", scenario, "--n", str(n), "--out", str(out), "--seed", str(seed)]) == EXIT_OK
    return out


class TestGenerate:
    def test_writes_csv_and_manifest(self, tmp_path):
        out = _generate(tmp_path, "base5", 50)
        df = read_csv(out)
        assert list(df.columns) == ["x1", "x2", "x3", "x4", "x5", "y"]
        assert len(df) == 50
        m = read_manifest(manifest_path(out))
        assert m.command == "generate"
        assert m.master_seed == 0
        assert m.scenario["name"] == "base5"
        assert m.outputs == [str(out)]

    def test_same_seed_same_bytes(self, tmp_path):
        a = _generate(tmp_path, "collinear09", 40, "a.csv", seed=3)
        b = _generate(tmp_path, "collinear09", 40, "b.csv", seed=3)
        c = _generate(tmp_path, "collinear09", 40, "c.csv", seed=4)
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes() != c.read_bytes()
        assert b"\r\n" not in a.read_bytes()

    def test_unknown_scenario(self, tmp_path, capsys):
        assert main(["generate", "nope", "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
        err = capsys.readouterr().err
        assert "nope" in err and "base5" in err

    def test_scenario_from_yaml(self, tmp_path):
        spec = tmp_path / "tiny.yaml"
        spec.write_text("name: tiny\np: 2\nbeta: [1.0, -1.0]\n", encoding="utf-8")
        out = tmp_path / "tiny.csv"
        assert main(["generate", str(spec), "--n", "20", "--out", str(out)]) == EXIT_OK
        assert list(read_csv(out).columns) == ["x1", "x2", "y"]


class TestAce:
    def test_ols_on_linear_data(self, tmp_path):
        data = _generate(tmp_path, "base5", 500)
        out = tmp_path / "effects.csv"
        assert main(["ace", "--data", str(data), "--model", "ols", "--out", str(out)]) == EXIT_OK
        df = read_csv(out)
        assert list(df.columns) == ["kind", "feature", "ace", "h", "coefficient", "weighted", "failed"]
        assert df["feature"].tolist() == ["x1", "x2", "x3", "x4", "x5"]
        np.testing.assert_allclose(df["ace"], [1.0, 0.0, 1.0, 0.0, 0.0], atol=0.1)
        np.testing.assert_allclose(df["ace"], df["coefficient"], atol=1e-8)
        assert not df["failed"].any()

    def test_rank_deficient_fit_reports_failed_rows(self, tmp_path):
        data = _generate(tmp_path, "datapoor", 50)
        out = tmp_path / "effects.csv"
        assert main(["ace", "--data", str(data), "--model", "ols", "--out", str(out)]) == EXIT_OK
        df = read_csv(out)
        assert len(df) == 100
        assert df["failed"].all()
        assert df["ace"].isna().all()

    def test_engineered_interaction(self, tmp_path):
        data = _generate(tmp_path, "interaction5", 2000)
        out = tmp_path / "effects.csv"
        argv = ["ace", "--data", str(data), "--model", "ols", "--interactions", "1,2",
                "--engineer-interactions", "--out", str(out)]
        assert main(argv) == EXIT_OK
        df = read_csv(out).set_index("feature")
        assert df.loc["x1:x2", "kind"] == "interaction"
        assert df.loc["x1:x2", "ace"] == pytest.approx(1.0, abs=0.1)

    def test_mixed_difference_interaction(self, tmp_path):
        data = _generate(tmp_path, "base5", 200)
        out = tmp_path / "effects.csv"
        argv = ["ace", "--data", str(data), "--model", "ols", "--interactions", "1,2;3,4",
                "--standardize", "--out", str(out)]
        assert main(argv) == EXIT_OK
        df = read_csv(out)
        inter = df[df["kind"] == "interaction"]
        assert inter["feature"].tolist() == ["x1:x2", "x3:x4"]
        np.testing.assert_allclose(inter["ace"], 0.0, atol=1e-8)

    def test_weighted(self, tmp_path):
        data = _generate(tmp_path, "nonuniform", 300)
        out = tmp_path / "effects.csv"
        assert main(["ace", "--data", str(data), "--model", "ols", "--weighted", "--out", str(out)]) == EXIT_OK
        assert read_csv(out)["weighted"].tolist() == [True]

    @pytest.mark.parametrize("pairs", ["1", "1,x", "0,1", "1,9"])
    def test_bad_interaction_pairs(self, tmp_path, pairs):
        data = _generate(tmp_path, "base5", 30)
        argv = ["ace", "--data", str(data), "--model", "ols", "--interactions", pairs,
                "--out", str(tmp_path / "e.csv")]
        assert main(argv) == EXIT_USAGE

    def test_missing_data_file(self, tmp_path):
        assert main(["ace", "--data", str(tmp_path / "none.csv"), "--model", "ols"]) == EXIT_IO

    def test_invalid_learner_config(self, tmp_path):
        data = _generate(tmp_path, "base5", 30)
        cfg = tmp_path / "rf.yaml"
        cfg.write_text("n_trees: 0\n", encoding="utf-8")
        argv = ["ace", "--data", str(data), "--model", "rf", "--config", str(cfg), "--out", str(tmp_path / "e.csv")]
        assert main(argv) == EXIT_USAGE

    def test_misspelled_learner_config(self, tmp_path, capsys):
        data = _generate(tmp_path, "base5", 30)
        cfg = tmp_path / "nn.yaml"
        cfg.write_text("dropout: 0.3\n", encoding="utf-8")
        argv = ["ace", "--data", str(data), "--model", "nn", "--config", str(cfg), "--out", str(tmp_path / "e.csv")]
        assert main(argv) == EXIT_USAGE
        assert "dropout" in capsys.readouterr().err

    def test_full_density_floor_is_unweighted(self, tmp_path):
        data = _generate(tmp_path, "nonuniform", 300)
        out = tmp_path / "effects.csv"
        argv = ["ace", "--data", str(data), "--model", "ols", "--weighted", "--density-floor", "1.0",
                "--bandwidth", "0.5", "--out", str(out)]
        assert main(argv) == EXIT_OK
        df = read_csv(out)
        assert df["ace"].item() == pytest.approx(df["coefficient"].item(), abs=1e-8)

    def test_zero_step_is_rejected(self, tmp_path):
        data = _generate(tmp_path, "base5", 30)
        argv = ["ace", "--data", str(data), "--model", "ols", "--h-fraction", "0", "--out", str(tmp_path / "e.csv")]
        assert main(argv) == EXIT_USAGE

    def test_unknown_learner(self, tmp_path, capsys):
        data = _generate(tmp_path, "base5", 30)
        assert main(["ace", "--data", str(data), "--model", "svm", "--out", str(tmp_path / "e.csv")]) == EXIT_USAGE
        assert "ols" in capsys.readouterr().err


class TestBenchmark:
    def test_single_replicate_is_flagged(self, tmp_path):
        out_dir = tmp_path / "res"
        argv = ["benchmark", "--scenario", "base5", "--models", "ols,tree_lc", "--n", "100",
                "--replicates", "1", "--out-dir", str(out_dir), "--xlsx"]
        assert main(argv) == EXIT_OK
        report = read_csv(out_dir / "base5_ols.csv")
        assert report["degenerate"].all()
        assert (report["variance"] == 0).all()
        assert (out_dir / "base5_tree_lc_replicates.csv").is_file()
        long = read_csv(out_dir / "base5_long.csv")
        assert set(long["model"]) == {"ols", "tree_lc"}
        assert read_manifest(out_dir / "base5_long.manifest.json").command == "benchmark"
        wb = openpyxl.load_workbook(out_dir / "base5.xlsx")
        assert wb.sheetnames == ["ols", "tree_lc", "long"]

    def test_misspelled_shared_config(self, tmp_path, capsys):
        cfg = tmp_path / "shared.yaml"
        cfg.write_text("n_tree: 3\n", encoding="utf-8")
        argv = ["benchmark", "--scenario", "base5", "--models", "ols,rf", "--n", "60", "--replicates", "1",
                "--config", str(cfg), "--out-dir", str(tmp_path / "res")]
        assert main(argv) == EXIT_USAGE
        assert "n_tree" in capsys.readouterr().err

    def test_shared_config_goes_to_learners_that_take_it(self, tmp_path):
        cfg = tmp_path / "shared.yaml"
        cfg.write_text("n_trees: 3\n", encoding="utf-8")
        out_dir = tmp_path / "res"
        argv = ["benchmark", "--scenario", "base5", "--models", "ols,rf", "--n", "60", "--replicates", "1",
                "--config", str(cfg), "--out-dir", str(out_dir)]
        assert main(argv) == EXIT_OK
        learners = {lr["name"]: lr["params"] for lr in read_manifest(out_dir / "base5_long.manifest.json").learners}
        assert learners == {"ols": {}, "rf": {"n_trees": 3}}

    def test_zero_replicates_is_rejected(self, tmp_path):
        argv = ["benchmark", "--scenario", "base5", "--models", "ols", "--replicates", "0",
                "--out-dir", str(tmp_path / "res")]
        assert main(argv) == EXIT_USAGE

    def test_replicate_table_carries_truth(self, tmp_path):
        out_dir = tmp_path / "res"
        argv = ["benchmark", "--scenario", "nonuniform", "--models", "ols", "--n", "200", "--replicates", "2",
                "--out-dir", str(out_dir)]
        assert main(argv) == EXIT_OK
        reps = read_csv(out_dir / "nonuniform_ols_replicates.csv")
        report = read_csv(out_dir / "nonuniform_ols.csv")
        assert (reps["truth_x1"] < 2.0).all()
        assert report["truth"].item() == pytest.approx(reps["truth_x1"].mean(), rel=1e-12)

    def test_thread_count_keeps_bytes(self, tmp_path):
        def run(dirname, threads):
            out_dir = tmp_path / dirname
            argv = ["benchmark", "--scenario", "collinear09", "--models", "ols,tree_lc", "--n", "100",
                    "--replicates", "4", "--seed", "7", "--threads", str(threads), "--out-dir", str(out_dir)]
            assert main(argv) == EXIT_OK
            return {p.name: p.read_bytes() for p in sorted(out_dir.glob("*.csv"))}

        a, b = run("t1", 1), run("t4", 4)
        assert a.keys() == b.keys()
        assert a == b


class TestOtherCommands:
    def test_tune_writes_optima(self, tmp_path):
        out_dir = tmp_path / "tune"
        argv = ["tune", "--model", "elastic_net", "--scenario", "base5", "--n", "100",
                "--draws", "3", "--reps", "2", "--out-dir", str(out_dir)]
        assert main(argv) == EXIT_OK
        assert len(read_csv(out_dir / "tune_elastic_net.csv")) == 3
        optima = json.loads((out_dir / "tune_elastic_net_optima.json").read_text(encoding="utf-8"))
        assert set(optima) == {"effect_mse", "prediction_mse"}
        for entry in optima.values():
            assert set(entry["params"]) == {"alpha", "lambda"}
            assert 0 <= entry["draw"] < 3

    def test_tune_rejects_case_study(self, tmp_path):
        argv = ["tune", "--model", "rf", "--scenario", "casestudy", "--out-dir", str(tmp_path)]
        assert main(argv) == EXIT_USAGE

    def test_casestudy(self, tmp_path):
        out = tmp_path / "cs.csv"
        argv = ["casestudy", "--models", "ols", "--n-train", "300", "--n-test", "300", "--out", str(out)]
        assert main(argv) == EXIT_OK
        df = read_csv(out)
        assert len(df) == 4
        assert set(df["distribution"]) == {"in_dist", "ood"}

    def test_trace_boost(self, tmp_path):
        out = tmp_path / "boost.csv"
        assert main(["trace", "--kind", "boost", "--n", "300", "--steps", "30", "--out", str(out)]) == EXIT_OK
        df = read_csv(out)
        assert len(df) == 30
        np.testing.assert_allclose(df["beta_x2"], df["inc_x2"].cumsum(), atol=1e-12)

    def test_trace_nn(self, tmp_path):
        out = tmp_path / "nn.csv"
        assert main(["trace", "--kind", "nn", "--n", "100", "--epochs", "1", "--out", str(out)]) == EXIT_OK
        df = read_csv(out)
        assert len(df) == 10
        assert {"ace_x1", "ace_x2", "loss"} <= set(df.columns)

    def test_trace_nn_zero_epochs_is_rejected(self, tmp_path):
        argv = ["trace", "--kind", "nn", "--n", "100", "--epochs", "0", "--out", str(tmp_path / "nn.csv")]
        assert main(argv) == EXIT_USAGE

    def test_replay_reproduces_bytes(self, tmp_path):
        out = _generate(tmp_path, "base5", 60, seed=11)
        original = out.read_bytes()
        out.unlink()
        assert main(["replay", str(manifest_path(out))]) == EXIT_OK
        assert out.read_bytes() == original

    def test_bad_flag(self):
        assert main(["generate", "base5", "--bogus"]) == EXIT_USAGE

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == EXIT_OK
        assert "benchmark" in capsys.readouterr().out
