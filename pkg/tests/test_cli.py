"""Command-line interface: subcommands, option layering, exit codes."""

import json
import os

import pytest

from botsift import read_dataset_csv
from botsift.cli import main

PROFILE = {
    "features": {
        "dur": {"normal": {"mean": 70.0, "cv": 1.0},
                "botnet": {"mean": 7.0, "cv": 1.0}},
        "rate": {"normal": {"mean": 30.0, "cv": 1.0},
                 "botnet": {"mean": 900.0, "cv": 1.0}},
    },
    "tokens": {"proto": {"tcp": 0.7, "udp": 0.3}},
    "class_ratio": 0.8,
    "row_count": 300,
    "seed": 3,
}


@pytest.fixture
def profile_path(tmp_path):
    path = str(tmp_path / "tiny.profile")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(PROFILE, fh)
    return path


@pytest.fixture
def flows_csv(tmp_path, profile_path):
    """A synthesized raw flow CSV."""
    out = str(tmp_path / "synthdir")
    assert main(["synth", "--profile", profile_path, "--out", out]) == 0
    return os.path.join(out, "synth.csv")


@pytest.fixture
def dataset_csv(tmp_path, flows_csv):
    """An ingested (cleansed, encoded) dataset CSV."""
    out = str(tmp_path / "ingestdir")
    assert main(["ingest", "--csv", flows_csv, "--out", out]) == 0
    return os.path.join(out, "dataset.csv")


class TestSynth:
    def test_writes_deterministic_csv(self, tmp_path, profile_path, capsys):
        a, b = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["synth", "--profile", profile_path, "--out", a]) == 0
        assert "generated 300 rows" in capsys.readouterr().out
        assert main(["synth", "--profile", profile_path, "--out", b]) == 0
        with open(os.path.join(a, "synth.csv"), "rb") as fh:
            first = fh.read()
        with open(os.path.join(b, "synth.csv"), "rb") as fh:
            second = fh.read()
        assert first == second

    def test_rows_and_seed_flags(self, tmp_path, profile_path, capsys):
        out = str(tmp_path / "small")
        code = main(["synth", "--profile", profile_path, "--rows", "40",
                     "--seed", "9", "--out", out])
        assert code == 0
        assert "generated 40 rows" in capsys.readouterr().out

    def test_bundled_profile_by_name(self, tmp_path, capsys):
        out = str(tmp_path / "bundled")
        code = main(["synth", "--profile", "botiot-means", "--rows", "50",
                     "--out", out])
        assert code == 0
        assert "generated 50 rows" in capsys.readouterr().out

    def test_unknown_profile_name_fails(self, tmp_path, capsys):
        code = main(["synth", "--profile", "no-such-profile",
                     "--out", str(tmp_path / "x")])
        assert code == 2
        assert "no bundled profile" in capsys.readouterr().err
        assert not (tmp_path / "x").exists()


class TestIngest:
    def test_produces_dataset_and_sidecars(self, tmp_path, flows_csv, capsys):
        out = str(tmp_path / "ing")
        assert main(["ingest", "--csv", flows_csv, "--out", out]) == 0
        assert "ingested 300 rows" in capsys.readouterr().out
        dataset, _ = read_dataset_csv(os.path.join(out, "dataset.csv"))
        assert dataset.n_rows == 300
        assert "proto" in dataset.feature_names
        with open(os.path.join(out, "counts.json"), encoding="utf-8") as fh:
            counts = json.load(fh)
        assert counts["rows"] == 300
        assert counts["normal"] + counts["botnet"] == 300
        with open(os.path.join(out, "encoding.json"), encoding="utf-8") as fh:
            encoding = json.load(fh)
        assert set(encoding["proto"]) <= {"tcp", "udp"}

    def test_missing_csv_option_exits_one(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        assert main(["ingest"]) == 1
        assert "missing required option --csv" in capsys.readouterr().err
        assert not (tmp_path / "botsift-out").exists()

    def test_unreadable_csv_exits_two(self, tmp_path, capsys):
        code = main(["ingest", "--csv", str(tmp_path / "ghost.csv"),
                     "--out", str(tmp_path / "o")])
        assert code == 2
        assert not (tmp_path / "o").exists()

    def test_options_can_come_from_config_file(self, tmp_path, flows_csv,
                                               capsys):
        cfg = str(tmp_path / "cli.json")
        out = str(tmp_path / "cfgout")
        with open(cfg, "w", encoding="utf-8") as fh:
            json.dump({"csv": flows_csv, "out": out}, fh)
        assert main(["ingest", "--config", cfg]) == 0
        assert os.path.exists(os.path.join(out, "dataset.csv"))


class TestProfileStats:
    def test_prints_counts_and_means(self, flows_csv, capsys):
        assert main(["profile-stats", "--csv", flows_csv]) == 0
        out = capsys.readouterr().out
        assert "rows: 300" in out
        assert "normal feature means:" in out
        assert "botnet feature means:" in out
        assert "dur" in out

    def test_optional_json_output(self, tmp_path, flows_csv):
        out = str(tmp_path / "stats")
        assert main(["profile-stats", "--csv", flows_csv, "--out", out]) == 0
        with open(os.path.join(out, "profile_stats.json"),
                  encoding="utf-8") as fh:
            payload = json.load(fh)
        assert payload["counts"]["normal"] + payload["counts"]["botnet"] == 300


class TestScoreFeatures:
    def test_writes_scores_and_prints_selection(self, tmp_path, dataset_csv,
                                                capsys):
        out = str(tmp_path / "scores")
        assert main(["score-features", "--csv", dataset_csv, "--out", out]) == 0
        assert "selected over mean" in capsys.readouterr().out
        assert os.path.exists(os.path.join(out, "feature_scores.txt"))
        with open(os.path.join(out, "feature_scores.json"),
                  encoding="utf-8") as fh:
            payload = json.load(fh)
        assert set(payload) == {"scores", "mean_score", "selected", "ranked"}


class TestSmote:
    def test_balances_and_reports_counts(self, tmp_path, dataset_csv, capsys):
        out = str(tmp_path / "bal")
        assert main(["smote", "--csv", dataset_csv, "--seed", "1",
                     "--out", out]) == 0
        assert "balanced" in capsys.readouterr().out
        dataset, flags = read_dataset_csv(os.path.join(out, "balanced.csv"))
        assert flags is not None
        assert dataset.class_counts[0] == dataset.class_counts[1]
        with open(os.path.join(out, "counts.json"), encoding="utf-8") as fh:
            counts = json.load(fh)
        assert counts["after"]["normal"] == counts["after"]["botnet"]
        assert counts["synthetic_rows"] == int(flags.sum())

    def test_k_flag_respected(self, tmp_path, dataset_csv, capsys):
        out = str(tmp_path / "bigk")
        code = main(["smote", "--csv", dataset_csv, "--k", "70",
                     "--out", out])
        assert code == 2  # minority has only 60 rows
        assert "k_neighbors" in capsys.readouterr().err
        assert not os.path.exists(out)


class TestTrainEvaluate:
    def test_train_writes_model_with_provenance(self, tmp_path, dataset_csv,
                                                capsys):
        out = str(tmp_path / "fit")
        assert main(["train", "--csv", dataset_csv, "--model", "gnb",
                     "--out", out]) == 0
        assert "trained gnb on 300 rows" in capsys.readouterr().out
        with open(os.path.join(out, "model_gnb.json"), encoding="utf-8") as fh:
            payload = json.load(fh)
        assert payload["kind"] == "gnb"
        assert payload["provenance"]["trained_rows"] == 300

    def test_train_seed_reaches_the_mlp(self, tmp_path, dataset_csv):
        out = str(tmp_path / "fitmlp")
        code = main(["train", "--csv", dataset_csv, "--model", "mlp",
                     "--params", '{"epochs": 2}', "--seed", "77",
                     "--out", out])
        assert code == 0
        with open(os.path.join(out, "model_mlp.json"), encoding="utf-8") as fh:
            assert json.load(fh)["config"]["seed"] == 77

    def test_bad_params_json_exits_one(self, dataset_csv, tmp_path, capsys):
        code = main(["train", "--csv", dataset_csv, "--model", "knn",
                     "--params", "{broken", "--out", str(tmp_path / "x")])
        assert code == 1
        assert "not valid JSON" in capsys.readouterr().err
        assert not (tmp_path / "x").exists()

    def test_evaluate_reports_metrics(self, tmp_path, dataset_csv, capsys):
        fit_dir = str(tmp_path / "fit2")
        assert main(["train", "--csv", dataset_csv, "--model", "gnb",
                     "--out", fit_dir]) == 0
        capsys.readouterr()
        out = str(tmp_path / "eval")
        code = main(["evaluate",
                     "--model-file", os.path.join(fit_dir, "model_gnb.json"),
                     "--csv", dataset_csv, "--out", out])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "model: gnb" in stdout
        assert "confusion matrix" in stdout
        for name in ("gnb_report.txt", "gnb_metrics.json", "gnb_roc.tsv"):
            assert os.path.exists(os.path.join(out, name))


class TestCrossValidate:
    def test_prints_and_writes_fold_summary(self, tmp_path, dataset_csv,
                                            capsys):
        out = str(tmp_path / "cv")
        code = main(["cross-validate", "--csv", dataset_csv, "--model", "gnb",
                     "--folds", "3", "--seed", "2", "--out", out])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "3-fold cross-validation" in stdout
        with open(os.path.join(out, "cv_gnb.json"), encoding="utf-8") as fh:
            payload = json.load(fh)
        assert payload["k"] == 3
        assert len(payload["folds"]) == 3


class TestRun:
    def _config(self, tmp_path, profile_path, **extra):
        payload = {
            "input": {"profile": profile_path},
            "models": [{"name": "gnb"}],
            "cv_folds": 0,
            "select": False,
        }
        payload.update(extra)
        path = str(tmp_path / "run.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
        return path

    def test_runs_and_prints_summary(self, tmp_path, profile_path, capsys):
        cfg = self._config(tmp_path, profile_path, smote="both")
        out = str(tmp_path / "bundle")
        assert main(["run", "--config", cfg, "--out", out]) == 0
        stdout = capsys.readouterr().out
        assert "experiment bundle written" in stdout
        assert "raw" in stdout and "smote" in stdout
        assert os.path.exists(os.path.join(out, "manifest.json"))

    def test_paper_mode_and_seed_overrides(self, tmp_path, profile_path):
        cfg = self._config(tmp_path, profile_path)
        out = str(tmp_path / "paper")
        code = main(["run", "--config", cfg, "--paper-mode", "--seed", "12",
                     "--out", out])
        assert code == 0
        with open(os.path.join(out, "manifest.json"), encoding="utf-8") as fh:
            manifest = json.load(fh)
        assert manifest["mode"] == "paper"
        assert manifest["stage_seeds"]["master"] == 12

    def test_missing_config_exits_one(self, capsys):
        assert main(["run"]) == 1
        assert "missing required option --config" in capsys.readouterr().err

    def test_invalid_config_body_exits_one(self, tmp_path, profile_path,
                                           capsys):
        cfg = self._config(tmp_path, profile_path, cv_folds=1)
        assert main(["run", "--config", cfg]) == 1
        assert "cv_folds" in capsys.readouterr().err


class TestParser:
    def test_no_command_prints_help(self, capsys):
        assert main([]) == 1
        assert "usage" in capsys.readouterr().out.lower()

    def test_unknown_command_exits_one(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 1

    def test_out_dir_falls_back_to_environment(self, tmp_path, flows_csv,
                                               monkeypatch, capsys):
        target = str(tmp_path / "from-env")
        monkeypatch.setenv("BOTSIFT_OUT", target)
        monkeypatch.chdir(tmp_path)
        assert main(["ingest", "--csv", flows_csv]) == 0
        assert os.path.exists(os.path.join(target, "dataset.csv"))
