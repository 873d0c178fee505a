"""Command-line surface: happy paths and the exit-code contract."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from conftest import make_dataset
from strisk.cli import main
from strisk.features import read_features_csv, write_features_csv


def write_json(path: Path, payload) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One simulated corpus plus features, built through the CLI itself."""
    root = tmp_path_factory.mktemp("cli")
    gen = write_json(
        root / "gen.json",
        {
            "n_orgs": 60,
            "negative_ratio": 4.0,
            "signal": {"technical": 2.0, "social": 1.5},
            "noise_fraction": 0.2,
            "seed": 21,
        },
    )
    corpus = root / "corpus"
    assert main(["--quiet", "simulate", "--config", str(gen), "--out-dir", str(corpus)]) == 0
    features = root / "features.csv"
    code = main(
        [
            "--quiet",
            "featurize",
            "--orgs", str(corpus / "organizations.jsonl"),
            "--observations", str(corpus / "observations.jsonl"),
            "--tweets", str(corpus / "tweets.jsonl"),
            "--incidents", str(corpus / "incidents.jsonl"),
            "--ground-truth", str(corpus / "ground_truth.jsonl"),
            "--out", str(features),
        ]
    )
    assert code == 0
    models = write_json(
        root / "models.json",
        [{"family": "logistic_regression"}, {"family": "naive_bayes"}],
    )
    return root, corpus, features, models


class TestSimulateAndFeaturize:
    def test_corpus_files_written(self, workspace):
        _, corpus, _, _ = workspace
        for name in (
            "organizations.jsonl",
            "observations.jsonl",
            "tweets.jsonl",
            "incidents.jsonl",
            "ground_truth.jsonl",
        ):
            assert (corpus / name).exists()

    def test_features_parse_with_latent_labels(self, workspace):
        _, _, features, _ = workspace
        profiles = read_features_csv(features)
        assert len(profiles) == 60
        assert all(p.latent_label is not None for p in profiles)

    def test_bad_window_is_usage_error(self, workspace):
        _, corpus, _, _ = workspace
        code = main(
            [
                "featurize",
                "--orgs", str(corpus / "organizations.jsonl"),
                "--observations", str(corpus / "observations.jsonl"),
                "--tweets", str(corpus / "tweets.jsonl"),
                "--incidents", str(corpus / "incidents.jsonl"),
                "--window", "whenever",
                "--out", "/tmp/unused.csv",
            ]
        )
        assert code == 1


class TestMatch:
    def test_match_round_trip(self, tmp_path):
        incidents = tmp_path / "incidents.jsonl"
        incidents.write_text('{"name": "Acme, Inc."}\n{"name": "Zebra Holdings"}\n')
        registry = tmp_path / "registry.jsonl"
        registry.write_text('{"name": "Acme"}\n{"name": "Bolt Freight"}\n')
        out = tmp_path / "matches.jsonl"
        code = main(
            [
                "--quiet",
                "match",
                "--incidents", str(incidents),
                "--registry", str(registry),
                "--out", str(out),
            ]
        )
        assert code == 0
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert len(rows) == 2
        by_name = {row["incident_name"]: row for row in rows}
        assert by_name["Acme, Inc."]["registry_name"] == "Acme"
        assert by_name["Acme, Inc."]["verdict"] == "accepted"
        assert by_name["Zebra Holdings"]["verdict"] == "rejected"


class TestDenoise:
    def test_writes_corrected_features_and_report(self, workspace, tmp_path):
        root, _, features, models = workspace
        out = tmp_path / "denoised.csv"
        report = tmp_path / "noise.json"
        code = main(
            [
                "--quiet",
                "denoise",
                "--features", str(features),
                "--models", str(models),
                "--method", "cm",
                "--folds", "3",
                "--seed", "5",
                "--out", str(out),
                "--report", str(report),
            ]
        )
        assert code == 0
        data = json.loads(report.read_text())
        before = data["before_counts"]
        after = data["after_counts"]
        assert after[1] - before[1] == len(data["flipped_ids"])
        corrected = read_features_csv(out)
        assert sum(p.label for p in corrected) == after[1]

    def test_method_alias_matches_full_name(self, workspace, tmp_path):
        _, _, features, models = workspace
        reports = []
        for i, method in enumerate(("cm", "confusion_matrix")):
            report = tmp_path / f"noise{i}.json"
            code = main(
                [
                    "--quiet",
                    "denoise",
                    "--features", str(features),
                    "--models", str(models),
                    "--method", method,
                    "--folds", "3",
                    "--seed", "5",
                    "--out", str(tmp_path / f"out{i}.csv"),
                    "--report", str(report),
                ]
            )
            assert code == 0
            reports.append(report.read_bytes())
        assert reports[0] == reports[1]


@pytest.fixture(scope="module")
def model_path(workspace, tmp_path_factory):
    root, _, features, _ = workspace
    spec = write_json(
        tmp_path_factory.mktemp("train") / "spec.json",
        {"family": "logistic_regression"},
    )
    out = spec.parent / "model.json"
    assert main(["--quiet", "train", "--features", str(features), "--spec", str(spec), "--out", str(out)]) == 0
    return out


class TestTrainPredictEvaluate:
    def test_model_file_is_versioned_json(self, model_path):
        data = json.loads(model_path.read_text())
        assert data["format_version"] == 1
        assert data["spec"]["family"] == "logistic_regression"

    def test_predict_writes_scores(self, workspace, model_path, tmp_path):
        _, _, features, _ = workspace
        out = tmp_path / "scores.csv"
        assert main(["--quiet", "predict", "--model", str(model_path), "--features", str(features), "--out", str(out)]) == 0
        with out.open() as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 60
        assert set(rows[0]) == {"org_id", "probability", "class"}
        for row in rows:
            p = float(row["probability"])
            assert 0.0 <= p <= 1.0
            assert row["class"] == str(int(p >= 0.5))

    def test_evaluate_writes_metric_report(self, workspace, model_path, tmp_path):
        _, _, features, _ = workspace
        out = tmp_path / "eval.json"
        assert main(["--quiet", "evaluate", "--model", str(model_path), "--features", str(features), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["model"] == "logistic_regression"
        assert 0.0 <= report["auc"] <= 1.0
        assert report["n_positive"] + report["n_negative"] == 60

    def test_stacked_spec_trains_stacked_model(self, workspace, tmp_path):
        _, _, features, _ = workspace
        spec = write_json(
            tmp_path / "stack.json",
            {
                "bases": [{"family": "logistic_regression"}, {"family": "naive_bayes"}],
                "folds": 3,
            },
        )
        out = tmp_path / "stacked.json"
        assert main(["--quiet", "train", "--features", str(features), "--spec", str(spec), "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["kind"] == "stacked"
        scores = tmp_path / "scores.csv"
        assert main(["--quiet", "predict", "--model", str(out), "--features", str(features), "--out", str(scores)]) == 0


class TestExperiment:
    def test_experiment_table_written(self, workspace, tmp_path):
        _, _, features, models = workspace
        out = tmp_path / "experiment.json"
        code = main(
            [
                "--quiet",
                "--seed", "3",
                "experiment",
                "--features", str(features),
                "--models", str(models),
                "--fraction", "0.25",
                "--repeats", "2",
                "--method", "cm",
                "--folds", "3",
                "--out", str(out),
            ]
        )
        assert code == 0
        data = json.loads(out.read_text())
        assert data["repeats"] == 2
        combos = {tuple(row["models"]) for row in data["rows"]}
        assert ("logistic_regression", "naive_bayes") in combos


@pytest.fixture(scope="module")
def run_workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("run")
    config = write_json(
        root / "pipeline.json",
        {
            "workdir": str(root / "work"),
            "seed": 13,
            "simulate": {
                "n_orgs": 60,
                "negative_ratio": 4.0,
                "signal": {"technical": 2.0, "social": 1.5},
                "noise_fraction": 0.2,
            },
            "denoise": {"method": "confusion_matrix", "folds": 3},
            "models": [{"family": "logistic_regression"}, {"family": "naive_bayes"}],
            "stack": {"folds": 3},
            "importance": {"repeats": 2},
        },
    )
    assert main(["--quiet", "run", "--config", str(config)]) == 0
    return root / "work"


class TestRunAndReport:
    def test_run_writes_report(self, run_workdir):
        assert (run_workdir / "report.json").exists()
        assert (run_workdir / "report.txt").exists()

    def test_report_command_renders_to_stdout(self, run_workdir, capsys):
        assert main(["report", "--report", str(run_workdir / "report.json")]) == 0
        printed = capsys.readouterr().out
        assert printed == (run_workdir / "report.txt").read_text()

    def test_skip_flag_merges_into_config(self, tmp_path):
        config = write_json(
            tmp_path / "pipeline.json",
            {
                "workdir": str(tmp_path / "work"),
                "simulate": {"n_orgs": 60, "noise_fraction": 0.2},
                "models": [{"family": "naive_bayes"}],
            },
        )
        code = main(["--quiet", "run", "--config", str(config), "--skip", "denoise"])
        assert code == 0
        assert not (tmp_path / "work" / "features_denoised.csv").exists()

    def test_unknown_skip_stage_is_usage_error(self, tmp_path):
        config = write_json(
            tmp_path / "pipeline.json",
            {
                "workdir": str(tmp_path / "work"),
                "simulate": {"n_orgs": 60},
                "models": [{"family": "naive_bayes"}],
            },
        )
        assert main(["run", "--config", str(config), "--skip", "optimize"]) == 1


class TestExitCodes:
    def test_help_is_success(self, capsys):
        assert main(["--help"]) == 0
        assert "Usage: strisk" in capsys.readouterr().out

    def test_no_arguments_prints_help(self, capsys):
        assert main([]) == 0
        assert "Usage: strisk" in capsys.readouterr().out

    def test_unknown_command_is_usage_error(self):
        assert main(["optimize"]) == 1

    def test_missing_option_is_usage_error(self):
        assert main(["train"]) == 1

    def test_missing_config_file_is_usage_error(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--out-dir", str(tmp_path)]) == 1

    def test_malformed_features_exit_data_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("org_id,nope\nx,1\n")
        model = tmp_path / "model.json"
        features = tmp_path / "features.csv"
        write_features_csv(features, make_dataset(8, 4, seed=0))
        spec = write_json(tmp_path / "spec.json", {"family": "naive_bayes"})
        assert main(["--quiet", "train", "--features", str(features), "--spec", str(spec), "--out", str(model)]) == 0
        assert main(["predict", "--model", str(model), "--features", str(bad), "--out", str(tmp_path / "s.csv")]) == 2

    def test_malformed_jsonl_exit_data_error(self, workspace, tmp_path):
        _, corpus, _, _ = workspace
        broken = tmp_path / "broken.jsonl"
        broken.write_text("{not json}\n")
        code = main(
            [
                "featurize",
                "--orgs", str(broken),
                "--observations", str(corpus / "observations.jsonl"),
                "--tweets", str(corpus / "tweets.jsonl"),
                "--incidents", str(corpus / "incidents.jsonl"),
                "--out", str(tmp_path / "f.csv"),
            ]
        )
        assert code == 2

    def test_single_class_training_is_stage_failure(self, tmp_path):
        features = tmp_path / "all_negative.csv"
        write_features_csv(features, make_dataset(12, 0, seed=0))
        spec = write_json(tmp_path / "spec.json", {"family": "naive_bayes"})
        code = main(["train", "--features", str(features), "--spec", str(spec), "--out", str(tmp_path / "m.json")])
        assert code == 3

    def test_quiet_flag_suppresses_progress(self, tmp_path, capsys):
        gen = write_json(tmp_path / "gen.json", {"n_orgs": 30, "seed": 1})
        assert main(["--quiet", "simulate", "--config", str(gen), "--out-dir", str(tmp_path / "c")]) == 0
        assert capsys.readouterr().out == ""
