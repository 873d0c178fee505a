"""End-to-end pipeline: simulate, match, featurize, denoise, split,
train, evaluate, report.

Every stage reads files and writes files, so a run is restartable and
each stage is independently inspectable. All randomness flows from seeds
in the config; reports are rendered with stable ordering and repr-exact
floats, making identical configs produce byte-identical artifacts.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .evaluation import EvaluationReport, evaluate_scores, split_train_test
from .features import (
    FeatureVector,
    featurize_corpus,
    parse_window,
    read_features_csv,
    write_features_csv,
)
from .models import (
    ImportanceReport,
    ModelSpec,
    StackedModel,
    load_model,
    load_stacked,
    permutation_importance,
    predict_proba_many,
    save_model,
    save_stacked,
    train,
    train_stacked,
)
from .models.stacking import predict_stacked_many
from .names import MatchConfig, match_names
from .noise import (
    NoiseReport,
    discover_noisy_negatives,
    flip_labels,
    out_of_sample_probabilities,
)
from .records import (
    RecordError,
    load_incidents,
    load_observations,
    load_organizations,
    load_tweets,
    write_jsonl,
)
from .synth import GeneratorConfig, generate_corpus, load_ground_truth, write_corpus

STAGES = ("simulate", "match", "featurize", "denoise", "split", "train", "evaluate", "report")

NOISY_LABEL_POLICY = "training on noisy labels"
CORRECTED_LABEL_POLICY = "noise-corrected labels"


class DataError(Exception):
    """Malformed or inconsistent input data."""


class StageFailure(Exception):
    """A pipeline stage failed; carries the stage name for the exit message."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


@dataclass(frozen=True, slots=True)
class PipelineConfig:
    """Paths, stage settings, and seeds for one pipeline run."""

    workdir: Path
    seed: int = 0
    simulate: GeneratorConfig | None = None
    inputs: dict[str, Path] | None = None
    ground_truth: Path | None = None
    window: str | None = None
    match: MatchConfig = field(default_factory=MatchConfig)
    denoise_method: str = "confusion_matrix"
    denoise_folds: int = 5
    denoise_models: tuple[ModelSpec, ...] = ()
    split_fraction: float = 0.7
    models: tuple[ModelSpec, ...] = ()
    stack_folds: int | None = 5
    threshold: float = 0.5
    importance_repeats: int | None = 5
    skip: tuple[str, ...] = ()
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.simulate is None and not self.inputs:
            raise ValueError("config needs either a simulate section or input paths")
        if not self.models:
            raise ValueError("config lists no models to train")
        for stage in self.skip:
            if stage not in STAGES:
                raise ValueError(f"unknown stage in skip list: {stage!r}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.window is not None:
            parse_window(self.window)

    @classmethod
    def from_dict(cls, data: dict, workdir: Path | None = None) -> PipelineConfig:
        simulate = data.get("simulate")
        inputs = data.get("inputs")
        denoise = data.get("denoise", {}) or {}
        models = [ModelSpec.from_dict(spec) for spec in data.get("models", [])]
        denoise_models = [
            ModelSpec.from_dict(spec) for spec in denoise.get("models", [])
        ] or models
        stack = data.get("stack")
        return cls(
            workdir=Path(workdir or data["workdir"]),
            seed=int(data.get("seed", 0)),
            simulate=GeneratorConfig.from_dict(simulate) if simulate else None,
            inputs={k: Path(v) for k, v in inputs.items()} if inputs else None,
            ground_truth=Path(data["ground_truth"]) if data.get("ground_truth") else None,
            window=data.get("window"),
            match=MatchConfig.from_dict(data["match"]) if data.get("match") else MatchConfig(),
            denoise_method=denoise.get("method", "confusion_matrix"),
            denoise_folds=int(denoise.get("folds", 5)),
            denoise_models=tuple(denoise_models),
            split_fraction=float(data.get("split", {}).get("train_fraction", 0.7)),
            models=tuple(models),
            stack_folds=int(stack["folds"]) if stack else None,
            threshold=float(data.get("evaluate", {}).get("threshold", 0.5)),
            importance_repeats=(
                int(data["importance"]["repeats"]) if data.get("importance") else None
            ),
            skip=tuple(data.get("skip", [])),
            jobs=int(data.get("jobs", 1)),
        )

    @classmethod
    def from_file(cls, path: str | Path, workdir: Path | None = None) -> PipelineConfig:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict(data, workdir=workdir)


def _dump_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


@dataclass
class PipelineResult:
    workdir: Path
    report: dict
    artifacts: dict[str, Path]


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Execute every non-skipped stage in order; artifacts land in workdir."""
    workdir = Path(config.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, Path] = {}
    skip = set(config.skip)

    input_paths: dict[str, Path]
    ground_truth_path: Path | None = config.ground_truth
    if config.simulate is not None and "simulate" not in skip:
        try:
            bundle = generate_corpus(config.simulate)
            paths = write_corpus(bundle, workdir / "corpus")
        except (ValueError, RecordError) as exc:
            raise StageFailure("simulate", str(exc)) from exc
        input_paths = {k: paths[k] for k in ("organizations", "observations", "tweets", "incidents")}
        ground_truth_path = paths["ground_truth"]
        artifacts.update(paths)
    elif config.inputs:
        input_paths = dict(config.inputs)
    else:
        raise StageFailure("simulate", "stage skipped but no input paths configured")

    try:
        organizations = load_organizations(input_paths["organizations"])
        observations = load_observations(input_paths["observations"])
        tweets = load_tweets(input_paths["tweets"])
        incidents = load_incidents(input_paths["incidents"])
    except RecordError as exc:
        raise DataError(str(exc)) from exc
    except KeyError as exc:
        raise DataError(f"missing input path for {exc.args[0]!r}") from exc

    match_summary: dict[str, int] = {}
    if "match" not in skip:
        try:
            candidates = match_names(
                [incident.name for incident in incidents] or [organizations[0].name],
                [org.name for org in organizations],
                config.match,
            )
        except ValueError as exc:
            raise StageFailure("match", str(exc)) from exc
        matches_path = workdir / "matches.jsonl"
        write_jsonl(
            matches_path,
            (
                {
                    "incident_name": c.incident_name.original,
                    "registry_name": c.registry_name.original,
                    "jaccard": c.jaccard,
                    "jaro_winkler": c.jaro_winkler,
                    "verdict": c.verdict,
                }
                for c in candidates
            ),
        )
        artifacts["matches"] = matches_path
        for candidate in candidates:
            match_summary[candidate.verdict] = match_summary.get(candidate.verdict, 0) + 1

    try:
        window = parse_window(config.window) if config.window else None
        latent = load_ground_truth(ground_truth_path) if ground_truth_path else None
        profiles = featurize_corpus(
            organizations,
            observations,
            tweets,
            incidents,
            window=window,
            latent_labels=latent,
        )
    except RecordError as exc:
        raise DataError(str(exc)) from exc
    except ValueError as exc:
        raise StageFailure("featurize", str(exc)) from exc
    features_path = workdir / "features.csv"
    write_features_csv(features_path, profiles)
    artifacts["features"] = features_path

    noise_report: NoiseReport | None = None
    if "denoise" not in skip:
        try:
            labels = [p.label for p in profiles]
            ids = [p.org_id for p in profiles]

            def oos(spec: ModelSpec):
                return out_of_sample_probabilities(
                    profiles, spec, k=config.denoise_folds, seed=config.seed
                )

            if config.jobs > 1:
                with ThreadPoolExecutor(max_workers=config.jobs) as pool:
                    prob_sets = list(pool.map(oos, config.denoise_models))
            else:
                prob_sets = [oos(spec) for spec in config.denoise_models]
            flagged = discover_noisy_negatives(
                prob_sets, labels, config.denoise_method, ids
            )
            profiles, noise_report = flip_labels(profiles, flagged, config.denoise_method)
        except ValueError as exc:
            raise StageFailure("denoise", str(exc)) from exc
        denoised_path = workdir / "features_denoised.csv"
        write_features_csv(denoised_path, profiles)
        noise_path = workdir / "noise_report.json"
        _dump_json(noise_path, noise_report.to_dict())
        artifacts["features_denoised"] = denoised_path
        artifacts["noise_report"] = noise_path

    try:
        train_set, test_set = split_train_test(
            profiles, config.split_fraction, seed=config.seed
        )
    except ValueError as exc:
        raise StageFailure("split", str(exc)) from exc
    train_path = workdir / "train.csv"
    test_path = workdir / "test.csv"
    write_features_csv(train_path, train_set)
    write_features_csv(test_path, test_set)
    artifacts["train"] = train_path
    artifacts["test"] = test_path

    models_dir = workdir / "models"
    trained: list[tuple[str, object]] = []
    stacked: StackedModel | None = None
    try:
        for spec in config.models:
            model = train(train_set, spec)
            path = models_dir / f"{spec.family}.json"
            save_model(model, path)
            artifacts[f"model:{spec.family}"] = path
            trained.append((spec.family, model))
        if config.stack_folds and len(config.models) >= 2:
            stacked = train_stacked(
                train_set, config.models, folds=config.stack_folds, seed=config.seed
            )
            stacked_path = models_dir / "stacked.json"
            save_stacked(stacked, stacked_path)
            artifacts["model:stacked"] = stacked_path
    except ValueError as exc:
        raise StageFailure("train", str(exc)) from exc

    evaluations: list[EvaluationReport] = []
    importance: ImportanceReport | None = None
    try:
        test_labels = [p.label for p in test_set]
        for family, model in trained:
            scores = predict_proba_many(model, test_set).tolist()
            evaluations.append(
                evaluate_scores(family, scores, test_labels, config.threshold)
            )
        if stacked is not None:
            scores = predict_stacked_many(stacked, test_set).tolist()
            stack_name = "stacked(" + "+".join(f for f, _ in trained) + ")"
            evaluations.append(
                evaluate_scores(stack_name, scores, test_labels, config.threshold)
            )
        if config.importance_repeats:
            final_model = stacked if stacked is not None else trained[-1][1]
            importance = permutation_importance(
                final_model, test_set, repeats=config.importance_repeats, seed=config.seed
            )
    except ValueError as exc:
        raise StageFailure("evaluate", str(exc)) from exc
    evaluations_path = workdir / "evaluations.json"
    _dump_json(
        evaluations_path,
        {"evaluations": [e.to_dict() for e in evaluations]},
    )
    artifacts["evaluations"] = evaluations_path

    label_policy = (
        NOISY_LABEL_POLICY if "denoise" in skip else CORRECTED_LABEL_POLICY
    )
    report = {
        "label_policy": label_policy,
        "seed": config.seed,
        "match": match_summary,
        "corpus": {
            "organizations": len(organizations),
            "observations": len(observations),
            "tweets": len(tweets),
            "incidents": len(incidents),
        },
        "labels": {
            "train": {
                "positive": sum(p.label for p in train_set),
                "negative": sum(1 - p.label for p in train_set),
            },
            "test": {
                "positive": sum(test_labels),
                "negative": len(test_labels) - sum(test_labels),
            },
        },
        "noise": noise_report.to_dict() if noise_report else None,
        "transition_note": (
            None
            if noise_report is None
            else "Q-hat is the simple column-normalized conditional; the "
            "row-normalized view is the count share within each true-label "
            "row (rows summing to 1)."
        ),
        "metrics": [e.to_dict() for e in evaluations],
        "importance": importance.to_dict() if importance else None,
    }
    report_json = workdir / "report.json"
    _dump_json(report_json, report)
    report_txt = workdir / "report.txt"
    report_txt.write_text(render_report_text(report), encoding="utf-8")
    artifacts["report_json"] = report_json
    artifacts["report_txt"] = report_txt
    return PipelineResult(workdir=workdir, report=report, artifacts=artifacts)


def _format_cell(value: object) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def _render_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    cells = [[_format_cell(v) for v in row] for row in rows]
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in cells)) if cells else len(headers[i])
        for i in range(len(headers))
    ]
    def line(parts: Sequence[str]) -> str:
        return "  ".join(part.ljust(widths[i]) for i, part in enumerate(parts)).rstrip()

    out = [line(headers), line(["-" * w for w in widths])]
    out.extend(line(row) for row in cells)
    return "\n".join(out)


def render_report_text(report: dict) -> str:
    """Human-readable mirror of report.json with fixed section order."""
    sections: list[str] = []
    sections.append(f"label policy: {report['label_policy']}")
    corpus = report["corpus"]
    sections.append(
        "corpus: {organizations} orgs, {observations} observations, "
        "{tweets} tweets, {incidents} incidents".format(**corpus)
    )
    if report["match"]:
        match_rows = [[k, v] for k, v in sorted(report["match"].items())]
        sections.append("name matching\n" + _render_table(["verdict", "count"], match_rows))
    labels = report["labels"]
    sections.append(
        "class counts\n"
        + _render_table(
            ["split", "positive", "negative"],
            [
                ["train", labels["train"]["positive"], labels["train"]["negative"]],
                ["test", labels["test"]["positive"], labels["test"]["negative"]],
            ],
        )
    )
    noise = report.get("noise")
    if noise:
        before = noise["before_counts"]
        after = noise["after_counts"]
        sections.append(
            "label correction ({})\n".format(noise["method"])
            + _render_table(
                ["", "negative", "positive"],
                [
                    ["before", before[0], before[1]],
                    ["after", after[0], after[1]],
                    ["flipped", len(noise["flipped_ids"]), ""],
                ],
            )
        )
        transition = noise["transition"]
        rows = []
        for i, row_name in enumerate(("given 0", "given 1")):
            rows.append(
                [
                    row_name,
                    transition["row_normalized"][i][0],
                    transition["row_normalized"][i][1],
                    transition["conditional"][i][0],
                    transition["conditional"][i][1],
                ]
            )
        sections.append(
            "noise transition (row-normalized | conditional)\n"
            + _render_table(
                ["", "row:true 0", "row:true 1", "cond:true 0", "cond:true 1"], rows
            )
        )
        if report.get("transition_note"):
            sections.append("note: " + report["transition_note"])
    metric_rows = [
        [m["model"], m["tpr"], m["fpr"], m["auc"], m["f1"], m["brier"]]
        for m in report["metrics"]
    ]
    sections.append(
        "test metrics (threshold {})\n".format(
            report["metrics"][0]["threshold"] if report["metrics"] else "-"
        )
        + _render_table(["model", "tpr", "fpr", "auc", "f1", "brier"], metric_rows)
    )
    importance = report.get("importance")
    if importance:
        share_rows = [
            [category, importance["category_shares"][category]]
            for category in ("technical", "twitter", "sector", "org_size")
        ]
        sections.append(
            "feature importance by category (model {}, baseline AUC {:.4f})\n".format(
                importance["model"], importance["baseline_auc"]
            )
            + _render_table(["category", "share %"], share_rows)
        )
    return "\n\n".join(sections) + "\n"
