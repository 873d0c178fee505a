"""Noisy-negative discovery and correction via confident learning.

Negatives are the suspect class: an organization labeled 0 may simply
have an unreported breach, while positives are documented incidents.
Out-of-sample probabilities feed either a confident joint (per-class
expected-self-confidence thresholds) or a plain 0.5 confusion matrix;
examples confidently asserted positive while labeled negative get their
labels flipped, never pruned, and never in the 1 -> 0 direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import FeatureVector
from .models.api import ModelSpec
from .models.folds import out_of_fold_probabilities, stratified_fold_assignments

CONFIDENT_JOINT = "confident_joint"
CONFUSION_MATRIX = "confusion_matrix"
METHODS = (CONFIDENT_JOINT, CONFUSION_MATRIX)

Matrix2x2 = tuple[tuple[float, float], tuple[float, float]]


@dataclass(frozen=True, slots=True)
class OOSProbabilities:
    """Class-1 probabilities where no example was scored by its own model."""

    probabilities: tuple[float, ...]
    fold_assignments: tuple[int, ...]
    model: str

    def __post_init__(self) -> None:
        if len(self.probabilities) != len(self.fold_assignments):
            raise ValueError("probabilities and fold assignments differ in length")
        for p in self.probabilities:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability out of [0, 1]: {p!r}")


@dataclass(frozen=True, slots=True)
class ClassThresholds:
    """Expected self-confidence per class: mean p-hat(j) over examples labeled j."""

    class0: float
    class1: float


@dataclass(frozen=True, slots=True)
class JointMatrix:
    """2x2 counts of (given label, asserted label) pairs."""

    counts: tuple[tuple[int, int], tuple[int, int]]
    tag: str

    def __post_init__(self) -> None:
        if self.tag not in METHODS:
            raise ValueError(f"tag must be one of {METHODS}: {self.tag!r}")
        for row in self.counts:
            for entry in row:
                if entry < 0:
                    raise ValueError("joint counts must be non-negative")

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def to_dict(self) -> dict:
        return {"counts": [list(row) for row in self.counts], "tag": self.tag}

    @classmethod
    def from_dict(cls, data: dict) -> JointMatrix:
        return cls(
            counts=tuple(tuple(int(v) for v in row) for row in data["counts"]),
            tag=data["tag"],
        )


def _matrix_to_lists(matrix: Matrix2x2) -> list[list[float | None]]:
    return [[None if math.isnan(v) else v for v in row] for row in matrix]


def _matrix_from_lists(rows: list) -> Matrix2x2:
    return tuple(tuple(math.nan if v is None else float(v) for v in row) for row in rows)


@dataclass(frozen=True, slots=True)
class TransitionEstimate:
    """Noise transition views of one joint matrix.

    conditional follows the composite recipe: row-normalize, rescale each
    row by its class count, column-normalize. simple_conditional is the
    direct column normalization; the two coincide whenever the class
    counts equal the row sums. row_normalized divides each row by its own
    sum, and is the only view that reproduces the published conditional
    table, whose rows sum to 1. Undefined rows/columns (all-zero) hold
    NaN and are listed rather than fabricated.
    """

    conditional: Matrix2x2
    simple_conditional: Matrix2x2
    row_normalized: Matrix2x2
    label_counts: tuple[int, int]
    undefined_columns: tuple[int, ...]
    undefined_rows: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "conditional": _matrix_to_lists(self.conditional),
            "simple_conditional": _matrix_to_lists(self.simple_conditional),
            "row_normalized": _matrix_to_lists(self.row_normalized),
            "label_counts": list(self.label_counts),
            "undefined_columns": list(self.undefined_columns),
            "undefined_rows": list(self.undefined_rows),
        }

    @classmethod
    def from_dict(cls, data: dict) -> TransitionEstimate:
        return cls(
            conditional=_matrix_from_lists(data["conditional"]),
            simple_conditional=_matrix_from_lists(data["simple_conditional"]),
            row_normalized=_matrix_from_lists(data["row_normalized"]),
            label_counts=tuple(int(v) for v in data["label_counts"]),
            undefined_columns=tuple(int(v) for v in data["undefined_columns"]),
            undefined_rows=tuple(int(v) for v in data["undefined_rows"]),
        )


@dataclass(frozen=True, slots=True)
class NoiseReport:
    """Everything a correction run asserted: joint, transition, flips."""

    joint: JointMatrix
    transition: TransitionEstimate
    flipped_ids: tuple[str, ...]
    before_counts: tuple[int, int]
    after_counts: tuple[int, int]
    method: str

    def to_dict(self) -> dict:
        return {
            "joint": self.joint.to_dict(),
            "transition": self.transition.to_dict(),
            "flipped_ids": list(self.flipped_ids),
            "before_counts": list(self.before_counts),
            "after_counts": list(self.after_counts),
            "method": self.method,
        }

    @classmethod
    def from_dict(cls, data: dict) -> NoiseReport:
        return cls(
            joint=JointMatrix.from_dict(data["joint"]),
            transition=TransitionEstimate.from_dict(data["transition"]),
            flipped_ids=tuple(data["flipped_ids"]),
            before_counts=tuple(int(v) for v in data["before_counts"]),
            after_counts=tuple(int(v) for v in data["after_counts"]),
            method=data["method"],
        )


def _probability_list(probs: OOSProbabilities | Sequence[float]) -> list[float]:
    if isinstance(probs, OOSProbabilities):
        return list(probs.probabilities)
    return [float(p) for p in probs]


def out_of_sample_probabilities(
    dataset: Sequence[FeatureVector],
    model_spec: ModelSpec,
    k: int = 5,
    seed: int = 0,
) -> OOSProbabilities:
    """Stratified k-fold probabilities: each example scored out-of-fold."""
    labels = [p.label for p in dataset]
    assignments = stratified_fold_assignments(labels, k, seed)
    probabilities = out_of_fold_probabilities(
        dataset, model_spec, folds=k, seed=seed, assignments=assignments
    )
    return OOSProbabilities(
        probabilities=tuple(float(p) for p in probabilities),
        fold_assignments=tuple(int(a) for a in assignments),
        model=model_spec.family,
    )


def self_confidence_thresholds(
    probs: OOSProbabilities | Sequence[float], labels: Sequence[int]
) -> ClassThresholds:
    """t_j = mean predicted probability of class j over examples labeled j."""
    p1 = _probability_list(probs)
    if len(p1) != len(labels):
        raise ValueError("probabilities and labels differ in length")
    class1 = [p for p, label in zip(p1, labels) if label == 1]
    class0 = [1.0 - p for p, label in zip(p1, labels) if label == 0]
    if not class0 or not class1:
        raise ValueError("empty class: thresholds need examples of both labels")
    return ClassThresholds(
        class0=sum(class0) / len(class0), class1=sum(class1) / len(class1)
    )


def _assert_cell(p1: float, label: int, t0: float, t1: float) -> tuple[int, int] | None:
    p0 = 1.0 - p1
    meets0 = p0 >= t0
    meets1 = p1 >= t1
    if meets0 and meets1:
        asserted = 1 if p1 >= p0 else 0
    elif meets1:
        asserted = 1
    elif meets0:
        asserted = 0
    else:
        return None
    return label, asserted


def confident_joint(
    probs: OOSProbabilities | Sequence[float],
    labels: Sequence[int],
    thresholds: ClassThresholds,
) -> JointMatrix:
    """Count (given, asserted) pairs under per-class confidence thresholds.

    An example is asserted class j when p-hat(j) clears t_j; clearing both
    resolves by argmax with the exact tie going to class 1, and clearing
    neither leaves the example uncounted.
    """
    p1_list = _probability_list(probs)
    if len(p1_list) != len(labels):
        raise ValueError("probabilities and labels differ in length")
    counts = [[0, 0], [0, 0]]
    for p1, label in zip(p1_list, labels):
        cell = _assert_cell(p1, label, thresholds.class0, thresholds.class1)
        if cell is not None:
            counts[cell[0]][cell[1]] += 1
    return JointMatrix(
        counts=tuple(tuple(row) for row in counts), tag=CONFIDENT_JOINT
    )


def confusion_matrix_at_half(
    probs: OOSProbabilities | Sequence[float], labels: Sequence[int]
) -> JointMatrix:
    """Plain confusion matrix: asserted class is the probability rounded at 0.5."""
    p1_list = _probability_list(probs)
    if len(p1_list) != len(labels):
        raise ValueError("probabilities and labels differ in length")
    counts = [[0, 0], [0, 0]]
    for p1, label in zip(p1_list, labels):
        counts[label][1 if p1 >= 0.5 else 0] += 1
    return JointMatrix(
        counts=tuple(tuple(row) for row in counts), tag=CONFUSION_MATRIX
    )


def noise_transition_matrix(
    joint: JointMatrix, label_counts: tuple[int, int] | None = None
) -> TransitionEstimate:
    """Estimate label-noise transition probabilities from a joint matrix.

    label_counts defaults to the joint's row sums, the natural choice for
    a confusion matrix that counts every example. All three views are
    computed; see TransitionEstimate for which satisfies which sum rule.
    """
    Z = np.array(joint.counts, dtype=np.float64)
    row_sums = Z.sum(axis=1)
    if not row_sums.any():
        raise ValueError("joint matrix has no nonzero row")
    if label_counts is None:
        label_counts = (int(row_sums[0]), int(row_sums[1]))

    row_normalized = np.full((2, 2), np.nan)
    undefined_rows = []
    for i in range(2):
        if row_sums[i] > 0:
            row_normalized[i] = Z[i] / row_sums[i]
        else:
            undefined_rows.append(i)

    col_sums = Z.sum(axis=0)
    simple = np.full((2, 2), np.nan)
    undefined_columns = []
    for j in range(2):
        if col_sums[j] > 0:
            simple[:, j] = Z[:, j] / col_sums[j]
        else:
            undefined_columns.append(j)

    rescaled = np.full((2, 2), np.nan)
    for i in range(2):
        if row_sums[i] > 0:
            rescaled[i] = (Z[i] / row_sums[i]) * label_counts[i]
        else:
            rescaled[i] = 0.0
    composite = np.full((2, 2), np.nan)
    for j in range(2):
        total = rescaled[:, j].sum()
        if total > 0:
            composite[:, j] = rescaled[:, j] / total
    composite[:, undefined_columns] = np.nan

    def freeze(matrix: np.ndarray) -> Matrix2x2:
        return tuple(tuple(float(v) for v in row) for row in matrix)

    return TransitionEstimate(
        conditional=freeze(composite),
        simple_conditional=freeze(simple),
        row_normalized=freeze(row_normalized),
        label_counts=label_counts,
        undefined_columns=tuple(undefined_columns),
        undefined_rows=tuple(undefined_rows),
    )


def discover_noisy_negatives(
    prob_sets: Sequence[OOSProbabilities | Sequence[float]],
    labels: Sequence[int],
    method: str = CONFUSION_MATRIX,
    ids: Sequence[str] | None = None,
) -> list[str]:
    """Flag negatives the model ensemble confidently asserts positive.

    The ensemble probability is the unweighted mean across prob_sets.
    Returns ids ordered by descending ensemble probability (input order
    breaks exact ties), so the most suspicious labels come first.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}: {method!r}")
    if not prob_sets:
        raise ValueError("need at least one probability set")
    lists = [_probability_list(p) for p in prob_sets]
    lengths = {len(p) for p in lists} | {len(labels)}
    if len(lengths) != 1:
        raise ValueError("misaligned probability sets")
    if ids is None:
        ids = [str(i) for i in range(len(labels))]
    elif len(ids) != len(labels):
        raise ValueError("misaligned probability sets")
    ensemble = [sum(column) / len(lists) for column in zip(*lists)]
    if method == CONFIDENT_JOINT:
        thresholds = self_confidence_thresholds(ensemble, labels)
        t0, t1 = thresholds.class0, thresholds.class1
        flagged = [
            i
            for i, (p1, label) in enumerate(zip(ensemble, labels))
            if label == 0 and _assert_cell(p1, label, t0, t1) == (0, 1)
        ]
    else:
        flagged = [
            i
            for i, (p1, label) in enumerate(zip(ensemble, labels))
            if label == 0 and p1 >= 0.5
        ]
    flagged.sort(key=lambda i: (-ensemble[i], i))
    return [ids[i] for i in flagged]


def flip_labels(
    dataset: Sequence[FeatureVector],
    ids: Sequence[str],
    method: str = CONFUSION_MATRIX,
) -> tuple[list[FeatureVector], NoiseReport]:
    """Relabel the given negatives as positives and account for it.

    Features are untouched and positives may never be flipped. The
    report's joint holds the flip-implied counts (kept negatives,
    flipped negatives, original positives), from which the transition
    views follow.
    """
    id_set = set(ids)
    if len(id_set) != len(ids):
        raise ValueError("duplicate ids in flip set")
    by_id = {profile.org_id: profile for profile in dataset}
    for org_id in ids:
        if org_id not in by_id:
            raise ValueError(f"unknown org_id {org_id!r}")
        if by_id[org_id].label == 1:
            raise ValueError(f"cannot flip positive: {org_id!r}")
    n_pos_before = sum(p.label for p in dataset)
    n_neg_before = len(dataset) - n_pos_before
    corrected = [
        profile.with_label(1) if profile.org_id in id_set else profile
        for profile in dataset
    ]
    n_flipped = len(id_set)
    joint = JointMatrix(
        counts=((n_neg_before - n_flipped, n_flipped), (0, n_pos_before)),
        tag=method,
    )
    transition = noise_transition_matrix(joint, (n_neg_before, n_pos_before))
    report = NoiseReport(
        joint=joint,
        transition=transition,
        flipped_ids=tuple(ids),
        before_counts=(n_neg_before, n_pos_before),
        after_counts=(n_neg_before - n_flipped, n_pos_before + n_flipped),
        method=method,
    )
    return corrected, report


@dataclass(frozen=True, slots=True)
class ExperimentRow:
    """Mean detection accuracy for one model combination and method."""

    models: tuple[str, ...]
    method: str
    accuracies: tuple[float, ...]

    @property
    def mean_accuracy(self) -> float:
        return sum(self.accuracies) / len(self.accuracies)

    def to_dict(self) -> dict:
        return {
            "models": list(self.models),
            "method": self.method,
            "accuracies": list(self.accuracies),
            "mean_accuracy": self.mean_accuracy,
        }


@dataclass(frozen=True, slots=True)
class NoiseExperimentResult:
    rows: tuple[ExperimentRow, ...]
    flip_fraction: float
    repeats: int
    folds: int

    def mean_accuracy(self, models: tuple[str, ...], method: str) -> float:
        for row in self.rows:
            if row.models == models and row.method == method:
                return row.mean_accuracy
        raise KeyError(f"no row for {models!r} with method {method!r}")

    def to_dict(self) -> dict:
        return {
            "rows": [row.to_dict() for row in self.rows],
            "flip_fraction": self.flip_fraction,
            "repeats": self.repeats,
            "folds": self.folds,
        }


def noise_detection_experiment(
    dataset: Sequence[FeatureVector],
    model_specs: Sequence[ModelSpec],
    flip_fraction: float = 0.1,
    repeats: int = 10,
    method: str | None = None,
    folds: int = 5,
    seed: int = 0,
) -> NoiseExperimentResult:
    """Hide disjoint slices of positives and measure how many come back.

    Each repeat relabels floor(flip_fraction * N_pos) positives as
    negatives, estimates out-of-sample probabilities per model on the
    corrupted corpus, and scores every model plus the all-model ensemble:
    accuracy is the recovered fraction of the hidden slice. method=None
    evaluates both discovery methods.
    """
    from .synth import inject_label_noise

    methods = METHODS if method is None else (method,)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"method must be one of {METHODS}: {m!r}")
    if not model_specs:
        raise ValueError("need at least one model spec")
    combos: list[tuple[int, ...]] = [(i,) for i in range(len(model_specs))]
    if len(model_specs) > 1:
        combos.append(tuple(range(len(model_specs))))
    names = {
        combo: tuple(model_specs[i].family for i in combo) for combo in combos
    }
    accumulator: dict[tuple[tuple[str, ...], str], list[float]] = {
        (names[combo], m): [] for combo in combos for m in methods
    }
    for repeat in range(repeats):
        corrupted, hidden_ids = inject_label_noise(
            dataset, flip_fraction, seed=seed, partition=(repeat, repeats)
        )
        labels = [p.label for p in corrupted]
        ids = [p.org_id for p in corrupted]
        prob_sets = [
            out_of_sample_probabilities(corrupted, spec, k=folds, seed=seed + repeat)
            for spec in model_specs
        ]
        hidden = set(hidden_ids)
        for combo in combos:
            members = [prob_sets[i] for i in combo]
            for m in methods:
                flagged = set(discover_noisy_negatives(members, labels, m, ids))
                accuracy = len(flagged & hidden) / len(hidden)
                accumulator[(names[combo], m)].append(accuracy)
    rows = tuple(
        ExperimentRow(models=combo, method=m, accuracies=tuple(values))
        for (combo, m), values in accumulator.items()
    )
    return NoiseExperimentResult(
        rows=rows, flip_fraction=flip_fraction, repeats=repeats, folds=folds
    )
