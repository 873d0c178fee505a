"""Permutation feature importance with per-category rollups.

Importance of a feature is the mean AUC lost when its values are
shuffled across organizations. The sector indicator columns move as one
block, since shuffling them independently would fabricate impossible
multi-sector rows.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..evaluation import roc_auc
from ..features import SOCIAL_FEATURES, TECHNICAL_FEATURES, FeatureVector
from .api import TrainedModel
from .encode import NUMERIC_COLUMNS, SECTOR_COLUMNS, default_schema, encode_labels, encode_profiles
from .stacking import StackedModel

IMPORTANCE_CATEGORIES: tuple[str, ...] = ("technical", "twitter", "sector", "org_size")

_FEATURE_NAMES: tuple[str, ...] = TECHNICAL_FEATURES + SOCIAL_FEATURES + ("org_size", "sector")


@dataclass(frozen=True, slots=True)
class ImportanceReport:
    model: str
    baseline_auc: float
    repeats: int
    per_feature: dict[str, float]
    category_shares: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "baseline_auc": self.baseline_auc,
            "repeats": self.repeats,
            "per_feature": dict(self.per_feature),
            "category_shares": dict(self.category_shares),
        }

    @classmethod
    def from_dict(cls, data: dict) -> ImportanceReport:
        return cls(
            model=data["model"],
            baseline_auc=data["baseline_auc"],
            repeats=data["repeats"],
            per_feature=dict(data["per_feature"]),
            category_shares=dict(data["category_shares"]),
        )


def _matrix_scorer(model: TrainedModel | StackedModel):
    if isinstance(model, StackedModel):
        base_impls = [base.impl for base in model.bases]

        def score(X: np.ndarray) -> np.ndarray:
            base_probs = np.column_stack(
                [np.clip(impl.predict_proba(X), 0.0, 1.0) for impl in base_impls]
            )
            return model.meta.predict_proba(base_probs)

        return score, f"stacked({'+'.join(b.spec.family for b in model.bases)})"
    return model.impl.predict_proba, model.spec.family


def _columns_for(feature: str) -> list[int]:
    if feature == "sector":
        start = len(NUMERIC_COLUMNS)
        return list(range(start, start + len(SECTOR_COLUMNS)))
    return [NUMERIC_COLUMNS.index(feature)]


def permutation_importance(
    model: TrainedModel | StackedModel,
    dataset: Sequence[FeatureVector],
    repeats: int = 5,
    seed: int = 0,
) -> ImportanceReport:
    """Mean AUC drop per shuffled feature, clipped at zero.

    Category shares divide the summed importances of technical features,
    social (twitter) features, sector, and organization size by the grand
    total, scaled to percent. A model with nothing to lose anywhere
    reports all-zero shares rather than dividing by zero.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    scorer, model_name = _matrix_scorer(model)
    X = encode_profiles(dataset, default_schema())
    y = encode_labels(dataset)
    baseline = roc_auc(scorer(X).tolist(), y.tolist())
    rng = np.random.default_rng(seed)
    per_feature: dict[str, float] = {}
    for feature in _FEATURE_NAMES:
        columns = _columns_for(feature)
        drops = []
        for _ in range(repeats):
            permutation = rng.permutation(len(dataset))
            shuffled = X.copy()
            shuffled[:, columns] = X[np.ix_(permutation, columns)]
            drops.append(baseline - roc_auc(scorer(shuffled).tolist(), y.tolist()))
        per_feature[feature] = max(0.0, float(np.mean(drops)))
    sums = {
        "technical": sum(per_feature[name] for name in TECHNICAL_FEATURES),
        "twitter": sum(per_feature[name] for name in SOCIAL_FEATURES),
        "sector": per_feature["sector"],
        "org_size": per_feature["org_size"],
    }
    total = sum(sums.values())
    shares = {
        category: (100.0 * value / total if total > 0 else 0.0)
        for category, value in sums.items()
    }
    return ImportanceReport(
        model=model_name,
        baseline_auc=float(baseline),
        repeats=repeats,
        per_feature=per_feature,
        category_shares=shares,
    )
