"""Profile-to-matrix encoding shared by every model family.

The column layout is fixed: technical features, social features,
org_size, then one sector indicator per known sector in registry order.
A sha256 fingerprint of that layout travels with every serialized model
so a model never scores vectors laid out differently.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..features import SOCIAL_FEATURES, TECHNICAL_FEATURES, FeatureVector
from ..records import SECTORS

SCHEMA_VERSION = 1

NUMERIC_COLUMNS: tuple[str, ...] = TECHNICAL_FEATURES + SOCIAL_FEATURES + ("org_size",)
SECTOR_COLUMNS: tuple[str, ...] = tuple(f"sector={name}" for name in SECTORS)


@dataclass(frozen=True, slots=True)
class FeatureSchema:
    """Column layout of the encoded design matrix."""

    columns: tuple[str, ...]
    version: int = SCHEMA_VERSION

    @property
    def fingerprint(self) -> str:
        payload = json.dumps(
            {"columns": list(self.columns), "version": self.version}, sort_keys=True
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "columns": list(self.columns),
            "version": self.version,
            "fingerprint": self.fingerprint,
        }

    @classmethod
    def from_dict(cls, data: dict) -> FeatureSchema:
        schema = cls(columns=tuple(data["columns"]), version=data["version"])
        stored = data.get("fingerprint")
        if stored is not None and stored != schema.fingerprint:
            raise ValueError("schema fingerprint does not match its columns")
        return schema


def default_schema() -> FeatureSchema:
    return FeatureSchema(columns=NUMERIC_COLUMNS + SECTOR_COLUMNS)


def encode_profiles(
    profiles: Sequence[FeatureVector], schema: FeatureSchema | None = None
) -> np.ndarray:
    """Encode profiles as a float64 matrix in schema column order.

    Unknown sectors and non-finite feature values are hard errors: a
    silently zeroed row would score as a real organization.
    """
    schema = schema or default_schema()
    if schema.columns != NUMERIC_COLUMNS + SECTOR_COLUMNS:
        raise ValueError("unsupported schema layout")
    sector_index = {name: i for i, name in enumerate(SECTORS)}
    n_numeric = len(NUMERIC_COLUMNS)
    matrix = np.zeros((len(profiles), len(schema.columns)), dtype=np.float64)
    for row, profile in enumerate(profiles):
        values = profile.numeric_values() + (float(profile.org_size),)
        matrix[row, :n_numeric] = values
        if profile.sector not in sector_index:
            raise ValueError(f"unknown sector {profile.sector!r}")
        matrix[row, n_numeric + sector_index[profile.sector]] = 1.0
    if not np.isfinite(matrix).all():
        raise ValueError("non-finite feature")
    return matrix


def encode_labels(profiles: Sequence[FeatureVector]) -> np.ndarray:
    return np.array([p.label for p in profiles], dtype=np.int64)


def standardize_fit(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and scales from training data; constant columns get scale 1."""
    mean = matrix.mean(axis=0)
    scale = matrix.std(axis=0)
    scale[scale == 0.0] = 1.0
    return mean, scale


def standardize_apply(
    matrix: np.ndarray, mean: np.ndarray, scale: np.ndarray
) -> np.ndarray:
    return (matrix - mean) / scale
