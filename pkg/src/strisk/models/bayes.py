"""Gaussian naive Bayes over the encoded feature matrix."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class GaussianNaiveBayes:
    """Per-class diagonal Gaussians with a variance floor.

    The floor is var_smoothing times the largest overall feature variance
    (or var_smoothing itself when everything is constant), keeping
    log-densities finite on constant or one-hot columns.
    """

    var_smoothing: float = 1e-9
    log_prior: np.ndarray | None = None
    means: np.ndarray | None = None
    variances: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> GaussianNaiveBayes:
        if self.var_smoothing <= 0:
            raise ValueError("var_smoothing must be positive")
        classes = (0, 1)
        counts = np.array([np.sum(y == c) for c in classes], dtype=np.float64)
        self.log_prior = np.log(counts / counts.sum())
        self.means = np.vstack([X[y == c].mean(axis=0) for c in classes])
        raw_var = np.vstack([X[y == c].var(axis=0) for c in classes])
        overall = float(X.var(axis=0).max())
        epsilon = self.var_smoothing * overall if overall > 0 else self.var_smoothing
        self.variances = raw_var + epsilon
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        joint = np.empty((len(X), 2))
        for c in (0, 1):
            diff = X - self.means[c]
            log_like = -0.5 * np.sum(
                np.log(2.0 * np.pi * self.variances[c]) + diff * diff / self.variances[c],
                axis=1,
            )
            joint[:, c] = self.log_prior[c] + log_like
        shifted = joint - joint.max(axis=1, keepdims=True)
        likes = np.exp(shifted)
        return likes[:, 1] / likes.sum(axis=1)

    def to_params(self) -> dict:
        return {
            "var_smoothing": self.var_smoothing,
            "log_prior": self.log_prior.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }

    @classmethod
    def from_params(cls, data: dict) -> GaussianNaiveBayes:
        model = cls(var_smoothing=data["var_smoothing"])
        model.log_prior = np.asarray(data["log_prior"], dtype=np.float64)
        model.means = np.asarray(data["means"], dtype=np.float64)
        model.variances = np.asarray(data["variances"], dtype=np.float64)
        return model
