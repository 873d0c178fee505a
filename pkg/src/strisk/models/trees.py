"""Depth-limited regression trees used by every tree-based family.

Targets are arbitrary reals (0/1 class labels for bagging, gradient
residuals for boosting); splits minimize within-node squared error via
prefix sums over each candidate feature, which for binary targets is the
classic impurity criterion. Trees are stored as flat parallel arrays so
prediction routes whole index blocks per node instead of walking rows
one at a time.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_LEAF = -1


@dataclass
class RegressionTree:
    """CART-style tree; fit() populates the flat node arrays.

    feature[i] is _LEAF for leaves; left/right hold child node indices.
    Ties between equally good splits resolve to the earliest feature and
    lowest threshold, making structure deterministic for a fixed rng.
    """

    max_depth: int = 3
    min_samples_leaf: int = 1
    max_features: int | None = None
    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)

    def fit(
        self, X: np.ndarray, y: np.ndarray, rng: np.random.Generator | None = None
    ) -> RegressionTree:
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        self.feature, self.threshold = [], []
        self.left, self.right, self.value = [], [], []
        self._grow(X, y, np.arange(len(y)), depth=0, rng=rng)
        return self

    def _new_node(self, mean: float) -> int:
        self.feature.append(_LEAF)
        self.threshold.append(0.0)
        self.left.append(_LEAF)
        self.right.append(_LEAF)
        self.value.append(mean)
        return len(self.feature) - 1

    def _grow(
        self,
        X: np.ndarray,
        y: np.ndarray,
        idx: np.ndarray,
        depth: int,
        rng: np.random.Generator | None,
    ) -> int:
        node = self._new_node(float(y[idx].mean()))
        if depth >= self.max_depth or len(idx) < 2 * self.min_samples_leaf:
            return node
        target = y[idx]
        if np.ptp(target) == 0.0:
            return node
        n_features = X.shape[1]
        if self.max_features is not None and self.max_features < n_features:
            if rng is None:
                raise ValueError("feature subsampling needs an rng")
            candidates = np.sort(
                rng.choice(n_features, size=self.max_features, replace=False)
            )
        else:
            candidates = np.arange(n_features)
        best = self._best_split(X, target, idx, candidates)
        if best is None:
            return node
        feature_id, cut = best
        goes_left = X[idx, feature_id] <= cut
        self.feature[node] = int(feature_id)
        self.threshold[node] = float(cut)
        self.left[node] = self._grow(X, y, idx[goes_left], depth + 1, rng)
        self.right[node] = self._grow(X, y, idx[~goes_left], depth + 1, rng)
        return node

    def _best_split(
        self,
        X: np.ndarray,
        target: np.ndarray,
        idx: np.ndarray,
        candidates: np.ndarray,
    ) -> tuple[int, float] | None:
        n = len(idx)
        min_leaf = self.min_samples_leaf
        best_sse = np.inf
        best: tuple[int, float] | None = None
        for feature_id in candidates:
            column = X[idx, feature_id]
            order = np.argsort(column, kind="stable")
            xs = column[order]
            ys = target[order]
            prefix = np.cumsum(ys)
            prefix_sq = np.cumsum(ys * ys)
            total, total_sq = prefix[-1], prefix_sq[-1]
            sizes = np.arange(1, n)
            valid = xs[:-1] < xs[1:]
            valid &= (sizes >= min_leaf) & (n - sizes >= min_leaf)
            if not valid.any():
                continue
            left_sum, left_sq = prefix[:-1], prefix_sq[:-1]
            sse_left = left_sq - left_sum * left_sum / sizes
            right_sum = total - left_sum
            right_sq = total_sq - left_sq
            sse_right = right_sq - right_sum * right_sum / (n - sizes)
            sse = np.where(valid, sse_left + sse_right, np.inf)
            pos = int(np.argmin(sse))
            if sse[pos] < best_sse:
                cut = (xs[pos] + xs[pos + 1]) / 2.0
                # Adjacent floats can round the midpoint up onto xs[pos+1],
                # which would route every row left; pin to the lower value.
                if cut >= xs[pos + 1]:
                    cut = xs[pos]
                best_sse = float(sse[pos])
                best = (int(feature_id), float(cut))
        return best

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index for each row, routed block-wise per node."""
        leaves = np.zeros(len(X), dtype=np.int64)
        stack = [(0, np.arange(len(X)))]
        while stack:
            node, idx = stack.pop()
            if self.feature[node] == _LEAF:
                leaves[idx] = node
                continue
            goes_left = X[idx, self.feature[node]] <= self.threshold[node]
            stack.append((self.left[node], idx[goes_left]))
            stack.append((self.right[node], idx[~goes_left]))
        return leaves

    def predict(self, X: np.ndarray) -> np.ndarray:
        values = np.asarray(self.value)
        return values[self.apply(X)]

    def set_leaf_values(self, leaf_ids: np.ndarray, values: np.ndarray) -> None:
        """Overwrite leaf outputs (boosting recomputes them after growth)."""
        for leaf, value in zip(leaf_ids, values):
            if self.feature[leaf] != _LEAF:
                raise ValueError(f"node {leaf} is not a leaf")
            self.value[leaf] = float(value)

    def leaf_ids(self) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.feature) == _LEAF)

    def to_params(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
            "feature": list(self.feature),
            "threshold": list(self.threshold),
            "left": list(self.left),
            "right": list(self.right),
            "value": list(self.value),
        }

    @classmethod
    def from_params(cls, data: dict) -> RegressionTree:
        return cls(**data)
