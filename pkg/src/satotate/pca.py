"""Covariance PCA for projecting coefficient feature matrices."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


@dataclass
class PCAModel:
    mean: np.ndarray  # (d,)
    components: np.ndarray  # (k, d), orthonormal rows
    explained_variance: np.ndarray  # (k,), descending
    rank_deficient: bool = False

    @property
    def k(self) -> int:
        return len(self.components)


def fit(features, k: int) -> PCAModel:
    """Top-``k`` eigenvectors of the sample covariance (ddof=1).

    Each component is signed so that its largest-magnitude entry is positive.
    If ``k`` exceeds the rank, the surplus components still come from the
    eigenbasis of the covariance (so remain orthonormal) and carry variance 0.
    """
    X = np.atleast_2d(np.asarray(features, dtype=float))
    n, d = X.shape
    if not 1 <= k <= min(n, d):
        raise ValueError(f"k must lie in [1, {min(n, d)}]")
    mean = X.mean(axis=0)
    Y = X - mean
    cov = Y.T @ Y / max(n - 1, 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(-evals, kind="stable")[:k]
    evals = np.clip(evals[order], 0.0, None)
    comps = evecs[:, order].T.copy()
    for row in comps:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1
    tol = max(evals[0], 1.0) * d * np.finfo(float).eps * 10 if k else 0.0
    small = evals <= tol
    evals[small] = 0.0
    if small.any():
        log.warning("k=%d exceeds the numerical rank; %d padded components", k, int(small.sum()))
    return PCAModel(mean, comps, evals, bool(small.any()))


def transform(model: PCAModel, features) -> np.ndarray:
    X = np.atleast_2d(np.asarray(features, dtype=float))
    if X.shape[1] != len(model.mean):
        raise ValueError(f"expected {len(model.mean)} columns, got {X.shape[1]}")
    return (X - model.mean) @ model.components.T


def reconstruction_error(model: PCAModel, features) -> float:
    """Mean squared distance between rows and their rank-k reconstruction."""
    X = np.atleast_2d(np.asarray(features, dtype=float))
    Z = transform(model, X)
    R = Z @ model.components + model.mean
    return float(np.mean(np.sum((X - R) ** 2, axis=1)))
