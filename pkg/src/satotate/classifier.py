"""Naive Bayes classification with accuracy / Matthews phi evaluation.

The per-feature class likelihood is Gaussian by default.  A binned
kernel-density likelihood (``likelihood="kde"``) is available for tasks
where the classes share their first two moments feature by feature.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.special import logsumexp

log = logging.getLogger(__name__)

VAR_SMOOTHING = 1e-9
LIKELIHOODS = ("gaussian", "kde")
KDE_GRID = 256
# weight of the uniform component mixed into every kernel density
KDE_UNIFORM = 1e-3


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str] | None = None

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        self.labels = np.asarray(self.labels).astype(str)
        if self.features.shape[0] != len(self.labels):
            raise ValueError("features and labels disagree on the number of rows")
        if self.features.shape[1] < 1:
            raise ValueError("dataset needs at least one feature")
        if np.isnan(self.features).any():
            raise ValueError("dataset contains missing values")

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, rows) -> Dataset:
        return Dataset(self.features[rows], self.labels[rows], self.feature_names)

    def prefix(self, ncols: int) -> Dataset:
        names = None if self.feature_names is None else self.feature_names[:ncols]
        return Dataset(self.features[:, :ncols], self.labels, names)


@dataclass
class NBModel:
    classes: list[str]
    priors: np.ndarray
    means: np.ndarray  # (k, d)
    variances: np.ndarray  # (k, d), floor already added
    variance_floor: float
    feature_names: list[str] | None = None
    degenerate: bool = False
    likelihood: str = "gaussian"
    # kde only: per-feature grid bounds and (k, d, G) log densities on the grid
    grid_lo: np.ndarray | None = None
    grid_hi: np.ndarray | None = None
    log_density: np.ndarray | None = None

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def to_json(self) -> str:
        d = {
            "classes": self.classes,
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "variance_floor": self.variance_floor,
            "feature_names": self.feature_names,
            "likelihood": self.likelihood,
        }
        if self.likelihood == "kde":
            d["grid_lo"] = self.grid_lo.tolist()
            d["grid_hi"] = self.grid_hi.tolist()
            d["log_density"] = self.log_density.tolist()
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> NBModel:
        d = json.loads(text)
        kde = d.get("likelihood", "gaussian") == "kde"
        return cls(
            classes=list(d["classes"]),
            priors=np.array(d["priors"], dtype=float),
            means=np.array(d["means"], dtype=float),
            variances=np.array(d["variances"], dtype=float),
            variance_floor=float(d["variance_floor"]),
            feature_names=d.get("feature_names"),
            degenerate=len(d["classes"]) < 2,
            likelihood=d.get("likelihood", "gaussian"),
            grid_lo=np.array(d["grid_lo"]) if kde else None,
            grid_hi=np.array(d["grid_hi"]) if kde else None,
            log_density=np.array(d["log_density"]) if kde else None,
        )


@dataclass
class EvalReport:
    classes: list[str]
    accuracy: float
    phi: float
    confusion: np.ndarray  # rows true, columns predicted
    precision: list[float] = field(default_factory=list)
    recall: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "phi": self.phi,
            "classes": self.classes,
            "confusion": self.confusion.tolist(),
            "per_class_precision_recall": {
                c: {"precision": p, "recall": r} for c, p, r in zip(self.classes, self.precision, self.recall)
            },
        }


def split(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified random train/validation split.

    Each class contributes round(train_fraction * n_class) rows to training
    (at least one, and at least one left for validation when possible).
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    train_rows, val_rows = [], []
    for c in np.unique(dataset.labels):
        rows = np.flatnonzero(dataset.labels == c)
        if len(rows) < 2:
            warnings.warn(f"class {c!r} has fewer than 2 members; kept in training", stacklevel=2)
            train_rows.extend(rows)
            continue
        rows = rng.permutation(rows)
        k = min(max(1, int(round(train_fraction * len(rows)))), len(rows) - 1)
        train_rows.extend(rows[:k])
        val_rows.extend(rows[k:])
    return dataset.subset(np.sort(train_rows)), dataset.subset(np.sort(np.array(val_rows, dtype=int)))


def _silverman(Xc: np.ndarray) -> np.ndarray:
    sd = Xc.std(axis=0)
    q75, q25 = np.percentile(Xc, [75, 25], axis=0)
    spread = np.minimum(sd, (q75 - q25) / 1.34)
    spread = np.where(spread > 0, spread, sd)
    return 0.9 * spread * len(Xc) ** -0.2


def _fit_kde(sorted_rows: list[np.ndarray], grid: int):
    """Binned Gaussian KDE per (class, feature) on a shared per-feature grid."""
    allx = np.vstack(sorted_rows)
    lo, hi = allx.min(axis=0), allx.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    # one bandwidth per feature shared by all classes: atoms (exact repeated
    # values) then get peak heights proportional to their class mass
    bw = np.array([_silverman(Xc) for Xc in sorted_rows]).min(axis=0)
    bw = np.maximum(bw, 2.0 * span / grid)
    pad = 4.0 * bw
    lo, hi = lo - pad, hi + pad
    step = (hi - lo) / (grid - 1)
    d = allx.shape[1]
    logd = np.empty((len(sorted_rows), d, grid))
    for k, Xc in enumerate(sorted_rows):
        t = (Xc - lo) / step
        i = np.clip(np.floor(t).astype(np.int64), 0, grid - 2)
        w = t - i
        counts = np.zeros(d * grid)
        base = np.arange(d) * grid
        np.add.at(counts, (i + base).ravel(), (1 - w).ravel())
        np.add.at(counts, (i + 1 + base).ravel(), w.ravel())
        counts = counts.reshape(d, grid)
        for j in range(d):
            counts[j] = gaussian_filter1d(counts[j], bw[j] / step[j], mode="constant", truncate=5.0)
        dens = counts / (len(Xc) * step[:, None])
        dens = (1 - KDE_UNIFORM) * dens + KDE_UNIFORM / (hi - lo)[:, None]
        logd[k] = np.log(dens)
    return lo, hi, logd


def train(dataset: Dataset, likelihood: str = "gaussian", grid: int = KDE_GRID) -> NBModel:
    if likelihood not in LIKELIHOODS:
        raise ValueError(f"likelihood must be one of {LIKELIHOODS}")
    X, y = dataset.features, dataset.labels
    classes = sorted(np.unique(y).tolist())
    floor = VAR_SMOOTHING * float(np.var(X, axis=0).max())
    if floor <= 0:
        floor = VAR_SMOOTHING
    means, variances, priors, rows = [], [], [], []
    for c in classes:
        Xc = X[y == c]
        # canonical row order makes the fit independent of input order
        Xc = Xc[np.lexsort(Xc.T[::-1])]
        rows.append(Xc)
        means.append(Xc.mean(axis=0))
        variances.append(Xc.var(axis=0) + floor)
        priors.append(len(Xc) / len(X))
    if len(classes) < 2:
        log.warning("training set has a single class; model is degenerate")
    kde = _fit_kde(rows, grid) if likelihood == "kde" else (None, None, None)
    return NBModel(
        classes=classes,
        priors=np.array(priors),
        means=np.array(means),
        variances=np.array(variances),
        variance_floor=floor,
        feature_names=dataset.feature_names,
        degenerate=len(classes) < 2,
        likelihood=likelihood,
        grid_lo=kde[0],
        grid_hi=kde[1],
        log_density=kde[2],
    )


def _kde_log_likelihood(model: NBModel, X: np.ndarray) -> np.ndarray:
    lo, hi, logd = model.grid_lo, model.grid_hi, model.log_density
    grid = logd.shape[2]
    step = (hi - lo) / (grid - 1)
    t = (X - lo) / step
    outside = (t < 0) | (t > grid - 1)
    t = np.clip(t, 0, grid - 1)
    i = np.minimum(np.floor(t).astype(np.int64), grid - 2)
    w = t - i
    cols = np.arange(X.shape[1])
    out = np.empty((X.shape[0], len(model.classes)))
    for k in range(len(model.classes)):
        dens = np.exp(logd[k])
        v = (1 - w) * dens[cols, i] + w * dens[cols, i + 1]
        v = np.where(outside, KDE_UNIFORM / (hi - lo), v)
        out[:, k] = np.log(model.priors[k]) + np.log(v).sum(axis=1)
    return out


def joint_log_likelihood(model: NBModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {X.shape[1]}")
    if model.likelihood == "kde":
        return _kde_log_likelihood(model, X)
    out = np.empty((X.shape[0], len(model.classes)))
    for k in range(len(model.classes)):
        var = model.variances[k]
        ll = -0.5 * np.sum(np.log(2 * np.pi * var)) - 0.5 * np.sum((X - model.means[k]) ** 2 / var, axis=1)
        out[:, k] = np.log(model.priors[k]) + ll
    return out


def predict_many(model: NBModel, X: np.ndarray) -> tuple[list[str], np.ndarray]:
    """Labels and posterior matrix for a batch of rows; ties go to the first class."""
    jll = joint_log_likelihood(model, X)
    post = np.exp(jll - logsumexp(jll, axis=1, keepdims=True))
    idx = np.argmax(jll, axis=1)
    return [model.classes[i] for i in idx], post


def predict(model: NBModel, features) -> tuple[str, dict[str, float]]:
    x = np.asarray(features, dtype=float)
    if x.ndim != 1:
        raise ValueError("predict takes a single feature vector")
    labels, post = predict_many(model, x[None, :])
    return labels[0], dict(zip(model.classes, post[0].tolist()))


def confusion_matrix(true, pred, classes) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    m = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(true, pred):
        m[index[t], index[p]] += 1
    return m


def matthews_phi(confusion) -> float:
    """Multiclass Matthews correlation (Gorodkin's R_k); equals the usual
    binary coefficient for 2x2 matrices.  Degenerate denominators give 0."""
    C = np.asarray(confusion, dtype=float)
    s = C.sum()
    correct = np.trace(C)
    t = C.sum(axis=1)
    p = C.sum(axis=0)
    num = correct * s - p @ t
    den = np.sqrt(s * s - p @ p) * np.sqrt(s * s - t @ t)
    if den == 0:
        return 0.0
    return float(np.clip(num / den, -1.0, 1.0))


def report_from_confusion(confusion, classes) -> EvalReport:
    C = np.asarray(confusion)
    total = C.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    col, row = C.sum(axis=0), C.sum(axis=1)
    diag = np.diag(C)
    precision = [float(d / c) if c else 0.0 for d, c in zip(diag, col)]
    recall = [float(d / r) if r else 0.0 for d, r in zip(diag, row)]
    return EvalReport(list(classes), float(np.trace(C) / total), matthews_phi(C), C, precision, recall)


def evaluate(model: NBModel, validation: Dataset) -> EvalReport:
    if len(validation) == 0:
        raise ValueError("empty validation set")
    unknown = set(validation.labels.tolist()) - set(model.classes)
    if unknown:
        raise ValueError(f"validation labels not known to the model: {sorted(unknown)}")
    pred, _ = predict_many(model, validation.features)
    return report_from_confusion(confusion_matrix(validation.labels, pred, model.classes), model.classes)


@dataclass
class CurvePoint:
    size: int
    accuracy: float
    phi: float
    accuracy_std: float = 0.0
    phi_std: float = 0.0


def learning_curve(
    dataset: Dataset,
    prefix_sizes,
    train_fraction: float = 0.2,
    seed: int = 0,
    repeats: int = 1,
    width: int = 1,
    likelihood: str = "gaussian",
) -> list[CurvePoint]:
    """Accuracy and phi against the number of leading features used.

    ``width`` columns make up one step (2 for genus-2 coefficient pairs).
    Repeat ``r`` uses split seed ``seed + r`` for every prefix size.
    """
    out = []
    for size in prefix_sizes:
        ncols = size * width
        if ncols > dataset.features.shape[1] or size < 1:
            raise ValueError(f"prefix size {size} out of range")
        sub = dataset.prefix(ncols)
        accs, phis = [], []
        for r in range(repeats):
            tr, va = split(sub, train_fraction, seed + r)
            rep = evaluate(train(tr, likelihood), va)
            accs.append(rep.accuracy)
            phis.append(rep.phi)
        out.append(CurvePoint(size, float(np.mean(accs)), float(np.mean(phis)), float(np.std(accs)), float(np.std(phis))))
    return out
