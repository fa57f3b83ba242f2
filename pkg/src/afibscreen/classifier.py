"""L2-regularized logistic regression on standardized features.

The model stores the training means and stds, so a saved JSON file is all
that is needed to score new recordings. Fitting is deterministic
full-batch gradient descent with a backtracking (Armijo) line search.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import FormatError, NonFiniteFeature, SingleClass

FORMAT_VERSION = 1
MIN_STD = 1e-12
GRAD_TOL = 1e-8
MAX_ITER = 10_000

AFIB = 1
SINUS = 0
LABEL_NAMES = {AFIB: "AFib", SINUS: "Sinus"}


class DegenerateFeatureWarning(UserWarning):
    """A training feature had zero variance; its std was floored."""


@dataclass(frozen=True)
class LabeledSet:
    features: np.ndarray
    labels: np.ndarray
    names: tuple[str, ...] = ()
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.features, dtype=float))
        y = np.asarray(self.labels, dtype=int).ravel()
        if X.shape[0] != y.size:
            raise ValueError(f"{X.shape[0]} feature rows but {y.size} labels")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 (sinus) or 1 (AFib)")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def __len__(self) -> int:
        return self.labels.size

    def subset(self, rows) -> "LabeledSet":
        rows = np.asarray(rows)
        names = tuple(np.asarray(self.names, dtype=object)[rows]) if self.names else ()
        return LabeledSet(self.features[rows], self.labels[rows], names, self.feature_names)


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray
    intercept: float
    feature_means: np.ndarray
    feature_stds: np.ndarray
    threshold: float = 0.5
    l2: float = 1.0
    degenerate: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("weights", "feature_means", "feature_stds"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        d = self.weights.size
        if self.feature_means.size != d or self.feature_stds.size != d:
            raise ValueError("weights, means and stds must have equal length")
        if not np.all(np.isfinite(self.weights)) or not math.isfinite(self.intercept):
            raise ValueError("model parameters must be finite")
        if not np.all(self.feature_stds > 0):
            raise ValueError("feature stds must be positive")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")
        if not self.l2 >= 0:
            raise ValueError("l2 must be non-negative")

    @property
    def n_features(self) -> int:
        return self.weights.size

    def standardize(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.feature_means) / self.feature_stds

    def decision_function(self, X) -> np.ndarray | float:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[-1]}")
        if not np.all(np.isfinite(X)):
            raise NonFiniteFeature("feature values must be finite")
        return self.standardize(X) @ self.weights + self.intercept

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "weights": [float(w) for w in self.weights],
            "intercept": float(self.intercept),
            "means": [float(m) for m in self.feature_means],
            "stds": [float(s) for s in self.feature_stds],
            "threshold": float(self.threshold),
            "l2": float(self.l2),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticModel":
        try:
            if d["format_version"] != FORMAT_VERSION:
                raise FormatError(f"unsupported model format_version {d['format_version']!r}")
            return cls(
                weights=d["weights"],
                intercept=float(d["intercept"]),
                feature_means=d["means"],
                feature_stds=d["stds"],
                threshold=float(d["threshold"]),
                l2=float(d["l2"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"malformed model: {exc}") from exc


def model_json(model: LogisticModel) -> str:
    # json writes floats via repr, the shortest string that round-trips exactly
    return json.dumps(model.to_dict(), indent=2) + "\n"


def save_model(model: LogisticModel, path) -> None:
    with open(path, "w") as fh:
        fh.write(model_json(model))


def load_model(path) -> LogisticModel:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    return LogisticModel.from_dict(d)


def loss_and_grad(params: np.ndarray, Z: np.ndarray, y: np.ndarray, l2: float):
    """Mean cross-entropy plus ``l2 * |w|^2 / 2`` and its gradient.

    ``params`` is ``[w_1 .. w_d, b]``; the intercept is not penalized.
    """
    w, b = params[:-1], params[-1]
    s = Z @ w + b
    # log(1 + e^s) - y s, written to stay finite for large |s|
    loss = float(np.mean(np.logaddexp(0.0, s) - y * s) + 0.5 * l2 * (w @ w))
    r = expit(s) - y
    grad = np.empty_like(params)
    grad[:-1] = Z.T @ r / y.size + l2 * w
    grad[-1] = r.mean()
    return loss, grad


def minimize_logistic_loss(
    Z: np.ndarray,
    y: np.ndarray,
    l2: float,
    tol: float = GRAD_TOL,
    max_iter: int = MAX_ITER,
) -> tuple[np.ndarray, list[float]]:
    """Gradient descent with backtracking; returns the parameters and loss history."""
    params = np.zeros(Z.shape[1] + 1)
    loss, grad = loss_and_grad(params, Z, y, l2)
    history = [loss]
    step = 1.0
    for _ in range(max_iter):
        gnorm2 = float(grad @ grad)
        if np.max(np.abs(grad)) < tol:
            break
        while True:
            trial = params - step * grad
            trial_loss, trial_grad = loss_and_grad(trial, Z, y, l2)
            if trial_loss <= loss - 0.5 * step * gnorm2:
                break
            step *= 0.5
            if step < 1e-20:
                return params, history
        params, loss, grad = trial, trial_loss, trial_grad
        history.append(loss)
        step *= 2.0
    return params, history


def fit(data: LabeledSet, l2: float = 1.0, threshold: float = 0.5) -> LogisticModel:
    X, y = data.features, data.labels
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("training features must be finite")
    if np.unique(y).size < 2:
        raise SingleClass("training data must contain both AFib and sinus samples")
    if l2 < 0:
        raise ValueError("l2 must be non-negative")

    means = X.mean(axis=0)
    stds = X.std(axis=0)
    degenerate = tuple(int(k) for k in np.flatnonzero(stds < MIN_STD))
    if degenerate:
        warnings.warn(
            f"zero-variance feature column(s) {list(degenerate)}; std floored at {MIN_STD:g}",
            DegenerateFeatureWarning,
            stacklevel=2,
        )
        stds = np.maximum(stds, MIN_STD)
    Z = (X - means) / stds

    params, _ = minimize_logistic_loss(Z, y.astype(float), l2)
    return LogisticModel(params[:-1], float(params[-1]), means, stds, threshold, l2, degenerate)


def predict_proba(model: LogisticModel, x) -> np.ndarray | float:
    """AFib probability; kept strictly inside (0, 1) even for extreme scores."""
    p = expit(model.decision_function(x))
    eps = np.finfo(float).eps
    p = np.clip(p, eps, 1.0 - eps)
    return float(p) if np.ndim(p) == 0 else p


def classify(model: LogisticModel, x, threshold: float | None = None) -> np.ndarray | int:
    """1 (AFib) where the probability reaches the threshold, else 0 (sinus).

    ``threshold`` overrides the model's stored one and may be anywhere in
    ``[0, 1]``.
    """
    t = model.threshold if threshold is None else threshold
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {t}")
    p = predict_proba(model, x)
    label = (np.asarray(p) >= t).astype(int)
    return int(label) if label.ndim == 0 else label
