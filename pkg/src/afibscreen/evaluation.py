"""Screening metrics, stratified cross-validation and wrapper feature selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifier import LabeledSet, fit, predict_proba
from .errors import SingleClass, TooFewPerClass, UndefinedMetric

SELECTION_MIN_GAIN = 1e-4
CHANCE_AUC = 0.5


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @classmethod
    def from_predictions(cls, labels, predictions) -> "ConfusionCounts":
        y = np.asarray(labels, dtype=int).ravel()
        p = np.asarray(predictions, dtype=int).ravel()
        if y.size != p.size:
            raise ValueError("labels and predictions differ in length")
        return cls(
            tp=int(np.sum((y == 1) & (p == 1))),
            fp=int(np.sum((y == 0) & (p == 1))),
            tn=int(np.sum((y == 0) & (p == 0))),
            fn=int(np.sum((y == 1) & (p == 0))),
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def sensitivity(self) -> float:
        if self.tp + self.fn == 0:
            raise UndefinedMetric("sensitivity undefined without AFib cases")
        return self.tp / (self.tp + self.fn)

    @property
    def specificity(self) -> float:
        if self.tn + self.fp == 0:
            raise UndefinedMetric("specificity undefined without sinus cases")
        return self.tn / (self.tn + self.fp)

    @property
    def accuracy(self) -> float:
        if self.total == 0:
            raise UndefinedMetric("accuracy of an empty set")
        return (self.tp + self.tn) / self.total


def confusion_metrics(labels, predictions) -> tuple[float, float, float]:
    """``(sensitivity, specificity, accuracy)`` with AFib as the positive class."""
    c = ConfusionCounts.from_predictions(labels, predictions)
    return c.sensitivity, c.specificity, c.accuracy


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def trapezoid_area(self) -> float:
        return float(np.sum(np.diff(self.fpr) * (self.tpr[1:] + self.tpr[:-1]) / 2.0))


def mann_whitney_auc(scores, labels) -> float:
    """``P(pos > neg) + P(pos == neg) / 2`` via average ranks."""
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels, dtype=int).ravel()
    n_pos = int(np.sum(y == 1))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both classes")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(s.size)
    sorted_s = s[order]
    # average rank over runs of ties
    starts = np.flatnonzero(np.r_[True, sorted_s[1:] != sorted_s[:-1]])
    ends = np.r_[starts[1:], s.size]
    for a, b in zip(starts, ends):
        ranks[order[a:b]] = 0.5 * (a + b - 1) + 1.0
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_auc(scores, labels) -> RocCurve:
    """ROC from a sweep over the distinct scores (highest first) plus the rank AUC."""
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels, dtype=int).ravel()
    if s.size != y.size:
        raise ValueError("scores and labels differ in length")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    auc = mann_whitney_auc(s, y)
    n_pos = int(np.sum(y == 1))
    n_neg = y.size - n_pos
    thresholds = np.unique(s)[::-1]
    tp = np.array([np.sum((s >= t) & (y == 1)) for t in thresholds])
    fp = np.array([np.sum((s >= t) & (y == 0)) for t in thresholds])
    thresholds = np.r_[np.inf, thresholds]
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    return RocCurve(thresholds, fpr, tpr, auc)


@dataclass(frozen=True)
class FoldMetrics:
    fold: int
    size: int
    sensitivity: float
    specificity: float
    accuracy: float
    auc: float


@dataclass(frozen=True)
class CVResult:
    folds: list[FoldMetrics]
    pooled: FoldMetrics
    roc: RocCurve
    scores: np.ndarray
    fold_of: np.ndarray


def stratified_folds(labels, k: int, seed: int) -> np.ndarray:
    """Fold index per sample; each class is shuffled and dealt round-robin.

    Classes are dealt one after the other with a continuing counter, so
    per-fold class counts stay within one of the global ratio and
    ``k == n`` gives leave-one-out.
    """
    y = np.asarray(labels, dtype=int).ravel()
    rng = np.random.default_rng(seed)
    fold_of = np.empty(y.size, dtype=int)
    position = 0
    for cls in (1, 0):
        members = np.flatnonzero(y == cls)
        members = members[rng.permutation(members.size)]
        fold_of[members] = (position + np.arange(members.size)) % k
        position += members.size
    return fold_of


def _safe(metric) -> float:
    try:
        return metric()
    except (UndefinedMetric, SingleClass):
        return math.nan


def _metrics(fold: int, y, scores, threshold: float) -> FoldMetrics:
    c = ConfusionCounts.from_predictions(y, scores >= threshold)
    return FoldMetrics(
        fold=fold,
        size=int(y.size),
        sensitivity=_safe(lambda: c.sensitivity),
        specificity=_safe(lambda: c.specificity),
        accuracy=c.accuracy,
        auc=_safe(lambda: mann_whitney_auc(scores, y)),
    )


def kfold_cv(
    data: LabeledSet, k: int = 5, l2: float = 1.0, seed: int = 0, threshold: float = 0.5
) -> CVResult:
    """Stratified k-fold CV; per-fold metrics plus metrics on pooled out-of-fold scores.

    Folds without one of the classes report NaN for the metrics that need it.
    """
    y = data.labels
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > y.size:
        raise TooFewPerClass(f"k={k} exceeds the {y.size} available samples")
    counts = np.bincount(y, minlength=2)
    if counts.min() < 2:
        raise TooFewPerClass(f"each class needs at least 2 samples, got {counts.tolist()}")

    fold_of = stratified_folds(y, k, seed)
    scores = np.empty(y.size)
    folds = []
    for f in range(k):
        test = fold_of == f
        model = fit(data.subset(np.flatnonzero(~test)), l2=l2, threshold=0.5)
        scores[test] = predict_proba(model, data.features[test])
        folds.append(_metrics(f, y[test], scores[test], threshold))
    pooled = _metrics(-1, y, scores, threshold)
    return CVResult(folds, pooled, roc_auc(scores, y), scores, fold_of)


@dataclass(frozen=True)
class SelectionStep:
    feature: str
    auc: float


def forward_feature_selection(
    pool: dict[str, np.ndarray],
    labels,
    k: int = 5,
    l2: float = 1.0,
    seed: int = 0,
    min_gain: float = SELECTION_MIN_GAIN,
) -> list[SelectionStep]:
    """Greedy wrapper selection by pooled cross-validated AUC.

    ``pool`` maps candidate names to one value per sample. Each round adds
    the candidate with the best CV AUC together with the features already
    chosen; selection stops once the best gain is not above ``min_gain``.
    The empty model is scored at chance (AUC 0.5). Ties go to the candidate
    listed first.
    """
    if not pool:
        raise ValueError("candidate pool is empty")
    y = np.asarray(labels, dtype=int).ravel()
    columns = {name: np.asarray(v, dtype=float).ravel() for name, v in pool.items()}
    for name, col in columns.items():
        if col.size != y.size:
            raise ValueError(f"candidate {name!r} has {col.size} values for {y.size} labels")

    chosen: list[str] = []
    steps: list[SelectionStep] = []
    best_auc = CHANCE_AUC
    remaining = list(columns)
    while remaining:
        trial = []
        for name in remaining:
            X = np.column_stack([columns[c] for c in chosen + [name]])
            res = kfold_cv(LabeledSet(X, y), k=k, l2=l2, seed=seed)
            trial.append((res.roc.auc, name))
        auc, name = max(trial, key=lambda t: t[0])
        if auc - best_auc <= min_gain:
            break
        chosen.append(name)
        remaining.remove(name)
        steps.append(SelectionStep(name, auc))
        best_auc = auc
    return steps
