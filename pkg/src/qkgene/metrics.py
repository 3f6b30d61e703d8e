"""Binary classification metrics from confusion counts, plus ROC/AUC.

Every ratio with a zero denominator is reported as 0.0 together with a
`<name>_degenerate` flag instead of raising, so downstream JSON artifacts
stay complete on pathological predictions. AUC uses the rank (Mann-Whitney)
form with ties counted one half, which the trapezoid of the exported ROC
curve reproduces exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def _check_labels(values, name):
    values = np.asarray(values)
    if values.size == 0:
        raise DataError(f"{name} is empty")
    extra = set(np.unique(values).tolist()) - {-1, 1}
    if extra:
        raise DataError(f"{name} must contain only -1/+1, found {sorted(extra)}")
    return values


def confusion(y_true, y_pred) -> ConfusionMatrix:
    y_true = _check_labels(y_true, "y_true")
    y_pred = _check_labels(y_pred, "y_pred")
    if y_true.shape != y_pred.shape:
        raise DataError("y_true and y_pred lengths differ")
    return ConfusionMatrix(
        tp=int(np.sum((y_true == 1) & (y_pred == 1))),
        tn=int(np.sum((y_true == -1) & (y_pred == -1))),
        fp=int(np.sum((y_true == -1) & (y_pred == 1))),
        fn=int(np.sum((y_true == 1) & (y_pred == -1))),
    )


def _ratio(num: float, den: float) -> tuple[float, bool]:
    if den == 0:
        return 0.0, True
    return num / den, False


def scores_from_confusion(cm: ConfusionMatrix) -> dict:
    """Flat dict of scores with degenerate-denominator flags.

    specificity is tn/(tn+fp), reported alongside recall tp/(tp+fn); the two
    are distinct outputs so consumers never have to disambiguate them.
    """
    if cm.total == 0:
        raise DataError("confusion matrix is empty")
    out: dict = {"accuracy": (cm.tp + cm.tn) / cm.total}
    precision, p_deg = _ratio(cm.tp, cm.tp + cm.fp)
    recall, r_deg = _ratio(cm.tp, cm.tp + cm.fn)
    specificity, s_deg = _ratio(cm.tn, cm.tn + cm.fp)
    fpr, fpr_deg = _ratio(cm.fp, cm.fp + cm.tn)
    f1, f1_deg = _ratio(2.0 * precision * recall, precision + recall)
    out.update(
        precision=precision,
        precision_degenerate=p_deg,
        recall=recall,
        recall_degenerate=r_deg,
        specificity=specificity,
        specificity_degenerate=s_deg,
        fpr=fpr,
        fpr_degenerate=fpr_deg,
        f1=f1,
        f1_degenerate=f1_deg,
    )
    return out


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank (a half-integer)."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc(y_true, scores) -> tuple[float, list[tuple[float, float, float]]]:
    """(auc, curve) where curve rows are (threshold, fpr, tpr).

    A sample is predicted positive when its score >= threshold. The curve
    starts at threshold +inf (0, 0) and ends at the minimum score (1, 1),
    sorted by descending threshold.
    """
    y_true = _check_labels(y_true, "y_true")
    scores = np.asarray(scores, dtype=np.float64)
    if y_true.shape != scores.shape:
        raise DataError("y_true and scores lengths differ")
    n_pos = int(np.sum(y_true == 1))
    n_neg = int(np.sum(y_true == -1))
    if n_pos == 0 or n_neg == 0:
        raise DataError("roc_auc needs both classes present")

    ranks = _average_ranks(scores)
    rank_sum_pos = float(np.sum(ranks[y_true == 1]))
    auc = (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)

    curve = [(float("inf"), 0.0, 0.0)]
    tp = fp = 0
    for threshold in np.unique(scores)[::-1]:
        at = scores == threshold
        tp += int(np.sum(at & (y_true == 1)))
        fp += int(np.sum(at & (y_true == -1)))
        curve.append((float(threshold), fp / n_neg, tp / n_pos))
    return auc, curve
