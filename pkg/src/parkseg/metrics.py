"""Segmentation quality metrics over label masks.

Everything here works on integer label arrays and a palette that fixes the
class set. Per-class scores that divide zero by zero are reported as None
rather than silently coerced, and macro averages skip those entries.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllUndefinedError,
    BadDistributionError,
    BadFactorError,
    DimensionMismatchError,
    NoForegroundError,
    UnknownClassIdError,
)
from .maskio import Mask, validate_labels
from .palette import Palette


def _check_pair(truth: Mask, predicted: Mask, palette: Palette) -> None:
    if truth.labels.shape != predicted.labels.shape:
        raise DimensionMismatchError(
            f"truth is {truth.labels.shape}, prediction is {predicted.labels.shape}"
        )
    validate_labels(truth, palette)
    validate_labels(predicted, palette)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count matrix indexed [truth, predicted] in palette id order."""

    class_ids: tuple[int, ...]
    counts: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.class_ids)
        if counts.shape != (k, k):
            raise DimensionMismatchError(
                f"expected a {k}x{k} count matrix, got {counts.shape}"
            )
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def _index(self, class_id: int) -> int:
        try:
            return self.class_ids.index(class_id)
        except ValueError:
            raise UnknownClassIdError(f"class id {class_id} is not in the matrix") from None

    def true_positives(self, class_id: int) -> int:
        i = self._index(class_id)
        return int(self.counts[i, i])

    def false_positives(self, class_id: int) -> int:
        i = self._index(class_id)
        return int(self.counts[:, i].sum() - self.counts[i, i])

    def false_negatives(self, class_id: int) -> int:
        i = self._index(class_id)
        return int(self.counts[i, :].sum() - self.counts[i, i])

    def true_negatives(self, class_id: int) -> int:
        return (
            self.total()
            - self.true_positives(class_id)
            - self.false_positives(class_id)
            - self.false_negatives(class_id)
        )

    def total(self) -> int:
        return int(self.counts.sum())


def confusion(truth: Mask, predicted: Mask, palette: Palette) -> ConfusionMatrix:
    """Count pixels per (truth class, predicted class) pair."""
    _check_pair(truth, predicted, palette)
    ids = palette.class_ids
    k = len(ids)
    index = np.full(256, -1, dtype=np.int64)
    for pos, class_id in enumerate(ids):
        index[class_id] = pos
    t = index[truth.labels.ravel()]
    p = index[predicted.labels.ravel()]
    counts = np.bincount(t * k + p, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(class_ids=ids, counts=counts)


def foreground_accuracy(truth: Mask, predicted: Mask, palette: Palette) -> float:
    """Fraction of true foreground pixels that were predicted correctly.

    Background pixels in the truth mask are excluded from both numerator
    and denominator, so an all-background prediction scores 0 rather than
    rewarding the easy class. Raises NoForegroundError when the truth mask
    has no foreground at all.
    """
    _check_pair(truth, predicted, palette)
    background = palette.background_id()
    fg = truth.labels != background
    denom = int(np.count_nonzero(fg))
    if denom == 0:
        raise NoForegroundError("truth mask contains only background")
    correct = int(np.count_nonzero(fg & (truth.labels == predicted.labels)))
    return correct / denom


def foreground_accuracy_from_matrix(matrix: ConfusionMatrix, background_id: int) -> float:
    """Same score computed from an existing confusion matrix."""
    i = matrix._index(background_id)
    row_sums = matrix.counts.sum(axis=1)
    denom = int(matrix.total() - row_sums[i])
    if denom == 0:
        raise NoForegroundError("truth mask contains only background")
    diag = int(np.trace(matrix.counts)) - int(matrix.counts[i, i])
    return diag / denom


def dice_from_counts(tp: int, fp: int, fn: int) -> float | None:
    denom = 2 * tp + fp + fn
    if denom == 0:
        return None
    return 2 * tp / denom


def jaccard_from_counts(tp: int, fp: int, fn: int) -> float | None:
    denom = tp + fp + fn
    if denom == 0:
        return None
    return tp / denom


def dice_per_class(matrix: ConfusionMatrix) -> dict[int, float | None]:
    return {
        c: dice_from_counts(
            matrix.true_positives(c), matrix.false_positives(c), matrix.false_negatives(c)
        )
        for c in matrix.class_ids
    }


def jaccard_per_class(matrix: ConfusionMatrix) -> dict[int, float | None]:
    return {
        c: jaccard_from_counts(
            matrix.true_positives(c), matrix.false_positives(c), matrix.false_negatives(c)
        )
        for c in matrix.class_ids
    }


def macro_average(per_class: dict[int, float | None], exclude: tuple[int, ...] = ()) -> float:
    """Mean of the defined per-class scores, optionally excluding classes.

    Undefined (None) entries are skipped. Raises AllUndefinedError when
    nothing remains to average.
    """
    values = [v for c, v in per_class.items() if c not in exclude and v is not None]
    if not values:
        raise AllUndefinedError("no class has a defined score")
    return float(np.mean(values))


@dataclass(frozen=True)
class FocalParams:
    """Focusing exponent and per-class weights for the focal score.

    alpha maps class id to weight; None means every class weighs 1.
    """

    gamma: float = 2.0
    alpha: dict[int, float] | None = None

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise BadFactorError(f"gamma must be non-negative, got {self.gamma}")
        if self.alpha is not None:
            for class_id, weight in self.alpha.items():
                if weight < 0:
                    raise BadFactorError(
                        f"alpha for class {class_id} must be non-negative, got {weight}"
                    )


_EPS = 1e-12


def focal_loss(
    probabilities: np.ndarray,
    truth: Mask,
    palette: Palette,
    params: FocalParams = FocalParams(),
) -> float:
    """Mean focal loss of per-pixel class probabilities against a truth mask.

    probabilities has shape (H, W, K) with K matching the palette size and
    channels in palette id order; each pixel's vector must sum to 1 within
    1e-6. Per pixel the loss is -alpha[c] * (1 - p_c)^gamma * log(p_c)
    where c is the true class; probabilities are clipped to [eps, 1] before
    the log.
    """
    validate_labels(truth, palette)
    ids = palette.class_ids
    probs = np.asarray(probabilities, dtype=np.float64)
    expected = truth.labels.shape + (len(ids),)
    if probs.shape != expected:
        raise DimensionMismatchError(
            f"expected probabilities of shape {expected}, got {probs.shape}"
        )
    if np.any(probs < 0):
        raise BadDistributionError("probabilities must be non-negative")
    sums = probs.sum(axis=2)
    if np.any(np.abs(sums - 1.0) > 1e-6):
        worst = float(np.abs(sums - 1.0).max())
        raise BadDistributionError(
            f"per-pixel probabilities must sum to 1 within 1e-6 (worst deviation {worst:g})"
        )

    index = np.full(256, -1, dtype=np.int64)
    for pos, class_id in enumerate(ids):
        index[class_id] = pos
    channel = index[truth.labels]
    p_true = np.take_along_axis(probs, channel[..., None], axis=2)[..., 0]
    p_true = np.clip(p_true, _EPS, 1.0)

    if params.alpha is None:
        weight = np.ones_like(p_true)
    else:
        alpha_by_pos = np.array([params.alpha.get(c, 1.0) for c in ids], dtype=np.float64)
        weight = alpha_by_pos[channel]
    loss = -weight * (1.0 - p_true) ** params.gamma * np.log(p_true)
    return float(loss.mean())
