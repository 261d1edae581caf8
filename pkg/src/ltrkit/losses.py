"""Ranking losses over padded fixed-size lists, with analytic score gradients.

Three loss families are provided, selected by :class:`LossKind`:

* pointwise sigmoid cross-entropy, averaged over unmasked entries;
* pairwise logistic loss over ordered pairs with a label gap, averaged over
  the total pair count of the batch;
* listwise softmax cross-entropy against the normalized label distribution,
  averaged over lists that carry any positive label mass.

Every function returns ``(loss, grad)`` where ``grad`` has the batch shape
and is exactly zero at masked (padding) positions, so padding never leaks
into training.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .validation import check_same_shape

# sigmoid outputs are clamped to this range before taking logs so saturated
# scores cannot produce infinite loss
_PROB_FLOOR = 1e-12


class LossKind(enum.Enum):
    """The supported ranking-loss families."""

    POINTWISE_SIGMOID_CE = "pointwise"
    PAIRWISE_LOGISTIC = "pairwise"
    LISTWISE_SOFTMAX = "softmax"

    @classmethod
    def from_string(cls, name: str) -> "LossKind":
        for kind in cls:
            if kind.value == name:
                return kind
        valid = ", ".join(k.value for k in cls)
        raise ValueError(f"unknown loss {name!r}; valid losses: {valid}")

    def function(self):
        return _LOSS_FUNCTIONS[self]


@dataclass(frozen=True)
class ListBatch:
    """A batch of fixed-size score lists with labels and a padding mask.

    ``scores``, ``labels`` and ``mask`` all have shape (batch, list_size).
    ``mask`` is True at real entries and False at padding; labels at padded
    positions are forced to zero on construction.
    """

    scores: np.ndarray
    labels: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=bool)
        if scores.ndim != 2:
            raise ValueError(f"scores must be 2-d (batch, list_size), got shape {scores.shape}")
        check_same_shape(scores=scores, labels=labels, mask=mask)
        labels = np.where(mask, labels, 0.0)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "mask", mask)

    @property
    def list_size(self) -> int:
        return self.scores.shape[1]

    def __len__(self) -> int:
        return self.scores.shape[0]


def pointwise_sigmoid_ce(batch: ListBatch) -> tuple[float, np.ndarray]:
    """Sigmoid cross-entropy per entry, averaged over unmasked entries.

    Labels are binarized (grade > 0 counts as relevant) before the
    cross-entropy is taken.
    """
    mask = batch.mask
    y = np.where(batch.labels > 0, 1.0, 0.0)
    sig = expit(batch.scores)
    count = int(mask.sum())
    denom = max(count, 1)
    clamped = np.clip(sig, _PROB_FLOOR, 1.0 - _PROB_FLOOR)
    per_entry = -(y * np.log(clamped) + (1.0 - y) * np.log1p(-clamped))
    loss = float(np.where(mask, per_entry, 0.0).sum() / denom)
    grad = np.where(mask, (sig - y) / denom, 0.0)
    return loss, grad


def pairwise_logistic(batch: ListBatch) -> tuple[float, np.ndarray]:
    """Logistic loss over ordered pairs (j, k) with label_j > label_k.

    The sum of log(1 + exp(-(s_j - s_k))) over valid pairs is divided by the
    total pair count across the batch (1 when there are no pairs). Requires
    at least one unmasked entry per list.
    """
    mask = batch.mask
    if not mask.any(axis=1).all():
        raise ValueError("pairwise logistic loss requires at least one unmasked entry per list")
    s = batch.scores
    y = batch.labels
    # diff[b, j, k] = s_j - s_k; valid pairs need y_j > y_k and both unmasked
    diff = s[:, :, None] - s[:, None, :]
    valid = (y[:, :, None] > y[:, None, :]) & mask[:, :, None] & mask[:, None, :]
    n_pairs = int(valid.sum())
    denom = max(n_pairs, 1)
    pair_loss = np.where(valid, np.logaddexp(0.0, -diff), 0.0)
    loss = float(pair_loss.sum() / denom)
    # d/d diff log(1 + exp(-diff)) = -sigmoid(-diff)
    w = np.where(valid, expit(-diff), 0.0)
    grad = (-w.sum(axis=2) + w.sum(axis=1)) / denom
    grad = np.where(mask, grad, 0.0)
    return loss, grad


def listwise_softmax(batch: ListBatch) -> tuple[float, np.ndarray]:
    """Softmax cross-entropy against labels normalized to sum 1 per list.

    Softmax is taken over unmasked entries only, with max-subtraction for
    stability. Lists with zero label mass contribute nothing; the loss is
    the mean over contributing lists.
    """
    mask = batch.mask
    s = batch.scores
    label_mass = batch.labels.sum(axis=1, keepdims=True)
    contributing = label_mass[:, 0] > 0
    n_lists = int(contributing.sum())
    denom = max(n_lists, 1)

    shifted_max = np.where(mask, s, -np.inf).max(axis=1, keepdims=True)
    shifted_max = np.where(np.isfinite(shifted_max), shifted_max, 0.0)
    exponent = np.where(mask, s - shifted_max, 0.0)
    z = np.where(mask, np.exp(exponent), 0.0)
    z_sum = z.sum(axis=1, keepdims=True)
    z_sum = np.maximum(z_sum, _PROB_FLOOR)
    log_softmax = np.where(mask, exponent - np.log(z_sum), 0.0)
    softmax = z / z_sum

    target = batch.labels / np.maximum(label_mass, _PROB_FLOOR)
    per_list = -(target * log_softmax).sum(axis=1)
    loss = float(np.where(contributing, per_list, 0.0).sum() / denom)
    grad = np.where(contributing[:, None] & mask, (softmax - target) / denom, 0.0)
    return loss, grad


_LOSS_FUNCTIONS = {
    LossKind.POINTWISE_SIGMOID_CE: pointwise_sigmoid_ce,
    LossKind.PAIRWISE_LOGISTIC: pairwise_logistic,
    LossKind.LISTWISE_SOFTMAX: listwise_softmax,
}
