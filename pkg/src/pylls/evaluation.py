# -*- coding: utf-8 -*-

import numpy as np
import matplotlib.pyplot as plt
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .errors import InvalidInput, ShapeMismatch

__all__ = [
    "EvalReport",
    "confusion_matrix",
    "hungarian_match",
    "q_yd_error",
    "match_rows",
    "evaluate",
    "plot_label_marginals",
]


def confusion_matrix(y_true, y_pred, k):
    """Counts with true classes on rows and predicted classes on columns"""
    y_true = np.asarray(y_true, dtype=int).ravel()
    y_pred = np.asarray(y_pred, dtype=int).ravel()
    if y_true.size != y_pred.size:
        raise ShapeMismatch(f"{y_true.size} labels but {y_pred.size} predictions")
    C = np.zeros((k, k), dtype=int)
    np.add.at(C, (y_true, y_pred), 1)
    return C


def hungarian_match(confusion):
    """Relabeling of predicted classes with the highest accuracy

    Parameters
    ----------
    confusion : array_like
        (k, k) non-negative counts, rows true classes and columns predicted.

    Returns
    -------
    permutation : np.ndarray
        ``permutation[pred]`` is the true class matched to predicted class
        ``pred``.
    accuracy : float
        Matched count over the total.

    Raises
    ------
    ShapeMismatch
        When ``confusion`` is not square.
    """
    C = np.asarray(confusion, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ShapeMismatch(f"confusion matrix must be square, got shape {C.shape}")
    if np.any(C < 0):
        raise InvalidInput("confusion matrix entries must be non-negative")
    total = C.sum()
    if total <= 0:
        raise InvalidInput("confusion matrix is empty")
    rows, cols = linear_sum_assignment(C, maximize=True)
    perm = np.empty(C.shape[0], dtype=int)
    perm[cols] = rows
    return perm, float(C[rows, cols].sum() / total)


def q_yd_error(q_hat, q_true, permutation=None):
    """Mean absolute entry difference after reordering the rows of ``q_hat``

    Row ``i`` of ``q_hat`` is compared with row ``permutation[i]`` of
    ``q_true``.
    """
    A = np.asarray(q_hat, dtype=float)
    B = np.asarray(q_true, dtype=float)
    if A.shape != B.shape:
        raise ShapeMismatch(f"shapes {A.shape} and {B.shape} differ")
    if permutation is None:
        permutation = np.arange(A.shape[0])
    permutation = np.asarray(permutation, dtype=int)
    if sorted(permutation.tolist()) != list(range(A.shape[0])):
        raise InvalidInput(f"{permutation.tolist()} is not a permutation")
    reordered = np.empty_like(A)
    reordered[permutation] = A
    return float(np.mean(np.abs(reordered - B)))


def match_rows(q_hat, q_true):
    """Row permutation of ``q_hat`` closest to ``q_true`` in total L1 distance

    For comparing factorizations without labels. ``permutation[i]`` is the
    row of ``q_true`` matched to row ``i`` of ``q_hat``, as in
    :func:`q_yd_error`.
    """
    A = np.asarray(q_hat, dtype=float)
    B = np.asarray(q_true, dtype=float)
    if A.shape != B.shape:
        raise ShapeMismatch(f"shapes {A.shape} and {B.shape} differ")
    rows, cols = linear_sum_assignment(cdist(A, B, "cityblock"))
    perm = np.empty(A.shape[0], dtype=int)
    perm[rows] = cols
    return perm


class EvalReport:
    """Permutation-matched metrics of a pipeline run

    :Attributes:
      - accuracy (float): matched accuracy on the test split\n
      - permutation (np.ndarray): predicted class to true class\n
      - q_yd_error (float): mean absolute error of the reordered
        :math:`\\hat Q_{Y|D}`\n
      - confusion (np.ndarray): (k, k) counts, true by predicted\n
      - per_domain_accuracy (np.ndarray): matched accuracy in each domain\n
      - balanced_accuracy (float): mean per-class recall under the
        permutation\n
      - agnostic_accuracy (float): matched accuracy of the domain-agnostic
        posterior argmax\n
      - n_test (int): evaluated points\n
    """

    def __init__(
        self,
        accuracy,
        permutation,
        q_yd_error,
        confusion,
        per_domain_accuracy,
        balanced_accuracy=None,
        agnostic_accuracy=None,
    ):
        self.accuracy = accuracy
        self.permutation = np.asarray(permutation, dtype=int)
        self.q_yd_error = q_yd_error
        self.confusion = np.asarray(confusion, dtype=int)
        self.per_domain_accuracy = np.asarray(per_domain_accuracy, dtype=float)
        self.balanced_accuracy = balanced_accuracy
        self.agnostic_accuracy = agnostic_accuracy
        self.n_test = int(self.confusion.sum())

    def __repr__(self):
        return (
            f"EvalReport(accuracy={self.accuracy:.4f}, "
            f"q_yd_error={self.q_yd_error:.4g}, n_test={self.n_test})"
        )

    def matched_confusion(self):
        """Confusion with predicted columns relabeled by the permutation"""
        C = np.zeros_like(self.confusion)
        C[:, self.permutation] = self.confusion
        return C

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "q_yd_error": self.q_yd_error,
            "permutation": self.permutation.tolist(),
            "confusion": self.confusion.tolist(),
            "per_domain_accuracy": self.per_domain_accuracy.tolist(),
            "balanced_accuracy": self.balanced_accuracy,
            "agnostic_accuracy": self.agnostic_accuracy,
            "n_test": self.n_test,
        }


def evaluate(y_true, y_pred, domains, q_yd_hat, q_true, r=None, y_agnostic=None):
    """Score test predictions against the hidden labels

    The permutation maximizing accuracy is reused for the per-domain,
    balanced and domain-agnostic scores and for the :math:`Q_{Y|D}` error.

    Returns
    -------
    EvalReport
    """
    q_hat = np.asarray(q_yd_hat, dtype=float)
    k = q_hat.shape[0]
    r = q_hat.shape[1] if r is None else r
    y_true = np.asarray(y_true, dtype=int).ravel()
    y_pred = np.asarray(y_pred, dtype=int).ravel()
    domains = np.asarray(domains, dtype=int).ravel()

    C = confusion_matrix(y_true, y_pred, k)
    perm, acc = hungarian_match(C)
    matched = perm[y_pred]
    correct = matched == y_true

    per_domain = np.full(r, np.nan)
    for d in range(r):
        mask = domains == d
        if mask.any():
            per_domain[d] = correct[mask].mean()

    recalls = [correct[y_true == y].mean() for y in range(k) if np.any(y_true == y)]
    agnostic = None
    if y_agnostic is not None:
        agnostic = float(np.mean(perm[np.asarray(y_agnostic, dtype=int)] == y_true))

    return EvalReport(
        acc,
        perm,
        q_yd_error(q_hat, q_true, perm),
        C,
        per_domain,
        float(np.mean(recalls)),
        agnostic,
    )


def plot_label_marginals(q_yd, ax=None, title=None, **kwargs):
    """
    Heat map of a label-marginal matrix, classes on rows and domains on
    columns.
    """
    Q = np.asarray(q_yd, dtype=float)

    show = False
    if ax is None:
        show = True
        _, ax = plt.subplots()

    im = ax.imshow(Q, vmin=0.0, vmax=1.0, cmap=kwargs.pop("cmap", "viridis"), **kwargs)
    for (y, d), v in np.ndenumerate(Q):
        ax.text(d, y, f"{v:.2f}", ha="center", va="center", color="w", fontsize=8)
    ax.set_xlabel("Domain")
    ax.set_ylabel("Class")
    ax.set_xticks(range(Q.shape[1]))
    ax.set_yticks(range(Q.shape[0]))
    if title is not None:
        ax.set_title(title)
    ax.figure.colorbar(im, ax=ax)

    if show:
        plt.show()

    return ax
