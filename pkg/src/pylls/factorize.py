# -*- coding: utf-8 -*-
"""
Non-negative factorization of a cluster-by-domain matrix
:math:`\\hat Q_{c(X)|D} \\approx \\hat Q_{c(X)|Y} \\hat Q_{Y|D}`.

Both solvers finish with the same normalization: the columns of the left
factor are scaled to sum to one, each scale is folded into the matching row
of the right factor, and finally the columns of the right factor are scaled
to sum to one.
"""

import json
import warnings

import numpy as np
from scipy.optimize import nnls

from .errors import AnchorDeficient, InvalidInput, InvalidRank, NMFConvergenceWarning
from .model import StochasticMatrix

__all__ = ["FactorizationResult", "nmf", "spa_anchor_nmf"]

EPSILON = np.finfo(np.float32).eps
"""Guard added to multiplicative-update denominators"""


class FactorizationResult:
    """Normalized factors of :math:`\\hat Q_{c(X)|D}`

    :Attributes:
      - w_hat (StochasticMatrix): (m, k) :math:`\\hat Q_{c(X)|Y}`\n
      - h_hat (StochasticMatrix): (k, r) :math:`\\hat Q_{Y|D}`\n
      - residual (float): Frobenius norm of :math:`V - WH` before the final
        column normalization of H\n
      - n_iter (int): iterations of the selected run\n
      - converged (bool): residual reached the tolerance\n
      - h_column_sums (np.ndarray): column sums of H before its final
        normalization\n
      - method (str): "nmf" or "spa"\n
      - history (list): residual per iteration of the selected run\n
      - anchors (list): anchor rows picked by "spa"\n
    """

    def __init__(
        self,
        w_hat,
        h_hat,
        residual,
        n_iter=0,
        converged=True,
        h_column_sums=None,
        method="nmf",
        history=None,
        anchors=None,
    ):
        self.w_hat = w_hat
        self.h_hat = h_hat
        self.residual = float(residual)
        self.n_iter = int(n_iter)
        self.converged = bool(converged)
        self.h_column_sums = h_column_sums
        self.method = method
        self.history = [] if history is None else history
        self.anchors = anchors

    def __repr__(self):
        m, k = self.w_hat.shape
        return (
            f"FactorizationResult({self.method}, m={m}, k={k}, "
            f"residual={self.residual:.3e}, converged={self.converged})"
        )

    def getQYD(self):
        return self.h_hat

    def to_dict(self):
        return {
            "method": self.method,
            "w": self.w_hat.tolist(),
            "h": self.h_hat.tolist(),
            "residual": self.residual,
            "converged": self.converged,
            "iterations": self.n_iter,
            "h_column_sums": np.asarray(self.h_column_sums).tolist(),
        }

    def to_json(self, path, config=None):
        d = self.to_dict()
        if config is not None:
            d["config"] = config
        with open(path, "w") as f:
            json.dump(d, f, indent=2)
            f.write("\n")


def _normalize(W, H):
    """Column-normalize W, fold its scales into H, column-normalize H"""
    W = W.copy()
    H = H.copy()
    m = W.shape[0]
    scales = W.sum(axis=0)
    dead = scales <= 0
    # a collapsed component carries no mass
    W[:, dead] = 1.0 / m
    H[dead] = 0.0
    scales[dead] = 1.0
    W /= scales
    H *= scales[:, None]
    sums = H.sum(axis=0)
    if np.any(sums <= 0):
        raise InvalidInput(f"column {int(np.argmin(sums))} of the product vanished")
    return (
        StochasticMatrix(W, normalize=True),
        StochasticMatrix(H / sums, normalize=True),
        sums,
    )


def _check_rank(V, k, allow_overcomplete):
    m, r = V.shape
    if k < 1:
        raise InvalidRank(f"rank must be positive, got {k}")
    if k > min(m, r) and not allow_overcomplete:
        raise InvalidRank(f"rank {k} exceeds min(m, r) = {min(m, r)}")


def _run_mu(V, k, max_iter, tol, rng):
    m, r = V.shape
    avg = np.sqrt(V.mean() / k)
    W = avg * np.abs(rng.standard_normal((m, k)))
    H = avg * np.abs(rng.standard_normal((k, r)))
    history = [float(np.linalg.norm(V - W @ H))]
    it = 0
    for it in range(1, max_iter + 1):
        H *= (W.T @ V) / (W.T @ W @ H + EPSILON)
        W *= (V @ H.T) / (W @ (H @ H.T) + EPSILON)
        res = float(np.linalg.norm(V - W @ H))
        history.append(res)
        if res <= tol:
            break
        if it % 10 == 0 and history[-11] - res <= 1e-12 * history[-11]:
            break
    return W, H, history, it


def nmf(V, k, max_iter=2000, tol=1e-9, n_init=10, rng=None, allow_overcomplete=False, verbose=False):
    """Multiplicative-update NMF with the Frobenius objective

    Each restart starts from a random non-negative initialization scaled by
    :math:`\\sqrt{\\bar V / k}`; the restart with the smallest residual wins
    (ties to the earliest). A run stops when the residual reaches ``tol``,
    when it stalls, or after ``max_iter`` iterations.

    Parameters
    ----------
    V : StochasticMatrix or array_like
        (m, r) cluster-by-domain matrix.
    k : int
        Number of classes.
    max_iter : int, optional
    tol : float, optional
    n_init : int, optional
    rng : np.random.Generator, optional
    allow_overcomplete : bool, optional
        Accept ``k > min(m, r)``, for cluster-count ablations.
    verbose : bool, optional
        Print the residual of each restart.

    Returns
    -------
    FactorizationResult
        ``converged`` is False (with an :class:`NMFConvergenceWarning`) when
        no restart reached ``tol``.

    Raises
    ------
    InvalidRank
        When ``k > min(m, r)`` and ``allow_overcomplete`` is not set.
    """
    V = np.asarray(V, dtype=float)
    _check_rank(V, k, allow_overcomplete)
    if np.any(V < 0):
        raise InvalidInput("NMF input must be non-negative")
    rng = np.random.default_rng() if rng is None else rng

    best = None
    for restart in range(max(1, n_init)):
        W, H, history, it = _run_mu(V, k, max_iter, tol, rng)
        if verbose:
            print(f"restart {restart:3d}: residual {history[-1]:.6e} after {it} iterations")
        if best is None or history[-1] < best[2][-1]:
            best = (W, H, history, it)

    W, H, history, it = best
    residual = history[-1]
    converged = residual <= tol
    if not converged:
        warnings.warn(
            f"NMF residual {residual:.3e} above tolerance {tol:.1e}",
            NMFConvergenceWarning,
        )
    w_hat, h_hat, sums = _normalize(W, H)
    return FactorizationResult(
        w_hat, h_hat, residual, it, converged, sums, "nmf", history
    )


def spa_anchor_nmf(V, k, tol=1e-10):
    """Separable NMF by successive projection

    Rows of ``V`` are scaled to sum to one; the row of largest norm is taken
    as an anchor and all rows are projected onto the orthogonal complement of
    it, ``k`` times. The right factor is read off the anchor rows and the
    left factor is solved row by row with non-negative least squares.

    Parameters
    ----------
    V : StochasticMatrix or array_like
        (m, r) cluster-by-domain matrix.
    k : int
        Number of anchors to select.
    tol : float, optional
        Squared residual norm below which no further anchor exists.

    Returns
    -------
    FactorizationResult

    Raises
    ------
    AnchorDeficient
        When the projected rows vanish before ``k`` anchors are found.
    """
    V = np.asarray(V, dtype=float)
    _check_rank(V, k, False)
    if np.any(V < 0):
        raise InvalidInput("SPA input must be non-negative")
    row_sums = V.sum(axis=1)
    R = np.zeros_like(V)
    live = row_sums > 0
    R[live] = V[live] / row_sums[live, None]

    anchors = []
    for j in range(k):
        norms = np.sum(R**2, axis=1)
        i = int(np.argmax(norms))
        if norms[i] < tol:
            raise AnchorDeficient(
                f"only {j} anchors found before the projected rows vanished"
            )
        anchors.append(i)
        u = R[i] / np.sqrt(norms[i])
        R = R - np.outer(R @ u, u)

    H = V[anchors]
    W = np.array([nnls(H.T, v)[0] for v in V])
    residual = float(np.linalg.norm(V - W @ H))
    w_hat, h_hat, sums = _normalize(W, H)
    return FactorizationResult(
        w_hat, h_hat, residual, k, True, sums, "spa", [residual], anchors
    )
