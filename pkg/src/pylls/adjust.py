# -*- coding: utf-8 -*-

import warnings

import numpy as np
import pandas as pd

from .discretize import tabularize
from .errors import (
    InvalidInput,
    PosteriorClippingWarning,
    ShapeMismatch,
    UndefinedPosterior,
    ZeroRow,
)
from .factorize import nmf
from .linalg import condition_number_2norm, pseudo_inverse_solve
from .model import SimplexVec, StochasticMatrix

__all__ = [
    "Prediction",
    "q_d_given_y",
    "adjust_predict",
    "adjust_predict_batch",
    "naive_train",
    "naive_predict",
    "naive_predict_batch",
    "write_predictions_csv",
]

CLIP_TOL = 1e-12
"""Negative entries larger than this in magnitude count as clipped"""


class Prediction:
    """Label posteriors for one point

    :Attributes:
      - q_y_given_x (SimplexVec): domain-agnostic posterior\n
      - q_y_given_x_d (SimplexVec): posterior adjusted to the point's domain\n
      - y_pred (int): argmax of the adjusted posterior, ties to the lowest
        class\n
      - clipped (bool): negative pseudo-inverse entries were set to zero\n
    """

    def __init__(self, q_y_given_x, q_y_given_x_d, clipped=False):
        self.q_y_given_x = q_y_given_x
        self.q_y_given_x_d = q_y_given_x_d
        self.y_pred = q_y_given_x_d.argmax()
        self.clipped = clipped

    def __repr__(self):
        return (
            f"Prediction(y_pred={self.y_pred}, "
            f"q_y_given_x_d={np.round(self.q_y_given_x_d.entries, 4).tolist()})"
        )


def _matrix(q):
    return q if isinstance(q, StochasticMatrix) else StochasticMatrix(q)


def _check_domains(domains, r):
    d = np.asarray(domains, dtype=int).ravel()
    bad = np.flatnonzero((d < 0) | (d >= r))
    if bad.size:
        raise InvalidInput(f"domain {int(d[bad[0]])} outside 0..{r - 1}")
    return d


def q_d_given_y(q_yd):
    r""":math:`Q_{D|Y}` from :math:`Q_{Y|D}` under uniform domain weights

    :math:`[Q_{D|Y}]_{d,y} = [Q_{Y|D}]_{y,d} / \sum_{d'} [Q_{Y|D}]_{y,d'}`.

    Raises
    ------
    ZeroRow
        When a class has zero mass in every domain.
    """
    Q = np.asarray(q_yd, dtype=float)
    sums = Q.sum(axis=1)
    zero = np.flatnonzero(sums <= 0)
    if zero.size:
        raise ZeroRow(int(zero[0]))
    return StochasticMatrix((Q / sums[:, None]).T, normalize=True)


def _solve_g(q_dy, F):
    """Pseudo-inverse solve for each column of F, clipped"""
    G = pseudo_inverse_solve(q_dy.data, F, cond=condition_number_2norm(q_dy.data))
    clipped = np.any(G < -CLIP_TOL, axis=0)
    return np.maximum(G, 0.0), clipped


def adjust_predict(q_yd_hat, f_x, d_prime):
    r"""Label posteriors of one point from its domain posterior

    :math:`\hat g(x) = \hat Q_{D|Y}^\dagger \hat f(x)` is clipped at zero
    and renormalized; the adjusted posterior is
    :math:`\hat q(y|x, d') \propto [\hat Q_{D|Y}]_{d',y} \, \hat g_y(x)`.

    Parameters
    ----------
    q_yd_hat : StochasticMatrix
        (k, r) recovered label marginals.
    f_x : SimplexVec or array_like
        Domain posterior of the point.
    d_prime : int
        Domain of the point.

    Returns
    -------
    Prediction

    Raises
    ------
    InvalidInput
        When ``d_prime`` is not a domain of ``q_yd_hat``.
    RankDeficient
        When :math:`\hat Q_{D|Y}` has condition number above 1e10.
    UndefinedPosterior
        When the adjusted posterior is zero for every class.
    """
    q_dy = q_d_given_y(q_yd_hat)
    f = np.asarray(f_x, dtype=float).ravel()
    d_prime = int(_check_domains([d_prime], q_dy.rows)[0])
    if f.size != q_dy.rows:
        raise ShapeMismatch(f"domain posterior has {f.size} entries, expected {q_dy.rows}")
    g, clipped = _solve_g(q_dy, f)
    if g.sum() <= 0:
        raise UndefinedPosterior("every class posterior was clipped to zero")
    g = g / g.sum()
    adj = q_dy.data[d_prime] * g
    if adj.sum() <= 0:
        raise UndefinedPosterior(f"no class has positive mass in domain {d_prime}")
    return Prediction(
        SimplexVec(g, normalize=True), SimplexVec(adj, normalize=True), bool(clipped)
    )


def adjust_predict_batch(q_yd_hat, F, domains):
    """Batch version of :func:`adjust_predict`

    Points whose posterior is undefined fall back to the class prior of
    their domain, column ``d`` of ``q_yd_hat``.

    Returns
    -------
    G : np.ndarray
        (n, k) domain-agnostic posteriors.
    A : np.ndarray
        (n, k) adjusted posteriors.
    y_pred : np.ndarray
    info : dict
        ``n_clipped`` and ``n_fallback`` counts.
    """
    q_yd_hat = _matrix(q_yd_hat)
    q_dy = q_d_given_y(q_yd_hat)
    F = np.atleast_2d(np.asarray(F, dtype=float))
    domains = _check_domains(domains, q_dy.rows)
    if F.shape[0] != domains.size:
        raise ShapeMismatch(f"{F.shape[0]} posteriors but {domains.size} domains")
    if F.shape[1] != q_dy.rows:
        raise ShapeMismatch(f"posteriors have {F.shape[1]} entries, expected {q_dy.rows}")

    G, clipped = _solve_g(q_dy, F.T)
    G = G.T
    prior = q_yd_hat.data.mean(axis=1)
    gsum = G.sum(axis=1, keepdims=True)
    dead = gsum.ravel() <= 0
    G = np.where(dead[:, None], prior, G / np.where(gsum > 0, gsum, 1.0))

    A = q_dy.data[domains] * G
    asum = A.sum(axis=1, keepdims=True)
    undefined = asum.ravel() <= 0
    A = np.where(
        undefined[:, None], q_yd_hat.data[:, domains].T, A / np.where(asum > 0, asum, 1.0)
    )

    info = {"n_clipped": int(clipped.sum()), "n_fallback": int((dead | undefined).sum())}
    if info["n_clipped"]:
        warnings.warn(
            f"{info['n_clipped']} of {domains.size} label posteriors had negative "
            "entries clipped to zero",
            PosteriorClippingWarning,
        )
    if info["n_fallback"]:
        warnings.warn(
            f"{info['n_fallback']} undefined posteriors replaced by the domain prior",
            PosteriorClippingWarning,
        )
    return G, A, np.argmax(A, axis=1), info


def naive_train(cluster_ids, domains, m, r, k, rng=None, clusterer=None, **nmf_kwargs):
    """Factorize the cluster-by-domain table of an arbitrary representation

    Parameters
    ----------
    cluster_ids, domains : array_like
        Cluster and domain of each training point.
    m, r, k : int
        Clusters, domains and classes.
    rng : np.random.Generator, optional
    clusterer : callable, optional
        Map from points to cluster ids, returned unchanged for prediction.
    **nmf_kwargs
        Passed to :func:`nmf`.

    Returns
    -------
    w_hat : StochasticMatrix
        (m, k) :math:`\\hat Q_{c(X)|Y}`.
    h_hat : StochasticMatrix
        (k, r) :math:`\\hat Q_{Y|D}`.
    clusterer : callable or None
    """
    _, q_cd = tabularize(cluster_ids, domains, m, r)
    result = nmf(q_cd, k, rng=rng, **nmf_kwargs)
    return result.w_hat, result.h_hat, clusterer


def _naive_posteriors(w_hat, h_hat, cluster_ids, domains):
    W = np.asarray(w_hat, dtype=float)
    H = np.asarray(h_hat, dtype=float)
    if W.shape[1] != H.shape[0]:
        raise ShapeMismatch(f"w_hat has {W.shape[1]} columns, h_hat has {H.shape[0]} rows")
    c = np.asarray(cluster_ids, dtype=int).ravel()
    d = np.asarray(domains, dtype=int).ravel()
    G = W[c] * H.mean(axis=1)
    A = W[c] * H[:, d].T
    return G, A


def naive_predict(w_hat, h_hat, cluster_id, d_prime):
    r"""Cluster-level posterior

    :math:`\hat q(y|c, d') \propto \hat q(c|y) \, \hat q(y|d')`. All points of a
    cluster in the same domain share the prediction.

    Raises
    ------
    UndefinedPosterior
        When the normalizer is zero.
    """
    _check_domains([d_prime], np.shape(h_hat)[1])
    G, A = _naive_posteriors(w_hat, h_hat, [cluster_id], [d_prime])
    if A.sum() <= 0:
        raise UndefinedPosterior(f"cluster {cluster_id} has zero mass in domain {d_prime}")
    g = SimplexVec(G[0], normalize=True) if G.sum() > 0 else SimplexVec(A[0], normalize=True)
    return Prediction(g, SimplexVec(A[0], normalize=True))


def naive_predict_batch(w_hat, h_hat, cluster_ids, domains):
    """Batch version of :func:`naive_predict` with domain-prior fallback"""
    H = np.asarray(h_hat, dtype=float)
    d = _check_domains(domains, H.shape[1])
    G, A = _naive_posteriors(w_hat, h_hat, cluster_ids, d)
    gsum = G.sum(axis=1, keepdims=True)
    asum = A.sum(axis=1, keepdims=True)
    undefined = asum.ravel() <= 0
    prior = H[:, d].T
    G = np.where(gsum > 0, G / np.where(gsum > 0, gsum, 1.0), prior)
    A = np.where(undefined[:, None], prior, A / np.where(asum > 0, asum, 1.0))
    info = {"n_clipped": 0, "n_fallback": int(undefined.sum())}
    if info["n_fallback"]:
        warnings.warn(
            f"{info['n_fallback']} undefined posteriors replaced by the domain prior",
            PosteriorClippingWarning,
        )
    return G, A, np.argmax(A, axis=1), info


def write_predictions_csv(path, domains, y_pred, posteriors, index=None):
    """Write ``index,domain,y_pred,q0..q{k-1}`` rows

    ``index`` defaults to ``0..n-1``; pass dataset row numbers when the
    predictions cover a subset.
    """
    P = np.atleast_2d(np.asarray(posteriors, dtype=float))
    df = pd.DataFrame(
        {
            "index": np.arange(P.shape[0]) if index is None else np.asarray(index, dtype=int),
            "domain": np.asarray(domains, dtype=int),
            "y_pred": np.asarray(y_pred, dtype=int),
        }
    )
    q = pd.DataFrame(P, columns=[f"q{y}" for y in range(P.shape[1])])
    pd.concat([df, q], axis=1).to_csv(path, index=False, float_format="%.17g")
