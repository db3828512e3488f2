# -*- coding: utf-8 -*-

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from .errors import EmptyDomain, InsufficientDistinctPoints, InvalidInput, ShapeMismatch
from .model import StochasticMatrix

__all__ = [
    "ClusterModel",
    "TabularCounts",
    "kmeans",
    "oracle_point_mass_groups",
    "assign_point_masses",
    "tabularize",
    "write_assignments_csv",
]


def _as_points(points):
    P = np.asarray([np.asarray(p, dtype=float) for p in points], dtype=float)
    if P.ndim == 1:
        P = P.reshape(-1, 1)
    if P.ndim != 2:
        raise ShapeMismatch("points must form an (n, r) array")
    return P


class ClusterModel:
    """Fitted centroids in domain-posterior space

    :Attributes:
      - centroids (np.ndarray): (m, r) cluster centres\n
      - m (int): number of clusters\n
      - inertia (float): total within-cluster squared distance on the fit data\n
      - labels (np.ndarray): cluster of each fit point\n
      - n_iter (int): Lloyd iterations of the winning restart\n
    """

    def __init__(self, centroids, inertia=0.0, labels=None, n_iter=0):
        self.centroids = np.atleast_2d(np.asarray(centroids, dtype=float))
        if not np.all(np.isfinite(self.centroids)):
            raise InvalidInput("centroids must be finite")
        self.m = self.centroids.shape[0]
        self.inertia = float(inertia)
        self.labels = labels
        self.n_iter = n_iter

    def __repr__(self):
        return f"ClusterModel(m={self.m}, inertia={self.inertia:.6g})"

    def predict(self, points):
        """Nearest centroid of each point, ties to the lowest index"""
        return _assign(_as_points(points), self.centroids)[0]


class TabularCounts:
    """Cluster-by-domain counts

    :Attributes:
      - counts (np.ndarray): (m, r) integer counts\n
      - totals (np.ndarray): records per domain\n
    """

    def __init__(self, counts):
        self.counts = np.asarray(counts, dtype=int)
        self.totals = self.counts.sum(axis=0)

    def __repr__(self):
        m, r = self.counts.shape
        return f"TabularCounts({m}x{r}, totals={self.totals.tolist()})"

    def to_matrix(self):
        """Empirical :math:`\\hat Q_{c(X)|D}`"""
        empty = np.flatnonzero(self.totals == 0)
        if empty.size:
            raise EmptyDomain(int(empty[0]))
        return StochasticMatrix(self.counts / self.totals, normalize=True)


def _assign(P, C):
    d2 = cdist(P, C, "sqeuclidean")
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(P.shape[0]), labels]


def _kmeanspp(P, m, rng):
    n = P.shape[0]
    centers = [P[rng.integers(n)]]
    d2 = cdist(P, centers[0][None, :], "sqeuclidean").ravel()
    for _ in range(1, m):
        i = rng.choice(n, p=d2 / d2.sum())
        centers.append(P[i])
        d2 = np.minimum(d2, cdist(P, P[i][None, :], "sqeuclidean").ravel())
    return np.array(centers)


def _lloyd(P, C, niter):
    m = C.shape[0]
    labels = None
    for it in range(1, max(1, niter) + 1):
        new_labels, dmin = _assign(P, C)
        counts = np.bincount(new_labels, minlength=m)
        sums = np.zeros_like(C)
        np.add.at(sums, new_labels, P)
        C = C.copy()
        filled = counts > 0
        C[filled] = sums[filled] / counts[filled, None]
        reseeded = False
        for j in np.flatnonzero(~filled):
            # reseed to the point farthest from its centroid
            far = int(np.argmax(dmin))
            C[j] = P[far]
            dmin[far] = 0.0
            reseeded = True
        if labels is not None and not reseeded and np.array_equal(labels, new_labels):
            break
        labels = new_labels
    labels, dmin = _assign(P, C)
    return C, labels, float(dmin.sum()), it


def kmeans(points, m, niter=100, nredo=5, rng=None):
    """Lloyd's algorithm with k-means++ seeding

    Parameters
    ----------
    points : array_like
        Sequence of SimplexVec or an (n, r) array.
    m : int
        Number of clusters.
    niter : int, optional
        Lloyd iterations per restart.
    nredo : int, optional
        Restarts; the lowest inertia wins, ties to the earliest restart.
    rng : np.random.Generator, optional

    Returns
    -------
    ClusterModel

    Raises
    ------
    InsufficientDistinctPoints
        When fewer than ``m`` distinct points are given.
    """
    P = _as_points(points)
    if m < 1:
        raise InvalidInput(f"cluster count must be positive, got {m}")
    n_distinct = np.unique(P, axis=0).shape[0]
    if n_distinct < m:
        raise InsufficientDistinctPoints(
            f"{n_distinct} distinct points cannot form {m} clusters"
        )
    rng = np.random.default_rng() if rng is None else rng

    best = None
    for _ in range(max(1, nredo)):
        C, labels, inertia, it = _lloyd(P, _kmeanspp(P, m, rng), niter)
        if best is None or inertia < best.inertia:
            best = ClusterModel(C, inertia, labels, it)
    return best


def oracle_point_mass_groups(points, epsilon, n_total=None, match_tol=1e-9):
    """Group exactly repeated discriminator outputs

    Distinct values are visited in lexicographic order and each joins the
    first earlier group whose leading value is within ``match_tol`` in every
    coordinate. Groups holding at least ``epsilon`` of ``n_total`` points get labels ``0..L-1`` (in
    lexicographic order of their values); every other point goes to the
    residual group ``L``.

    Parameters
    ----------
    points : array_like
        Exact oracle outputs, shape (n, r).
    epsilon : float
        Mass threshold.
    n_total : int, optional
        Denominator of the masses, ``n`` when omitted.
    match_tol : float, optional

    Returns
    -------
    ids : np.ndarray
        Group of each point.
    masses : np.ndarray
        Mass of each group, length ``L + 1`` (the residual last).
    representatives : np.ndarray
        (L, r) value of each labeled group.
    """
    P = _as_points(points)
    n_total = P.shape[0] if n_total is None else int(n_total)
    values, inverse, counts = np.unique(P, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()

    # values are sorted on the first column, so a leader further than
    # match_tol below the current value never matches again
    group = np.empty(len(values), dtype=int)
    leaders = np.empty(len(values), dtype=int)
    n_groups = start = 0
    for j, v in enumerate(values):
        while start < n_groups and values[leaders[start], 0] < v[0] - match_tol:
            start += 1
        dist = np.abs(values[leaders[start:n_groups]] - v).max(axis=1, initial=0.0)
        hit = np.flatnonzero(dist <= match_tol)
        if hit.size:
            group[j] = start + hit[0]
        else:
            group[j] = n_groups
            leaders[n_groups] = j
            n_groups += 1

    sizes = np.bincount(group, weights=counts, minlength=n_groups)
    heavy = sizes / n_total >= epsilon
    L = int(heavy.sum())
    relabel = np.full(n_groups, L)
    relabel[heavy] = np.arange(L)
    ids = relabel[group[inverse]]
    masses = np.bincount(ids, minlength=L + 1) / n_total
    return ids, masses, values[leaders[:n_groups][heavy]]


def assign_point_masses(points, representatives, match_tol=1e-9):
    """Map points to the labeled group they equal, else to the residual group"""
    P = _as_points(points)
    R = np.atleast_2d(np.asarray(representatives, dtype=float))
    L = R.shape[0] if R.size else 0
    ids = np.full(P.shape[0], L)
    if L:
        dist = cdist(P, R, "chebyshev")
        hit = dist.min(axis=1) <= match_tol
        ids[hit] = np.argmin(dist, axis=1)[hit]
    return ids


def tabularize(cluster_ids, domains, m, r):
    r"""Empirical cluster distribution per domain

    Column :math:`b` of the result is
    :math:`\hat q(c(X) = a | D = b) = \#\{i: c_i = a, d_i = b\} / \#\{i: d_i = b\}`.

    Returns
    -------
    counts : TabularCounts
    q_cd : StochasticMatrix
        :math:`m \times r` matrix :math:`\hat Q_{c(X)|D}`.

    Raises
    ------
    EmptyDomain
        Naming the first domain without records.
    """
    c = np.asarray(cluster_ids, dtype=int).ravel()
    d = np.asarray(domains, dtype=int).ravel()
    if c.size != d.size:
        raise ShapeMismatch(f"{c.size} cluster ids but {d.size} domains")
    if c.size and (c.min() < 0 or c.max() >= m):
        raise InvalidInput(f"cluster ids must lie in 0..{m - 1}")
    if d.size and (d.min() < 0 or d.max() >= r):
        raise InvalidInput(f"domains must lie in 0..{r - 1}")
    counts = np.zeros((m, r), dtype=int)
    np.add.at(counts, (c, d), 1)
    table = TabularCounts(counts)
    return table, table.to_matrix()


def write_assignments_csv(path, cluster_ids, domains, index=None):
    """Write ``index,cluster,domain`` rows"""
    df = pd.DataFrame(
        {
            "index": np.arange(len(cluster_ids)) if index is None else np.asarray(index, dtype=int),
            "cluster": np.asarray(cluster_ids, dtype=int),
            "domain": np.asarray(domains, dtype=int),
        }
    )
    df.to_csv(path, index=False)
