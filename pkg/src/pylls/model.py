# -*- coding: utf-8 -*-

import numpy as np

from .errors import InvalidInput, ShapeMismatch, ValidationError

__all__ = ["SimplexVec", "StochasticMatrix", "ProblemParams"]

SIMPLEX_TOL = 1e-9
"""Tolerance on the sum of a stored simplex vector or stochastic column"""

ACCEPT_TOL = 1e-6
"""Largest deviation from unit sum accepted before normalization"""


class SimplexVec:
    r"""Probability vector

    A non-negative vector summing to one, used for domain posteriors
    :math:`f(x) = q(d|x)` (dimension :math:`r`) and label posteriors
    :math:`g(x) = q(y|x)` (dimension :math:`k`).

    Construction normalizes the entries; inputs whose sum deviates from one by
    more than ``tol`` are rejected unless ``normalize=True``.

    :Attributes:
      - entries (np.ndarray): the probabilities
      - dim (int): number of categories
    """

    def __init__(self, entries, tol=ACCEPT_TOL, normalize=False):
        entries = np.array(entries, dtype=float).ravel()
        if entries.size == 0:
            raise InvalidInput("SimplexVec must have at least one entry")
        if not np.all(np.isfinite(entries)):
            raise InvalidInput("SimplexVec entries must be finite")
        if np.any(entries < 0):
            raise InvalidInput("SimplexVec entries must be non-negative")
        total = entries.sum()
        if total <= 0:
            raise InvalidInput("SimplexVec entries sum to zero")
        if not normalize and abs(total - 1.0) > tol:
            raise InvalidInput(f"SimplexVec entries sum to {total}, not 1")
        self.entries = entries / total
        self.dim = entries.size

    def __repr__(self):
        return f"SimplexVec({np.array2string(self.entries, precision=4)})"

    def __len__(self):
        return self.dim

    def __getitem__(self, key):
        return self.entries[key]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def argmax(self):
        """Index of the largest entry, ties broken by lowest index"""
        return int(np.argmax(self.entries))


class StochasticMatrix:
    r"""Column-stochastic matrix

    Every entry is non-negative and every column sums to one. Houses
    :math:`Q_{Y|D}` (:math:`k \times r`), :math:`Q_{D|Y}` (:math:`r \times k`)
    and the word/cluster matrices :math:`Q_{X|Y}`, :math:`Q_{X|D}`.

    Columns are renormalized on construction; a column whose sum deviates from
    one by more than ``tol`` is rejected unless ``normalize=True``. Zero rows
    (empty clusters) are fine, zero columns are not.

    :Attributes:
      - data (np.ndarray): the matrix
      - rows (int): number of rows
      - cols (int): number of columns
    """

    orientation = "column"

    def __init__(self, data, tol=ACCEPT_TOL, normalize=False):
        data = np.array(data, dtype=float)
        if data.ndim == 1:
            data = data.reshape(-1, 1)
        if data.ndim != 2 or data.size == 0:
            raise ShapeMismatch("StochasticMatrix requires a non-empty 2-D array")
        if not np.all(np.isfinite(data)):
            raise InvalidInput("StochasticMatrix entries must be finite")
        if np.any(data < 0):
            raise InvalidInput("StochasticMatrix entries must be non-negative")
        sums = data.sum(axis=0)
        if np.any(sums <= 0):
            raise InvalidInput(
                f"StochasticMatrix column {int(np.argmin(sums))} has zero sum"
            )
        if not normalize and np.any(np.abs(sums - 1.0) > tol):
            raise InvalidInput(
                f"StochasticMatrix columns must sum to 1 (got {np.round(sums, 8)})"
            )
        self.data = data / sums
        self.rows, self.cols = self.data.shape

    def __repr__(self):
        return f"StochasticMatrix({self.rows}x{self.cols})\n{repr(self.data)}"

    def __getitem__(self, key):
        return self.data[key]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.data
        return self.data.astype(dtype)

    @property
    def shape(self):
        return self.data.shape

    def getMatrix(self):
        """Return the underlying array

        :Returns:
          - data (np.ndarray): column-stochastic matrix
        """
        return self.data

    def column(self, j):
        """Column ``j`` as a SimplexVec"""
        return SimplexVec(self.data[:, j])

    def permute_rows(self, order):
        """Return a new matrix whose row ``i`` is row ``order[i]`` of this one"""
        return StochasticMatrix(self.data[np.asarray(order)], normalize=True)

    def tolist(self):
        return self.data.tolist()


class ProblemParams:
    """Parameters of a latent label shift problem instance

    :Attributes:
      - k (int): number of classes
      - r (int): number of domains, ``r >= k``
      - alpha (float): Dirichlet concentration, ``alpha > 0``
      - kappa_max (float): largest accepted 2-norm condition number of
        :math:`Q_{Y|D}`, ``kappa_max >= 1``
      - epsilon (float): lower bound on the class-conditional anchor mass,
        ``0 < epsilon < 1``
      - m (int): number of clusters, ``m >= k`` unless ``allow_small_m``
      - seed (int): seed of the generation RNG stream
      - allow_small_m (bool): relax ``m >= k`` for cluster-count ablations
    """

    def __init__(
        self,
        k,
        r,
        alpha=0.5,
        kappa_max=3.0,
        epsilon=0.3,
        m=None,
        seed=0,
        allow_small_m=False,
    ):
        self.k = int(k)
        self.r = int(r)
        self.alpha = float(alpha)
        self.kappa_max = float(kappa_max)
        self.epsilon = float(epsilon)
        self.m = self.k if m is None else int(m)
        self.seed = int(seed)
        self.allow_small_m = bool(allow_small_m)
        self._check_input()

    def __repr__(self):
        return (
            f"ProblemParams(k={self.k}, r={self.r}, alpha={self.alpha}, "
            f"kappa_max={self.kappa_max}, epsilon={self.epsilon}, m={self.m}, "
            f"seed={self.seed})"
        )

    def __eq__(self, other):
        return isinstance(other, ProblemParams) and self.to_dict() == other.to_dict()

    def _check_input(self):
        """
        Check the assumptions on the problem dimensions and generator knobs.

        Raises
        ------
        ValidationError
            When any parameter is out of range.
        """
        if self.k < 1:
            raise ValidationError(f"k must be positive, got {self.k}")
        if self.r < self.k:
            raise ValidationError(
                f"need at least as many domains as classes (r={self.r} < k={self.k})"
            )
        if self.m < 1 or (self.m < self.k and not self.allow_small_m):
            raise ValidationError(f"need m >= k clusters (m={self.m}, k={self.k})")
        if not self.alpha > 0:
            raise ValidationError(f"alpha must be positive, got {self.alpha}")
        if not self.kappa_max >= 1:
            raise ValidationError(f"kappa_max must be >= 1, got {self.kappa_max}")
        if not 0 < self.epsilon < 1:
            raise ValidationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")

    def rng(self):
        """Fresh generator for this problem's seed"""
        return np.random.default_rng(self.seed)

    def replace(self, **kwargs):
        """Copy with some fields changed"""
        d = self.to_dict()
        d.update(kwargs)
        return ProblemParams(**d)

    def to_dict(self):
        return {
            "k": self.k,
            "r": self.r,
            "alpha": self.alpha,
            "kappa_max": self.kappa_max,
            "epsilon": self.epsilon,
            "m": self.m,
            "seed": self.seed,
            "allow_small_m": self.allow_small_m,
        }
