# -*- coding: utf-8 -*-
"""
Small dense linear-algebra kernel: least-squares solves through the
pseudo-inverse, 2-norm condition numbers and column normalization.

Matrices here are small (a few hundred rows at most), so dense
:math:`O(n^3)` factorizations are used throughout.
"""

import numpy as np
import scipy.linalg as la

from .errors import DegenerateInput, RankDeficient, ShapeMismatch, ZeroColumn
from .model import StochasticMatrix

__all__ = [
    "RANK_THRESHOLD",
    "condition_number_2norm",
    "pseudo_inverse_solve",
    "column_normalize",
]

RANK_THRESHOLD = 1e10
"""Condition numbers above this are treated as rank deficiency"""

CHOLESKY_THRESHOLD = 1e6
"""Normal equations are only used below this condition number"""


def condition_number_2norm(A):
    r"""2-norm condition number

    :math:`\kappa(A) = \sigma_{max} / \sigma_{min}` over the
    :math:`\min(r, k)` singular values of :math:`A`.

    Parameters
    ----------
    A : array_like
        Real matrix.

    Returns
    -------
    float
        Condition number, ``np.inf`` when
        :math:`\sigma_{min} < 10^{-14} \sigma_{max}`.

    Raises
    ------
    DegenerateInput
        If ``A`` is all zero.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    s = la.svdvals(A)
    if s.size == 0 or s[0] == 0.0:
        raise DegenerateInput("condition number of an all-zero matrix")
    if s[-1] < 1e-14 * s[0]:
        return np.inf
    return float(s[0] / s[-1])


def pseudo_inverse_solve(A, b, method="qr", cond=None):
    r"""Least-squares solve :math:`x = A^\dagger b`

    Parameters
    ----------
    A : array_like
        :math:`r \times k` matrix with linearly independent columns.
    b : array_like
        Right-hand side of length :math:`r`, or an :math:`r \times n` matrix
        of right-hand sides solved together.
    method : str, optional
        ``"qr"`` (default) or ``"cholesky"`` (normal equations; silently falls
        back to QR when the condition number is at least
        ``CHOLESKY_THRESHOLD``).
    cond : float, optional
        Precomputed condition number of ``A``.

    Returns
    -------
    np.ndarray
        Minimizer of :math:`\|Ax - b\|_2`, shaped like ``b`` with :math:`k`
        rows.

    Raises
    ------
    RankDeficient
        If the condition number of ``A`` exceeds ``RANK_THRESHOLD``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    r, k = A.shape
    if b.shape[0] != r:
        raise ShapeMismatch(f"A has {r} rows but b has {b.shape[0]}")
    if r < k:
        raise RankDeficient(f"{r}x{k} matrix cannot have independent columns")
    if cond is None:
        cond = condition_number_2norm(A)
    if not cond <= RANK_THRESHOLD:
        raise RankDeficient(f"matrix is rank deficient (condition number {cond:.3e})")

    if method == "cholesky" and cond < CHOLESKY_THRESHOLD:
        return _solveCholesky(A, b)
    elif method in ("qr", "cholesky"):
        return _solveQR(A, b)
    else:
        raise ValueError(f"Undefined solve method {method!r}")


def _solveQR(A, b):
    """Solve through the economic QR decomposition"""
    Q, R = la.qr(A, mode="economic")
    return la.solve_triangular(R, Q.T @ b)


def _solveCholesky(A, b):
    """Solve the normal equations with a Cholesky factor"""
    c, lower = la.cho_factor(A.T @ A)
    return la.cho_solve((c, lower), A.T @ b)


def column_normalize(A):
    """Scale columns to sum to one

    Parameters
    ----------
    A : array_like
        Non-negative matrix.

    Returns
    -------
    out : StochasticMatrix
        Column-normalized matrix.
    scales : np.ndarray
        Column sums, so that ``A == out.data * scales``.

    Raises
    ------
    ZeroColumn
        Naming the first column with zero sum.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    scales = A.sum(axis=0)
    zero = np.flatnonzero(scales <= 0)
    if zero.size:
        raise ZeroColumn(int(zero[0]))
    return StochasticMatrix(A / scales, normalize=True), scales
