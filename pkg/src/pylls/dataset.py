# -*- coding: utf-8 -*-

import re

import numpy as np
import pandas as pd

from .errors import DatasetParseError, InvalidInput, ShapeMismatch

__all__ = ["SPLITS", "HIDDEN_LABEL", "DomainDataset"]

SPLITS = ("train", "valid", "test")

HIDDEN_LABEL = -1
"""Label column value marking a concealed class"""


class DomainDataset:
    r"""Unlabeled multi-domain data

    A sequence of records :math:`(x_i, d_i, y_i)` with a split tag per record.
    The class labels :math:`y_i` are hidden ground truth: pipeline stages
    receive the label-stripped view returned by :meth:`without_labels`, and
    only evaluation reads :attr:`labels`.

    Attributes
    ----------
    features : np.ndarray
        Feature matrix, shape (n, p).
    domains : np.ndarray
        Domain index per record, in ``0..r-1``.
    labels : np.ndarray or None
        Class index per record, ``-1`` where hidden; ``None`` for a
        label-stripped view.
    splits : np.ndarray
        Split tag per record, one of ``"train"``, ``"valid"``, ``"test"``.
    r : int
        Number of domains.
    """

    def __init__(self, features, domains, labels=None, splits=None, r=None):
        features = np.asarray(features, dtype=float)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        if features.ndim != 2:
            raise ShapeMismatch("features must be a 2-D array")
        n = features.shape[0]

        domains = np.asarray(domains, dtype=int).ravel()
        if domains.size != n:
            raise ShapeMismatch(f"{n} feature rows but {domains.size} domains")
        if n and domains.min() < 0:
            raise InvalidInput("domain indices must be non-negative")

        if labels is not None:
            labels = np.asarray(labels, dtype=int).ravel()
            if labels.size != n:
                raise ShapeMismatch(f"{n} feature rows but {labels.size} labels")
            if n and labels.min() < HIDDEN_LABEL:
                raise InvalidInput("labels must be non-negative or -1 (hidden)")

        if splits is None:
            splits = np.full(n, "train", dtype=object)
        splits = np.asarray(splits, dtype=object).ravel()
        if splits.size != n:
            raise ShapeMismatch(f"{n} feature rows but {splits.size} split tags")
        bad = set(splits) - set(SPLITS)
        if bad:
            raise InvalidInput(f"unknown split tags {sorted(bad)}")

        self.features = features
        self.domains = domains
        self.labels = labels
        self.splits = splits
        if r is None:
            r = int(domains.max()) + 1 if n else 0
        elif n and domains.max() >= r:
            raise InvalidInput(f"domain index {domains.max()} out of range for r={r}")
        self.r = int(r)

    def __repr__(self):
        counts = {s: int(np.sum(self.splits == s)) for s in SPLITS}
        return f"DomainDataset(n={self.n}, p={self.p}, r={self.r}, splits={counts})"

    def __len__(self):
        return self.n

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def p(self):
        return self.features.shape[1]

    @property
    def has_labels(self):
        """True when every record carries its class"""
        return (
            self.labels is not None
            and self.n > 0
            and bool(np.all(self.labels != HIDDEN_LABEL))
        )

    def _subset(self, mask):
        return DomainDataset(
            self.features[mask],
            self.domains[mask],
            None if self.labels is None else self.labels[mask],
            self.splits[mask],
            r=self.r,
        )

    def split(self, name):
        """Records of one split, or of several given as a tuple"""
        names = (name,) if isinstance(name, str) else tuple(name)
        for s in names:
            if s not in SPLITS:
                raise InvalidInput(f"unknown split {s!r}")
        return self._subset(np.isin(self.splits, names))

    def without_labels(self):
        """View with the label column removed"""
        return DomainDataset(self.features, self.domains, None, self.splits, r=self.r)

    def hidden(self):
        """Copy with every label replaced by the hidden marker"""
        return DomainDataset(
            self.features,
            self.domains,
            np.full(self.n, HIDDEN_LABEL),
            self.splits,
            r=self.r,
        )

    def domain_counts(self):
        """Number of records per domain"""
        return np.bincount(self.domains, minlength=self.r)

    def to_frame(self):
        """Dataset as a DataFrame with columns ``split,domain,label,x0..``"""
        labels = self.labels if self.labels is not None else np.full(self.n, HIDDEN_LABEL)
        df = pd.DataFrame(
            {"split": self.splits, "domain": self.domains, "label": labels}
        )
        xcols = pd.DataFrame(
            self.features, columns=[f"x{j}" for j in range(self.p)]
        )
        return pd.concat([df, xcols], axis=1)

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format="%.17g")

    @classmethod
    def from_csv(cls, path, r=None):
        """
        Read a dataset file.

        Parameters
        ----------
        path : str or path-like
            CSV file with header ``split,domain,label,x0,...,x{p-1}``.
        r : int, optional
            Number of domains; inferred from the data when omitted.

        Returns
        -------
        DomainDataset

        Raises
        ------
        DatasetParseError
            Naming the first offending line (the header is line 1).
        """
        try:
            df = pd.read_csv(path, dtype=str, keep_default_na=False)
        except pd.errors.ParserError as e:
            match = re.search(r"line (\d+)", str(e))
            line = int(match.group(1)) if match else None
            raise DatasetParseError(f"malformed row ({e})", line=line) from e
        except pd.errors.EmptyDataError as e:
            raise DatasetParseError("empty file", line=1) from e
        except UnicodeDecodeError as e:
            raise DatasetParseError(f"not UTF-8 text at byte {e.start}") from e

        cols = list(df.columns)
        p = len(cols) - 3
        expected = ["split", "domain", "label"] + [f"x{j}" for j in range(max(p, 0))]
        if p < 1 or cols != expected:
            raise DatasetParseError(
                f"header must be {','.join(expected[:4])},..., got {','.join(cols)}",
                line=1,
            )

        bad_split = ~df["split"].isin(SPLITS).to_numpy()
        _raise_first(bad_split, "split must be one of train, valid, test")

        domains = pd.to_numeric(df["domain"], errors="coerce").to_numpy()
        _raise_first(
            ~_is_whole(domains) | (domains < 0), "domain must be a non-negative integer"
        )
        labels = pd.to_numeric(df["label"], errors="coerce").to_numpy()
        _raise_first(
            ~_is_whole(labels) | (labels < HIDDEN_LABEL), "label must be an integer >= -1"
        )
        x = df[expected[3:]].apply(pd.to_numeric, errors="coerce").to_numpy(float)
        _raise_first(~np.all(np.isfinite(x), axis=1), "features must be finite numbers")

        if r is not None and domains.size and domains.max() >= r:
            _raise_first(domains >= r, f"domain out of range for r={r}")

        return cls(
            x,
            domains.astype(int),
            labels.astype(int),
            df["split"].to_numpy(dtype=object),
            r=r,
        )


def _is_whole(values):
    return np.isfinite(values) & (np.floor(values) == values)


def _raise_first(bad, message):
    bad = np.flatnonzero(bad)
    if bad.size:
        # data row i sits on line i + 2
        raise DatasetParseError(message, line=int(bad[0]) + 2)
