# -*- coding: utf-8 -*-
"""
Synthetic latent label shift problems.

Two families are generated from a :class:`ProblemParams`:

- continuous instances whose class-conditional densities are mixtures of
  uniform blocks, with one class-exclusive anchor block per class;
- discrete (topic-model) instances given by an exact word-given-class matrix
  with anchor words.

Every instance draws from a single random stream seeded by
``ProblemParams.seed``, so equal parameters give bit-identical instances.
"""

import json

import numpy as np

from .adjust import q_d_given_y
from .dataset import SPLITS, DomainDataset
from .distributions import BlockMixture, MixtureSpec, UniformBlock
from .errors import (
    DatasetParseError,
    GenerationBudgetExceeded,
    InvalidInput,
    OutOfSupport,
    ShapeMismatch,
    ValidationError,
)
from .linalg import condition_number_2norm, column_normalize
from .model import ProblemParams, SimplexVec, StochasticMatrix

__all__ = [
    "MAX_ATTEMPTS",
    "sample_label_marginals",
    "class_quotas",
    "make_block_mixture",
    "sample_dataset",
    "OracleDiscriminator",
    "oracle_discriminator",
    "make_discrete_instance",
    "make_block_instance",
    "ProblemInstance",
]

MAX_ATTEMPTS = 10_000
"""Rejection budget when drawing label marginals"""


def sample_label_marginals(params, rng=None, max_attempts=MAX_ATTEMPTS):
    r"""Draw a well-conditioned label-marginal matrix

    Each column of :math:`Q_{Y|D}` is drawn from
    :math:`\mathrm{Dir}((\alpha/k) \mathbf{1}_k)`; the whole matrix is redrawn
    until its 2-norm condition number is at most ``kappa_max``.

    Parameters
    ----------
    params : ProblemParams
        Problem dimensions and generator knobs.
    rng : np.random.Generator, optional
        Random stream; ``params.rng()`` when omitted.
    max_attempts : int, optional
        Rejection budget.

    Returns
    -------
    StochasticMatrix
        :math:`k \times r` label marginals with rank :math:`k`.

    Raises
    ------
    GenerationBudgetExceeded
        When no draw is accepted within the budget.
    """
    rng = params.rng() if rng is None else rng
    conc = np.full(params.k, params.alpha / params.k)
    best = np.inf
    for attempt in range(1, max_attempts + 1):
        q = rng.dirichlet(conc, size=params.r).T
        if not np.all(np.isfinite(q)):
            continue
        cond = condition_number_2norm(q)
        best = min(best, cond)
        if cond <= params.kappa_max * (1 + 1e-9):
            return StochasticMatrix(q, normalize=True)
    raise GenerationBudgetExceeded(
        f"no label marginals with condition number <= {params.kappa_max} "
        f"after {max_attempts} attempts (best {best:.4g})",
        attempts=max_attempts,
        best_condition=best,
    )


def class_quotas(column, n):
    """Split ``n`` items in proportion to ``column`` by largest remainder

    Parameters
    ----------
    column : array_like
        Non-negative proportions summing to one.
    n : int
        Total count.

    Returns
    -------
    np.ndarray
        Integer quotas summing to ``n``. Leftover items go to the largest
        fractional parts, ties to the lowest index.
    """
    column = np.asarray(column, dtype=float)
    exact = n * column / column.sum()
    quotas = np.floor(exact).astype(int)
    left = int(n - quotas.sum())
    if left > 0:
        order = np.argsort(-(exact - quotas), kind="stable")
        quotas[order[:left]] += 1
    return quotas


def make_block_mixture(
    params, p=1, overlap_fraction=0.0, rng=None, n_shared=1, extent=None
):
    r"""Class densities made of uniform blocks

    Class :math:`y` puts weight :math:`1 - o` (``o = overlap_fraction``) on
    its anchor block :math:`[2y, 2y+1) \times [0,1)^{p-1}`. With
    :math:`o > 0` the remaining mass sits on ``n_shared`` blocks
    :math:`[2k + 2j, 2k + 2j + 1) \times [0,1)^{p-1}` common to all classes;
    with several shared blocks each class splits its shared mass with
    Dirichlet(1) weights drawn from ``rng``.

    Parameters
    ----------
    params : ProblemParams
        Supplies ``k`` and the anchor mass bound ``epsilon``.
    p : int, optional
        Feature dimension.
    overlap_fraction : float, optional
        Shared mass per class, in ``[0, 1)``.
    rng : np.random.Generator, optional
        Used only when ``n_shared > 1``.
    n_shared : int, optional
        Number of shared blocks.
    extent : float, optional
        Largest coordinate the layout may reach along the first axis.

    Returns
    -------
    MixtureSpec

    Raises
    ------
    ValidationError
        When ``p < 1``, ``overlap_fraction`` is out of range or
        ``overlap_fraction + epsilon > 1``.
    GenerationBudgetExceeded
        When the layout does not fit within ``extent``.
    """
    k = params.k
    if p < 1:
        raise ValidationError(f"feature dimension must be positive, got {p}")
    if not 0 <= overlap_fraction < 1:
        raise ValidationError(f"overlap_fraction must lie in [0, 1), got {overlap_fraction}")
    if overlap_fraction + params.epsilon > 1 + 1e-12:
        raise ValidationError(
            f"overlap_fraction + epsilon must not exceed 1 "
            f"({overlap_fraction} + {params.epsilon})"
        )
    if n_shared < 1:
        raise ValidationError(f"n_shared must be positive, got {n_shared}")
    n_shared = n_shared if overlap_fraction > 0 else 0
    reach = 2 * (k + n_shared) - 1
    if extent is not None and reach > extent:
        raise GenerationBudgetExceeded(
            f"{k} classes and {n_shared} shared blocks need extent {reach}, "
            f"only {extent} available",
            attempts=1,
        )

    def cell(i):
        lower = np.zeros(p)
        lower[0] = 2 * i
        return lower, lower + 1

    rng = params.rng() if rng is None else rng
    classes = []
    for y in range(k):
        lower, upper = cell(y)
        blocks = [UniformBlock(lower, upper, 1 - overlap_fraction, name=f"A{y}")]
        if n_shared:
            split = rng.dirichlet(np.ones(n_shared)) if n_shared > 1 else np.ones(1)
            for j in range(n_shared):
                lower, upper = cell(k + j)
                blocks.append(
                    UniformBlock(lower, upper, overlap_fraction * split[j], name=f"S{j}")
                )
        classes.append(BlockMixture(blocks, name=f"class {y}"))
    return MixtureSpec(classes, [0] * k, epsilon=params.epsilon - 1e-12)


def sample_dataset(q_yd, source, n_per_domain, splits=(0.6, 0.2, 0.2), rng=None):
    r"""Draw a multi-domain dataset

    Each split receives a share of ``n_per_domain`` points per domain
    (largest remainder over the split fractions). Within a split, domain
    :math:`d` gets ``class_quotas(q_yd[:, d], n)`` points of each class, and
    features are drawn from :math:`q(x|y)`.

    Parameters
    ----------
    q_yd : StochasticMatrix
        :math:`k \times r` label marginals.
    source : MixtureSpec or StochasticMatrix
        Continuous class densities, or an :math:`m \times k` word-given-class
        matrix whose samples are one-hot vectors of length :math:`m`.
    n_per_domain : int
        Points per domain over all splits.
    splits : tuple of float, optional
        Train, valid and test fractions.
    rng : np.random.Generator

    Returns
    -------
    DomainDataset
        Records ordered by split, then domain, shuffled within each block.
    """
    q = np.asarray(q_yd, dtype=float)
    k, r = q.shape
    if n_per_domain < 1:
        raise ValidationError(f"n_per_domain must be positive, got {n_per_domain}")
    fractions = np.asarray(splits, dtype=float)
    if fractions.size != len(SPLITS) or np.any(fractions < 0) or fractions.sum() <= 0:
        raise ValidationError(f"splits must be three non-negative fractions, got {splits}")
    rng = np.random.default_rng() if rng is None else rng

    if isinstance(source, MixtureSpec):
        if source.k != k:
            raise ShapeMismatch(f"mixture has {source.k} classes, q_yd has {k}")
        draw = source.sample_class
    else:
        q_xy = np.asarray(source, dtype=float)
        if q_xy.ndim != 2 or q_xy.shape[1] != k:
            raise ShapeMismatch(f"word matrix must have {k} columns")
        m = q_xy.shape[0]

        def draw(y, n, rng):
            words = rng.choice(m, size=n, p=q_xy[:, y] / q_xy[:, y].sum())
            return np.eye(m)[words]

    per_split = class_quotas(fractions, n_per_domain)
    X, D, Y, S = [], [], [], []
    for name, n_split in zip(SPLITS, per_split):
        for d in range(r):
            quotas = class_quotas(q[:, d], n_split)
            xs, ys = [], []
            for y in range(k):
                if quotas[y]:
                    xs.append(draw(y, quotas[y], rng))
                    ys.append(np.full(quotas[y], y))
            if not xs:
                continue
            order = rng.permutation(n_split)
            X.append(np.concatenate(xs)[order])
            Y.append(np.concatenate(ys)[order])
            D.append(np.full(n_split, d))
            S.append(np.full(n_split, name, dtype=object))
    return DomainDataset(
        np.concatenate(X), np.concatenate(D), np.concatenate(Y), np.concatenate(S), r=r
    )


class OracleDiscriminator:
    r"""Exact domain discriminator :math:`f(x) = q(d|x)`

    Class posteriors come from Bayes' rule with priors
    :math:`q(y) = \frac{1}{r} \sum_d q(y|d)`, and the domain posterior is
    :math:`f(x) = Q_{D|Y} \, g(x)`.

    Attributes
    ----------
    q_yd : StochasticMatrix
        True label marginals.
    q_dy : StochasticMatrix
        :math:`Q_{D|Y}`.
    prior : np.ndarray
        Class priors :math:`q(y)`.
    """

    def __init__(self, source, q_yd):
        self.source = source
        self.q_yd = q_yd if isinstance(q_yd, StochasticMatrix) else StochasticMatrix(q_yd)
        self.q_dy = q_d_given_y(self.q_yd)
        self.prior = self.q_yd.data.mean(axis=1)
        self.k, self.r = self.q_yd.shape
        if isinstance(source, MixtureSpec):
            if source.k != self.k:
                raise ShapeMismatch(f"mixture has {source.k} classes, q_yd has {self.k}")
            self.dim = source.dim
        else:
            self.source = np.asarray(source, dtype=float)
            if self.source.shape[1] != self.k:
                raise ShapeMismatch(f"word matrix must have {self.k} columns")
            self.dim = self.source.shape[0]

    def __call__(self, x):
        """Domain posterior of a single point as a SimplexVec"""
        x = np.asarray(x, dtype=float).reshape(1, self.dim)
        return SimplexVec(self.batch(x)[0])

    def _points(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, self.dim)
        if X.shape[1] != self.dim:
            raise ShapeMismatch(f"points must have dimension {self.dim}")
        return X

    def class_densities(self, X):
        r"""Matrix of :math:`q(x_i|y)`, shape (n, k)"""
        X = self._points(X)
        if isinstance(self.source, MixtureSpec):
            dens = self.source.class_densities(X)
        else:
            onehot = np.all((X == 0) | (X == 1), axis=1) & (X.sum(axis=1) == 1)
            if not np.all(onehot):
                i = int(np.flatnonzero(~onehot)[0])
                raise OutOfSupport(f"point {i} is not a one-hot word vector")
            dens = X @ self.source
        outside = dens.sum(axis=1) <= 0
        if np.any(outside):
            i = int(np.flatnonzero(outside)[0])
            raise OutOfSupport(f"point {i} lies outside the support of every class")
        return dens

    def class_posterior(self, X):
        r""":math:`g(x) = q(y|x)` for each row of ``X``, shape (n, k)"""
        joint = self.class_densities(X) * self.prior
        return joint / joint.sum(axis=1, keepdims=True)

    def batch(self, X):
        r""":math:`f(x) = q(d|x)` for each row of ``X``, shape (n, r)"""
        return self.class_posterior(X) @ self.q_dy.data.T

    def domain_adjusted_posterior(self, X, domains):
        r""":math:`q(y|x, d) \propto q(x|y) \, q(y|d)`, shape (n, k)"""
        domains = np.asarray(domains, dtype=int).ravel()
        joint = self.class_densities(X) * self.q_yd.data[:, domains].T
        total = joint.sum(axis=1, keepdims=True)
        if np.any(total <= 0):
            i = int(np.flatnonzero(total.ravel() <= 0)[0])
            raise OutOfSupport(f"point {i} has zero density in domain {domains[i]}")
        return joint / total


def oracle_discriminator(spec, q_yd):
    """Exact :math:`q(d|x)` for a generated instance

    Returns a callable mapping a feature vector to a SimplexVec over domains;
    see :class:`OracleDiscriminator`.
    """
    return OracleDiscriminator(spec, q_yd)


def make_discrete_instance(
    params, m=None, anchors_per_class=1, rng=None, n_per_domain=None, splits=(0.6, 0.2, 0.2)
):
    r"""Exact anchored topic-model instance

    :math:`Q_{X|Y}` is :math:`m \times k` and column-stochastic. Each class
    owns ``anchors_per_class`` anchor rows (positive only in its column, at
    shuffled positions); every other row is positive in all columns.
    :math:`Q_{X|D} = Q_{X|Y} Q_{Y|D}` is kept exactly.

    Parameters
    ----------
    params : ProblemParams
    m : int, optional
        Vocabulary size, ``params.m`` when omitted.
    anchors_per_class : int, optional
    rng : np.random.Generator, optional
        ``params.rng()`` when omitted.
    n_per_domain : int, optional
        When given, also sample a one-hot word dataset.
    splits : tuple of float, optional

    Returns
    -------
    ProblemInstance
    """
    rng = params.rng() if rng is None else rng
    k = params.k
    m = params.m if m is None else int(m)
    if anchors_per_class < 1:
        raise ValidationError("need at least one anchor word per class")
    if m < k * anchors_per_class:
        raise ValidationError(
            f"vocabulary of {m} words cannot hold {anchors_per_class} anchors for {k} classes"
        )

    q_yd = sample_label_marginals(params, rng)

    rows = rng.permutation(m)
    W = rng.uniform(0.05, 1.0, size=(m, k))
    anchor_rows = []
    for y in range(k):
        idx = rows[y * anchors_per_class : (y + 1) * anchors_per_class]
        W[idx] = 0.0
        W[idx, y] = rng.uniform(0.5, 1.5, size=idx.size)
        anchor_rows.append(np.sort(idx).tolist())
    q_xy, _ = column_normalize(W)

    dataset = None
    if n_per_domain is not None:
        dataset = sample_dataset(q_yd, q_xy, n_per_domain, splits, rng)

    return ProblemInstance(
        params, q_yd, q_xy=q_xy, dataset=dataset, anchor_rows=anchor_rows
    )


def make_block_instance(
    params,
    p=1,
    overlap_fraction=0.0,
    n_per_domain=1000,
    splits=(0.6, 0.2, 0.2),
    n_shared=1,
    rng=None,
):
    """Continuous block-mixture instance with a sampled dataset

    Draws, in order from one stream, the label marginals, the mixture layout
    and the dataset.
    """
    rng = params.rng() if rng is None else rng
    q_yd = sample_label_marginals(params, rng)
    spec = make_block_mixture(params, p, overlap_fraction, rng, n_shared=n_shared)
    dataset = sample_dataset(q_yd, spec, n_per_domain, splits, rng)
    return ProblemInstance(params, q_yd, spec=spec, dataset=dataset)


class ProblemInstance:
    r"""A generated latent label shift problem with its ground truth

    Attributes
    ----------
    params : ProblemParams
    q_yd_true : StochasticMatrix
        :math:`k \times r` label marginals.
    spec : MixtureSpec or None
        Class densities of a continuous instance.
    q_xy_true : StochasticMatrix or None
        Word-given-class matrix of a discrete instance.
    q_xd : StochasticMatrix or None
        Exact :math:`Q_{X|D}` of a discrete instance.
    dataset : DomainDataset or None
        Records with hidden labels exposed only for evaluation.
    anchor_rows : list or None
        Anchor word indices per class of a discrete instance.
    """

    def __init__(self, params, q_yd_true, spec=None, q_xy=None, dataset=None, anchor_rows=None):
        if (spec is None) == (q_xy is None):
            raise InvalidInput("an instance needs exactly one of spec and q_xy")
        self.params = params
        self.q_yd_true = (
            q_yd_true if isinstance(q_yd_true, StochasticMatrix) else StochasticMatrix(q_yd_true)
        )
        if self.q_yd_true.shape != (params.k, params.r):
            raise ShapeMismatch(
                f"q_yd has shape {self.q_yd_true.shape}, expected {(params.k, params.r)}"
            )
        self.spec = spec
        self.q_xy_true = None
        self.q_xd = None
        if q_xy is not None:
            self.q_xy_true = q_xy if isinstance(q_xy, StochasticMatrix) else StochasticMatrix(q_xy)
            self.q_xd = StochasticMatrix(
                self.q_xy_true.data @ self.q_yd_true.data, normalize=True
            )
        self.dataset = dataset
        self.anchor_rows = anchor_rows

    def __repr__(self):
        return f"ProblemInstance(kind={self.kind!r}, {self.params!r})"

    @property
    def kind(self):
        return "blocks" if self.spec is not None else "discrete"

    def oracle(self):
        """Exact domain discriminator of this instance"""
        source = self.spec if self.spec is not None else self.q_xy_true.data
        return OracleDiscriminator(source, self.q_yd_true)

    def ground_truth(self):
        """Ground truth as a JSON-ready dictionary"""
        d = {
            "kind": self.kind,
            **{
                key: self.params.to_dict()[key]
                for key in ("k", "r", "alpha", "kappa_max", "epsilon", "m", "seed")
            },
            "q_yd": self.q_yd_true.tolist(),
        }
        if self.spec is not None:
            d["spec"] = self.spec.to_dict()
        else:
            d["q_xy"] = self.q_xy_true.tolist()
            d["anchor_rows"] = self.anchor_rows
        if self.dataset is not None and self.dataset.labels is not None:
            d["labels"] = self.dataset.labels.tolist()
        return d

    def write_ground_truth(self, path, config=None):
        d = self.ground_truth()
        if config is not None:
            d["config"] = config
        with open(path, "w") as f:
            json.dump(d, f, indent=2)
            f.write("\n")

    @classmethod
    def read_ground_truth(cls, path, dataset=None):
        """
        Rebuild an instance from a ground-truth JSON file.

        When ``dataset`` hides its labels, the stored labels are attached to
        a copy of it.

        Raises
        ------
        DatasetParseError
            When the file is not a JSON object, or lacks a key.
        ValidationError
            When it holds invalid matrices.
        """
        try:
            with open(path) as f:
                d = json.load(f)
        except json.JSONDecodeError as e:
            raise DatasetParseError(f"{path}: {e.msg}", line=e.lineno) from e
        except UnicodeDecodeError as e:
            raise DatasetParseError(f"{path}: not UTF-8 text at byte {e.start}") from e
        if not isinstance(d, dict):
            raise DatasetParseError(f"{path}: expected a JSON object", line=1)
        try:
            params = ProblemParams(
                d["k"],
                d["r"],
                alpha=d["alpha"],
                kappa_max=d["kappa_max"],
                epsilon=d["epsilon"],
                m=d["m"],
                seed=d["seed"],
                allow_small_m=True,
            )
            q_yd = StochasticMatrix(d["q_yd"])
            if dataset is not None and "labels" in d and not dataset.has_labels:
                labels = np.asarray(d["labels"], dtype=int)
                if labels.size != dataset.n:
                    raise ValidationError(
                        f"ground truth has {labels.size} labels, dataset has {dataset.n} rows"
                    )
                dataset = DomainDataset(
                    dataset.features, dataset.domains, labels, dataset.splits, r=dataset.r
                )
            if "spec" in d:
                return cls(params, q_yd, spec=MixtureSpec.from_dict(d["spec"]), dataset=dataset)
            return cls(
                params,
                q_yd,
                q_xy=StochasticMatrix(d["q_xy"]),
                dataset=dataset,
                anchor_rows=d.get("anchor_rows"),
            )
        except KeyError as e:
            raise DatasetParseError(f"ground truth file {path} lacks key {e}") from e
        except ValidationError:
            raise
        except (TypeError, ValueError) as e:
            raise DatasetParseError(f"ground truth file {path} has a malformed entry ({e})") from e
