# -*- coding: utf-8 -*-

import json

import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
from scipy.special import softmax

from .errors import InvalidInput, ShapeMismatch, TrainingDiverged, ValidationError
from .model import SimplexVec

__all__ = [
    "LOG_CLAMP",
    "TrainConfig",
    "DiscriminatorModel",
    "cross_entropy",
    "cross_entropy_grad",
    "train_discriminator",
    "predict_domain_posterior",
    "gradient_check",
]

LOG_CLAMP = 1e-12
"""Probabilities are clamped to this before taking logs"""

ARCHITECTURES = ("linear", "mlp")


class TrainConfig:
    """Options for training a domain discriminator

    :Attributes:
      - learning_rate (float): Initial step size (default 0.1)\n
      - max_epochs (int): Epoch limit (default 100)\n
      - batch_size (int): Mini-batch size (default 128)\n
      - patience (int): Epochs without validation improvement before
        stopping (default 10)\n
      - weight_decay (float): L2 penalty on weights, not biases (default 0)\n
      - lr_decay (float): Per-epoch learning rate factor (default 0.97)\n
      - momentum (float): Heavy-ball momentum (default 0.9)\n
      - architecture (str): "linear" (softmax regression) or "mlp" (one
        hidden ReLU layer) (default "linear")\n
      - hidden (int): Hidden width of "mlp" (default 64)\n
      - seed (int): Seed of the initialization and shuffling stream\n
      - verbose (bool): Print the loss per epoch (default False)\n
    """

    def __init__(
        self,
        learning_rate=0.1,
        max_epochs=100,
        batch_size=128,
        patience=10,
        weight_decay=0.0,
        lr_decay=0.97,
        momentum=0.9,
        architecture="linear",
        hidden=64,
        seed=0,
        verbose=False,
    ):
        self.learning_rate = float(learning_rate)
        self.max_epochs = int(max_epochs)
        self.batch_size = int(batch_size)
        self.patience = int(patience)
        self.weight_decay = float(weight_decay)
        self.lr_decay = float(lr_decay)
        self.momentum = float(momentum)
        self.architecture = architecture
        self.hidden = int(hidden)
        self.seed = int(seed)
        self.verbose = bool(verbose)
        self._check_input()

    def __repr__(self):
        return f"TrainConfig({', '.join(f'{k}={v!r}' for k, v in self.to_dict().items())})"

    def _check_input(self):
        if not self.learning_rate > 0:
            raise ValidationError("learning_rate must be positive")
        for name in ("max_epochs", "batch_size", "patience", "hidden"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")
        if self.weight_decay < 0:
            raise ValidationError("weight_decay must be non-negative")
        if not 0 < self.lr_decay <= 1:
            raise ValidationError("lr_decay must lie in (0, 1]")
        if not 0 <= self.momentum < 1:
            raise ValidationError("momentum must lie in [0, 1)")
        if self.architecture not in ARCHITECTURES:
            raise ValidationError(
                f"architecture must be one of {ARCHITECTURES}, got {self.architecture!r}"
            )
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")

    def replace(self, **kwargs):
        d = self.to_dict()
        d.update(kwargs)
        return TrainConfig(**d)

    def to_dict(self):
        return {
            "learning_rate": self.learning_rate,
            "max_epochs": self.max_epochs,
            "batch_size": self.batch_size,
            "patience": self.patience,
            "weight_decay": self.weight_decay,
            "lr_decay": self.lr_decay,
            "momentum": self.momentum,
            "architecture": self.architecture,
            "hidden": self.hidden,
            "seed": self.seed,
            "verbose": self.verbose,
        }


def _dense(X, W, b):
    # Row-wise reduction so a point's output does not depend on its batch
    return (X[:, :, None] * W[None, :, :]).sum(axis=1) + b


class DiscriminatorModel:
    r"""Parametric map :math:`x \mapsto q(d|x)`

    Inputs are standardized with the mean and scale of the training features,
    then passed through either one dense layer (``"linear"``) or a dense ReLU
    layer followed by a dense layer (``"mlp"``). A softmax turns the final
    logits into a distribution over the :math:`r` domains.

    :Attributes:
      - architecture (str): "linear" or "mlp"\n
      - p (int): input dimension\n
      - r (int): number of domains\n
      - params (dict): weight matrices "W1", "b1" (and "W2", "b2" for mlp)\n
      - mean, scale (np.ndarray): input standardization\n
      - train_loss, valid_loss (list): per-epoch loss curves\n
      - best_epoch (int): epoch of the returned snapshot, 0-based\n
    """

    def __init__(self, architecture, p, r, params=None, mean=None, scale=None, hidden=64):
        if architecture not in ARCHITECTURES:
            raise ValidationError(f"unknown architecture {architecture!r}")
        self.architecture = architecture
        self.p = int(p)
        self.r = int(r)
        self.hidden = int(hidden) if architecture == "mlp" else None
        self.mean = np.zeros(self.p) if mean is None else np.asarray(mean, dtype=float)
        self.scale = np.ones(self.p) if scale is None else np.asarray(scale, dtype=float)
        if params is None:
            params = self._zero_params()
        self.params = {key: np.asarray(v, dtype=float) for key, v in params.items()}
        self.train_loss = []
        self.valid_loss = []
        self.best_epoch = None

    def __repr__(self):
        return f"DiscriminatorModel({self.architecture!r}, p={self.p}, r={self.r})"

    def _zero_params(self):
        if self.architecture == "linear":
            return {"W1": np.zeros((self.p, self.r)), "b1": np.zeros(self.r)}
        return {
            "W1": np.zeros((self.p, self.hidden)),
            "b1": np.zeros(self.hidden),
            "W2": np.zeros((self.hidden, self.r)),
            "b2": np.zeros(self.r),
        }

    def _standardize(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, self.p)
        if X.shape[1] != self.p:
            raise ShapeMismatch(f"model expects {self.p} features, got {X.shape[1]}")
        if not np.all(np.isfinite(X)):
            raise InvalidInput("features must be finite")
        return (X - self.mean) / self.scale

    def _forward(self, Xs):
        """Logits and the hidden activations"""
        P = self.params
        if self.architecture == "linear":
            return _dense(Xs, P["W1"], P["b1"]), None
        H = np.maximum(_dense(Xs, P["W1"], P["b1"]), 0.0)
        return _dense(H, P["W2"], P["b2"]), H

    def logits(self, X):
        return self._forward(self._standardize(X))[0]

    def predict_proba(self, X):
        """Domain posteriors for each row of ``X``, shape (n, r)"""
        return softmax(self.logits(X), axis=1)

    def predict(self, x):
        """Domain posterior of a single point"""
        return predict_domain_posterior(self, x)

    def loss_and_grad(self, X, targets, weight_decay=0.0, standardized=False):
        """
        Penalized cross-entropy and its gradient.

        Parameters
        ----------
        X : np.ndarray
            Features, shape (n, p).
        targets : np.ndarray
            Domain indices.
        weight_decay : float, optional
            Coefficient of :math:`\\frac{1}{2} \\|W\\|^2` summed over weights.
        standardized : bool, optional
            Whether ``X`` is already standardized.

        Returns
        -------
        loss : float
        grads : dict
            Same keys as ``params``.
        """
        Xs = X if standardized else self._standardize(X)
        targets = np.asarray(targets, dtype=int)
        Z, H = self._forward(Xs)
        probs = softmax(Z, axis=1)
        loss = cross_entropy(probs, targets)
        dZ = cross_entropy_grad(Z, targets)

        P = self.params
        grads = {}
        if self.architecture == "linear":
            grads["W1"] = Xs.T @ dZ
            grads["b1"] = dZ.sum(axis=0)
        else:
            grads["W2"] = H.T @ dZ
            grads["b2"] = dZ.sum(axis=0)
            dH = (dZ @ P["W2"].T) * (H > 0)
            grads["W1"] = Xs.T @ dH
            grads["b1"] = dH.sum(axis=0)

        if weight_decay:
            for key in P:
                if key.startswith("W"):
                    loss += 0.5 * weight_decay * np.sum(P[key] ** 2)
                    grads[key] = grads[key] + weight_decay * P[key]
        return float(loss), grads

    def copy_params(self):
        return {key: v.copy() for key, v in self.params.items()}

    def to_dict(self):
        return {
            "architecture": self.architecture,
            "p": self.p,
            "r": self.r,
            "hidden": self.hidden,
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "params": {key: v.tolist() for key, v in self.params.items()},
            "best_epoch": self.best_epoch,
        }

    @classmethod
    def from_dict(cls, d):
        model = cls(
            d["architecture"],
            d["p"],
            d["r"],
            params=d["params"],
            mean=d["mean"],
            scale=d["scale"],
            hidden=d.get("hidden") or 64,
        )
        model.best_epoch = d.get("best_epoch")
        return model

    def to_json(self, path, config=None):
        d = self.to_dict()
        if config is not None:
            d["config"] = config
        with open(path, "w") as f:
            json.dump(d, f, indent=2)
            f.write("\n")

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def loss_frame(self):
        """Loss curves as a DataFrame with columns ``epoch,train_loss,valid_loss``"""
        return pd.DataFrame(
            {
                "epoch": np.arange(len(self.train_loss)),
                "train_loss": self.train_loss,
                "valid_loss": self.valid_loss,
            }
        )

    def write_loss_csv(self, path):
        self.loss_frame().to_csv(path, index=False, float_format="%.17g")

    def plot_loss(self, ax=None, **kwargs):
        """
        Plots the training and validation loss curves, marking the
        early-stopping epoch.
        """
        show = False
        if ax is None:
            show = True
            _, ax = plt.subplots()

        df = self.loss_frame()
        ax.plot(df["epoch"], df["train_loss"], label="train", **kwargs)
        ax.plot(df["epoch"], df["valid_loss"], label="valid", **kwargs)
        if self.best_epoch is not None:
            ax.axvline(self.best_epoch, color="k", ls="--", lw=0.8)
        ax.set_xlabel("Epoch")
        ax.set_ylabel("Cross entropy")
        ax.legend()

        if show:
            plt.show()

        return ax


def cross_entropy(predictions, targets):
    r"""Mean negative log-probability of the true domain

    :math:`L = -\frac{1}{n} \sum_i \log [f(x_i)]_{d_i}` with probabilities
    clamped to ``LOG_CLAMP``.

    Parameters
    ----------
    predictions : array_like
        Sequence of SimplexVec or an (n, r) array of probabilities.
    targets : array_like
        Domain index per prediction.

    Returns
    -------
    float

    Raises
    ------
    ShapeMismatch
        When the lengths differ.
    """
    P = np.atleast_2d(np.asarray([np.asarray(p) for p in predictions], dtype=float))
    targets = np.asarray(targets, dtype=int).ravel()
    if P.shape[0] != targets.size:
        raise ShapeMismatch(f"{P.shape[0]} predictions but {targets.size} targets")
    if targets.size == 0:
        raise ShapeMismatch("cross entropy of an empty batch")
    picked = P[np.arange(targets.size), targets]
    return float(-np.mean(np.log(np.maximum(picked, LOG_CLAMP))))


def cross_entropy_grad(logits, targets):
    """Gradient of the mean cross-entropy of ``softmax(logits)`` w.r.t. the logits"""
    logits = np.atleast_2d(np.asarray(logits, dtype=float))
    targets = np.asarray(targets, dtype=int).ravel()
    if logits.shape[0] != targets.size:
        raise ShapeMismatch(f"{logits.shape[0]} logit rows but {targets.size} targets")
    G = softmax(logits, axis=1)
    G[np.arange(targets.size), targets] -= 1.0
    return G / targets.size


def _check_data(train, valid):
    if train.n == 0 or valid.n == 0:
        raise InvalidInput("training and validation sets must be non-empty")
    if train.p != valid.p:
        raise ShapeMismatch(f"train has {train.p} features, valid has {valid.p}")
    for name, ds in (("train", train), ("valid", valid)):
        if not np.all(np.isfinite(ds.features)):
            raise InvalidInput(f"{name} features must be finite")


def _init_params(model, rng):
    p, r = model.p, model.r
    if model.architecture == "linear":
        return {"W1": np.zeros((p, r)), "b1": np.zeros(r)}
    h = model.hidden
    return {
        "W1": rng.normal(0.0, np.sqrt(2.0 / p), size=(p, h)),
        "b1": np.zeros(h),
        "W2": rng.normal(0.0, np.sqrt(1.0 / h), size=(h, r)),
        "b2": np.zeros(r),
    }


def train_discriminator(train, valid, cfg=None, r=None):
    """Fit a domain discriminator by minimizing cross-entropy

    Mini-batch gradient descent with momentum and per-epoch learning-rate
    decay. After every epoch the full training and validation losses are
    recorded; the parameters with the lowest validation loss are returned,
    and training stops once ``cfg.patience`` epochs pass without
    improvement.

    Parameters
    ----------
    train, valid : DomainDataset
        Only features and domains are read.
    cfg : TrainConfig, optional
    r : int, optional
        Number of domains, by default the larger ``r`` of the two datasets.

    Returns
    -------
    DiscriminatorModel

    Raises
    ------
    TrainingDiverged
        When a loss becomes non-finite.
    """
    cfg = TrainConfig() if cfg is None else cfg
    _check_data(train, valid)
    r = max(train.r, valid.r) if r is None else int(r)
    p = train.p

    mean = train.features.mean(axis=0)
    scale = train.features.std(axis=0)
    scale[scale <= 1e-12] = 1.0
    model = DiscriminatorModel(cfg.architecture, p, r, mean=mean, scale=scale, hidden=cfg.hidden)
    if r == 1:
        # a single domain leaves nothing to learn
        model.best_epoch = 0
        return model

    rng = np.random.default_rng(cfg.seed)
    model.params = _init_params(model, rng)
    Xt = model._standardize(train.features)
    Xv = model._standardize(valid.features)
    dt, dv = train.domains, valid.domains

    velocity = {key: np.zeros_like(v) for key, v in model.params.items()}
    best_loss, best_params, wait = np.inf, model.copy_params(), 0
    lr = cfg.learning_rate

    for epoch in range(cfg.max_epochs):
        order = rng.permutation(train.n)
        for start in range(0, train.n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = model.loss_and_grad(
                Xt[idx], dt[idx], cfg.weight_decay, standardized=True
            )
            if not np.isfinite(loss):
                raise TrainingDiverged(epoch, loss)
            for key in model.params:
                velocity[key] = cfg.momentum * velocity[key] - lr * grads[key]
                model.params[key] = model.params[key] + velocity[key]
        lr *= cfg.lr_decay

        train_loss = model.loss_and_grad(Xt, dt, standardized=True)[0]
        valid_loss = model.loss_and_grad(Xv, dv, standardized=True)[0]
        if not (np.isfinite(train_loss) and np.isfinite(valid_loss)):
            raise TrainingDiverged(epoch, train_loss)
        model.train_loss.append(train_loss)
        model.valid_loss.append(valid_loss)
        if cfg.verbose:
            print(f"epoch {epoch:4d}  train {train_loss:.6f}  valid {valid_loss:.6f}")

        if valid_loss < best_loss:
            best_loss, best_params, wait = valid_loss, model.copy_params(), 0
            model.best_epoch = epoch
        else:
            wait += 1
            if wait >= cfg.patience:
                if cfg.verbose:
                    print(f"early stopping after epoch {epoch}, best {model.best_epoch}")
                break

    model.params = best_params
    return model


def predict_domain_posterior(model, x):
    """
    Domain posterior :math:`\\hat f(x)` of one feature vector.

    Raises
    ------
    InvalidInput
        When ``x`` has non-finite entries.
    """
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return SimplexVec(model.predict_proba(x)[0], tol=1e-9)


def gradient_check(model, X, targets, weight_decay=0.0, h=1e-5):
    """Compare analytic gradients against central finite differences

    Returns
    -------
    float
        Largest relative error over the parameter arrays,
        :math:`\\max|g - \\tilde g| / \\max(\\max|g|, \\max|\\tilde g|)`.
    """
    _, grads = model.loss_and_grad(X, targets, weight_decay)
    worst = 0.0
    for key, theta in model.params.items():
        fd = np.zeros_like(theta)
        flat = theta.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            up = model.loss_and_grad(X, targets, weight_decay)[0]
            flat[j] = orig - h
            down = model.loss_and_grad(X, targets, weight_decay)[0]
            flat[j] = orig
            fd.reshape(-1)[j] = (up - down) / (2 * h)
        denom = max(np.max(np.abs(grads[key])), np.max(np.abs(fd)), 1e-12)
        worst = max(worst, float(np.max(np.abs(grads[key] - fd)) / denom))
    return worst
