#!/usr/bin/python -tt
# -*- coding: utf-8 -*-

import numpy as np
import matplotlib.pyplot as plt

__all__ = ["Distribution"]


class Distribution:
    """Probability density on :math:`\\mathbb{R}^p`

    Base class of the class-conditional densities :math:`q(x|y)` used to build
    synthetic latent label shift problems. Derived classes implement ``pdf``,
    ``contains`` and ``sample``.

    Attributes:
      name (str):  Name of the density\n
      dim (int):   Dimension p of the feature space\n
    """

    def __init__(self, name="", dim=1):
        self.name = name
        self.dim = int(dim)
        self.dist_type = "BaseCls"

    def __repr__(self):
        string = self.name + ": " + self.dist_type + " distribution"
        return string

    def getName(self):
        return self.name

    def _as_points(self, x):
        """Reshape input to an (n, p) array of points"""
        x = np.asarray(x, dtype=float)
        if x.ndim <= 1 and self.dim == 1:
            x = x.reshape(-1, 1)
        return np.atleast_2d(x)

    # The following must be overridden in derived classes

    def pdf(self, x):
        """
        Probability density function at each row of x
        """
        raise NotImplementedError

    def contains(self, x):
        """
        Boolean mask: is each row of x in the support
        """
        raise NotImplementedError

    def sample(self, n, rng):
        """
        Return n points drawn with the generator rng as an (n, p) array
        """
        raise NotImplementedError

    def plot(self, ax=None, rng=None, **kwargs):
        """
        Plots the density along the first coordinate
        """
        rng = np.random.default_rng(0) if rng is None else rng
        samples = self.sample(1000, rng)[:, 0]
        pad = 0.1 * (np.max(samples) - np.min(samples) + 1e-12)
        x0 = np.linspace(np.min(samples) - pad, np.max(samples) + pad, 400)
        x = np.zeros((x0.size, self.dim))
        x[:, 0] = x0
        if self.dim > 1:
            x[:, 1:] = self.sample(1, rng)[0, 1:]

        show = False
        if ax is None:
            show = True
            _, ax = plt.subplots()

        ax.plot(x0, self.pdf(x), label=self.name, **kwargs)
        ax.legend()

        if show:
            plt.show()

        return ax
