#!/usr/bin/python -tt
# -*- coding: utf-8 -*-

import numpy as np
from scipy.stats import uniform

from .distribution import Distribution
from ..errors import InvalidInput

__all__ = ["UniformBlock"]


class UniformBlock(Distribution):
    """Uniform distribution on an axis-aligned box

    The box is half-open, :math:`[lo_1, hi_1) \\times \\dots \\times
    [lo_p, hi_p)`, so two boxes that merely touch do not intersect.

    :Attributes:
      - lower (np.ndarray): lower corner\n
      - upper (np.ndarray): upper corner\n
      - weight (float): mixture weight when part of a BlockMixture\n
    """

    def __init__(self, lower, upper, weight=1.0, name=""):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.shape != upper.shape:
            raise InvalidInput("UniformBlock corners must have the same dimension")
        if np.any(upper <= lower):
            raise InvalidInput("UniformBlock upper corner must exceed lower corner")
        if not weight > 0:
            raise InvalidInput("UniformBlock weight must be positive")

        super().__init__(name=name, dim=lower.size)

        self.lower = lower
        self.upper = upper
        self.weight = float(weight)
        self.volume = float(np.prod(upper - lower))

        # use scipy to do the heavy lifting
        self.dist_obj = uniform(loc=lower, scale=upper - lower)

        self.dist_type = "UniformBlock"

    def __repr__(self):
        return (
            f"UniformBlock({self.lower.tolist()}, {self.upper.tolist()}, "
            f"weight={self.weight})"
        )

    def contains(self, x):
        x = self._as_points(x)
        return np.all((x >= self.lower) & (x < self.upper), axis=1)

    def pdf(self, x):
        return self.contains(x) / self.volume

    def sample(self, n, rng):
        if n == 0:
            return np.zeros((0, self.dim))
        x = self.dist_obj.rvs(size=(n, self.dim), random_state=rng)
        # rvs may return the upper corner after rounding
        return np.minimum(x, np.nextafter(self.upper, self.lower))

    def intersects(self, other):
        """True when the two half-open boxes share a point"""
        return bool(
            np.all(self.lower < other.upper) and np.all(other.lower < self.upper)
        )

    def to_dict(self):
        return {
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "weight": self.weight,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["lower"], d["upper"], d["weight"])
