# -*- coding: utf-8 -*-

import numpy as np

from .distribution import Distribution
from .uniform import UniformBlock
from ..errors import InvalidInput, ShapeMismatch

__all__ = ["BlockMixture", "MixtureSpec"]


class BlockMixture(Distribution):
    """
    A finite mixture of uniform blocks.

    The density is :math:`\\sum_i w_i \\, \\mathrm{pdf}_i(x)` where each
    component is a :class:`UniformBlock` and the weights sum to one. Blocks of
    the same mixture may overlap.

    :Attributes:
      - name (str):             Name of the density\n
      - blocks (list):          UniformBlock components\n
      - weights (np.ndarray):   Component weights\n
    """

    def __init__(self, blocks, name=""):
        blocks = list(blocks)
        if len(blocks) == 0:
            raise InvalidInput("BlockMixture requires at least one block")
        for b in blocks:
            if not isinstance(b, UniformBlock):
                raise InvalidInput(
                    f"BlockMixture requires input of type {UniformBlock.__name__}"
                )
        dims = {b.dim for b in blocks}
        if len(dims) != 1:
            raise ShapeMismatch("BlockMixture blocks must share one dimension")

        self.blocks = blocks
        self.weights = np.array([b.weight for b in blocks])
        if abs(self.weights.sum() - 1.0) > 1e-9:
            raise InvalidInput(
                f"BlockMixture weights must sum to 1, got {self.weights.sum()}"
            )

        super().__init__(name=name, dim=dims.pop())
        self.dist_type = "BlockMixture"

    def __len__(self):
        return len(self.blocks)

    def __getitem__(self, i):
        return self.blocks[i]

    def pdf(self, x):
        """
        Probability density function
        """
        x = self._as_points(x)
        out = np.zeros(x.shape[0])
        for w, b in zip(self.weights, self.blocks):
            out += w * b.pdf(x)
        return out

    def contains(self, x):
        x = self._as_points(x)
        mask = np.zeros(x.shape[0], dtype=bool)
        for b in self.blocks:
            mask |= b.contains(x)
        return mask

    def sample(self, n, rng):
        """
        Draw block counts from a multinomial, fill each block uniformly and
        shuffle the result.
        """
        counts = rng.multinomial(n, self.weights)
        parts = [b.sample(c, rng) for b, c in zip(self.blocks, counts)]
        x = np.concatenate(parts, axis=0)
        return x[rng.permutation(n)]

    def to_dict(self):
        return [b.to_dict() for b in self.blocks]


class MixtureSpec:
    """
    Class-conditional densities :math:`q(x|y)` for :math:`k` classes.

    Each class density is a :class:`BlockMixture`. Block ``anchors[y]`` of
    class ``y`` is its anchor set :math:`A_y`: it meets no block of any other
    class.

    :Attributes:
      - classes (list):     BlockMixture per class\n
      - anchors (list):     Anchor block index per class\n
      - k (int):            Number of classes\n
      - dim (int):          Feature dimension p\n
    """

    def __init__(self, classes, anchors, epsilon=None):
        self.classes = list(classes)
        self.anchors = [int(a) for a in anchors]
        self.k = len(self.classes)
        if self.k == 0:
            raise InvalidInput("MixtureSpec needs at least one class")
        if len(self.anchors) != self.k:
            raise ShapeMismatch("one anchor index is required per class")
        dims = {c.dim for c in self.classes}
        if len(dims) != 1:
            raise ShapeMismatch("all class densities must share one dimension")
        self.dim = dims.pop()
        self._check_input(epsilon)

    def __repr__(self):
        return f"MixtureSpec(k={self.k}, p={self.dim}, blocks={[len(c) for c in self.classes]})"

    def _check_input(self, epsilon):
        """
        Check the anchor conditions.

        Raises
        ------
        InvalidInput
            If an anchor block intersects a block of another class, or its
            weight is below ``epsilon``.
        """
        for y, (density, a) in enumerate(zip(self.classes, self.anchors)):
            if not 0 <= a < len(density):
                raise InvalidInput(f"class {y} anchor index {a} out of range")
            anchor = density[a]
            if epsilon is not None and anchor.weight < epsilon:
                raise InvalidInput(
                    f"class {y} anchor weight {anchor.weight} is below {epsilon}"
                )
            for z, other in enumerate(self.classes):
                if z == y:
                    continue
                for b in other.blocks:
                    if anchor.intersects(b):
                        raise InvalidInput(
                            f"anchor block of class {y} intersects a block of class {z}"
                        )

    def anchor_block(self, y):
        return self.classes[y][self.anchors[y]]

    def class_densities(self, x):
        """
        Matrix of :math:`q(x_i|y)`, shape (n, k)
        """
        return np.column_stack([c.pdf(x) for c in self.classes])

    def anchor_class(self, x):
        """
        Class whose anchor block contains each point, or -1
        """
        x = self.classes[0]._as_points(x)
        out = np.full(x.shape[0], -1)
        for y in range(self.k):
            out[self.anchor_block(y).contains(x)] = y
        return out

    def sample_class(self, y, n, rng):
        return self.classes[y].sample(n, rng)

    def to_dict(self):
        return {
            "k": self.k,
            "p": self.dim,
            "anchors": list(self.anchors),
            "classes": [c.to_dict() for c in self.classes],
        }

    @classmethod
    def from_dict(cls, d, epsilon=None):
        classes = [
            BlockMixture([UniformBlock.from_dict(b) for b in blocks], name=f"class {y}")
            for y, blocks in enumerate(d["classes"])
        ]
        return cls(classes, d["anchors"], epsilon=epsilon)
