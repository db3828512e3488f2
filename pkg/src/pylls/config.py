# -*- coding: utf-8 -*-
"""
Run configuration documents.

A :class:`RunConfig` is the JSON document behind every command line run.
It has five sections; every key has a default, unknown keys are rejected
with their dotted path.
"""

import copy
import json

from .analysis import AnalysisOptions
from .discriminator import TrainConfig
from .errors import ConfigError
from .model import ProblemParams
from .synthgen import make_block_instance, make_discrete_instance

__all__ = ["DEFAULTS", "RunConfig"]

DEFAULTS = {
    "problem": {
        "k": 3,
        "r": 5,
        "alpha": 0.5,
        "kappa_max": 3.0,
        "epsilon": 0.3,
        "m": None,
        "seed": 0,
    },
    "data": {
        "kind": "blocks",
        "p": 1,
        "overlap_fraction": 0.0,
        "n_shared": 1,
        "n_per_domain": 1000,
        "splits": [0.6, 0.2, 0.2],
        "vocab_size": None,
        "anchors_per_class": 1,
        "hide_labels": True,
    },
    "train": TrainConfig().to_dict(),
    "pipeline": AnalysisOptions().to_dict(),
    "sweep": {
        "alpha": [],
        "kappa": [],
        "r": [],
        "m": [],
        "modes": ["learned"],
        "seeds": [0],
    },
}
"""Documented defaults of every section"""

DATA_KINDS = ("blocks", "discrete")


def _merge(defaults, doc, path):
    if not isinstance(doc, dict):
        raise ConfigError("must be an object", key=path or None)
    out = copy.deepcopy(defaults)
    for key, value in doc.items():
        dotted = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError("unknown key", key=dotted)
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], value, dotted)
        else:
            out[key] = value
    return out


class RunConfig:
    """Resolved run configuration

    :Attributes:
      - problem (dict): ProblemParams keys\n
      - data (dict): generator keys\n
      - train (dict): TrainConfig keys\n
      - pipeline (dict): AnalysisOptions keys\n
      - sweep (dict): grid lists\n
    """

    def __init__(self, doc=None):
        resolved = _merge(DEFAULTS, {} if doc is None else doc, "")
        self.problem = resolved["problem"]
        self.data = resolved["data"]
        self.train = resolved["train"]
        self.pipeline = resolved["pipeline"]
        self.sweep = resolved["sweep"]
        self._check_input()

    def __repr__(self):
        return f"RunConfig(problem={self.problem!r})"

    @classmethod
    def from_json(cls, path):
        """
        Read a configuration file; a missing path gives the defaults.

        Raises
        ------
        ConfigError
            When the file is not valid JSON or holds an unknown key.
        """
        if path is None:
            return cls()
        with open(path) as f:
            try:
                doc = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"invalid JSON at line {e.lineno}: {e.msg}") from e
        return cls(doc)

    def _check_input(self):
        if self.data["kind"] not in DATA_KINDS:
            raise ConfigError(f"must be one of {DATA_KINDS}", key="data.kind")
        if len(self.data["splits"]) != 3:
            raise ConfigError("needs train, valid and test fractions", key="data.splits")
        for key, values in self.sweep.items():
            if not isinstance(values, list):
                raise ConfigError("must be a list", key=f"sweep.{key}")
        # bad values surface with their section
        for section, build in (
            ("problem", self.problem_params),
            ("train", self.train_config),
            ("pipeline", self.analysis_options),
        ):
            try:
                build()
            except ConfigError as e:
                key = f"{section}.{e.key}" if e.key else section
                raise ConfigError(str(e).split(": ", 1)[-1], key=key) from e
            except (ValueError, TypeError) as e:
                raise ConfigError(str(e), key=section) from e

    def override_seed(self, seed):
        """Set the problem and discriminator seeds"""
        self.problem["seed"] = int(seed)
        self.train["seed"] = int(seed)
        self._check_input()

    def problem_params(self, **changes):
        d = {**self.problem, **changes}
        k = d["k"]
        m = d["m"]
        return ProblemParams(
            k,
            d["r"],
            alpha=d["alpha"],
            kappa_max=d["kappa_max"],
            epsilon=d["epsilon"],
            m=m,
            seed=d["seed"],
            allow_small_m=m is not None and m < k,
        )

    def train_config(self, **changes):
        return TrainConfig(**{**self.train, **changes})

    def analysis_options(self, **changes):
        return AnalysisOptions(**{**self.pipeline, **changes})

    def make_instance(self, **changes):
        """Generate the problem instance described by the problem and data
        sections, with problem keys overridden by ``changes``"""
        params = self.problem_params(**changes)
        data = self.data
        if data["kind"] == "discrete":
            return make_discrete_instance(
                params,
                m=data["vocab_size"],
                anchors_per_class=data["anchors_per_class"],
                n_per_domain=data["n_per_domain"],
                splits=tuple(data["splits"]),
            )
        return make_block_instance(
            params,
            p=data["p"],
            overlap_fraction=data["overlap_fraction"],
            n_per_domain=data["n_per_domain"],
            splits=tuple(data["splits"]),
            n_shared=data["n_shared"],
        )

    def resolved(self):
        """Fully resolved document"""
        return copy.deepcopy(
            {
                "problem": self.problem,
                "data": self.data,
                "train": self.train,
                "pipeline": self.pipeline,
                "sweep": self.sweep,
            }
        )

    def to_json(self, path):
        with open(path, "w") as f:
            json.dump(self.resolved(), f, indent=2)
            f.write("\n")
