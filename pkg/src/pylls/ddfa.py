#!/usr/bin/python -tt
# -*- coding: utf-8 -*-

import json

import numpy as np
import pandas as pd

from .adjust import (
    adjust_predict_batch,
    naive_predict_batch,
    naive_train,
    write_predictions_csv,
)
from .analysis import AnalysisObject, AnalysisOptions
from .dataset import DomainDataset
from .discriminator import train_discriminator
from .discretize import (
    assign_point_masses,
    kmeans,
    oracle_point_mass_groups,
    tabularize,
    write_assignments_csv,
)
from .errors import InvalidInput, ValidationError
from .evaluation import evaluate
from .factorize import nmf, spa_anchor_nmf
from .synthgen import ProblemInstance

__all__ = ["DDFA", "NaiveDDFA", "run_pipeline"]


class DDFA(AnalysisObject):
    r"""Discriminate, discretize, factorize, adjust

    Recovers the label marginals :math:`Q_{Y|D}` and per-point label
    posteriors from unlabeled multi-domain data:

    1. a domain discriminator :math:`\hat f(x) = \hat q(d|x)` is trained on the
       train split with early stopping on the valid split (or, in oracle mode,
       the exact :math:`q(d|x)` of a synthetic instance is used);
    2. the train and valid posteriors are clustered into :math:`m` groups;
    3. the cluster-by-domain frequencies :math:`\hat Q_{c(X)|D}` are
       factorized into :math:`\hat Q_{c(X)|Y} \hat Q_{Y|D}`;
    4. test points get :math:`\hat q(y|x,d)` by inverting
       :math:`\hat Q_{D|Y}` on :math:`\hat f(x)`.

    Hidden labels are read only when scoring the test split.

    :Attributes:
      - data (ProblemInstance or DomainDataset): problem to solve\n
      - analysis_options (AnalysisOptions): pipeline options\n
      - train_config (TrainConfig): discriminator options\n
      - k (int): number of classes, required with a bare dataset\n
    """

    def __init__(self, data, analysis_options=None, train_config=None, k=None):
        super().__init__(analysis_options=analysis_options, train_config=train_config)

        if isinstance(data, ProblemInstance):
            if data.dataset is None:
                raise InvalidInput("the instance carries no dataset")
            self.instance = data
            self.dataset = data.dataset
            self.k = data.params.k
            self.m = data.params.m
            seed = data.params.seed
        elif isinstance(data, DomainDataset):
            if k is None:
                raise InvalidInput("the number of classes is required with a bare dataset")
            self.instance = None
            self.dataset = data
            self.k = int(k)
            self.m = self.k
            seed = 0
        else:
            raise InvalidInput("data must be a ProblemInstance or a DomainDataset")

        if self.options.getSeed() is not None:
            seed = self.options.getSeed()
        self.seed = int(seed)
        self.r = self.dataset.r

        self.model = None
        self.cluster_model = None
        self.representatives = None
        self.cluster_ids = None
        self.counts = None
        self.q_cd = None
        self.factorization = None
        self.w_hat = None
        self.h_hat = None
        self.G = None
        self.A = None
        self.y_pred = None
        self.info = {}
        self.report = None

    def run(self):
        """
        Executes the pipeline
        """
        self.init_run()
        rng_cluster, rng_factor, rng_repr = (
            np.random.default_rng(s) for s in np.random.SeedSequence(self.seed).spawn(3)
        )

        # Stages only see the label-stripped view
        data = self.dataset.without_labels()
        fit = data.split(("train", "valid"))
        self.fit_index = np.flatnonzero(np.isin(data.splits, ("train", "valid")))
        self.eval_mask = data.splits == "test"
        if not self.eval_mask.any():
            self.eval_mask = np.ones(data.n, dtype=bool)
        held = DomainDataset(
            data.features[self.eval_mask],
            data.domains[self.eval_mask],
            splits=data.splits[self.eval_mask],
            r=self.r,
        )

        with self.stage("discriminate"):
            F_fit, F_eval = self.discriminate(data, fit, held, rng_repr)

        with self.stage("discretize"):
            ids_fit, ids_eval, m = self.discretize(F_fit, F_eval, rng_cluster)
            self.cluster_ids = ids_fit

        with self.stage("tabularize"):
            self.counts, self.q_cd = tabularize(ids_fit, fit.domains, m, self.r)

        with self.stage("factorize"):
            self.factorize(ids_fit, fit.domains, m, rng_factor)

        with self.stage("adjust"):
            self.adjust(F_eval, ids_eval, held.domains)

        with self.stage("evaluate"):
            self.report = self.evaluate()
            if self.report is not None:
                self.report.timings = dict(self.timings)

        self.results_valid = True
        if self.options.getPrintOutput():
            self.showResults()

    def discriminate(self, data, fit, held, rng):
        """Domain posteriors of the fit and held-out points"""
        if self.options.getMode() == "oracle":
            if self.instance is None:
                raise ValidationError("oracle mode needs the instance ground truth")
            f = self.instance.oracle()
            return f.batch(fit.features), f.batch(held.features)

        train = data.split("train")
        valid = data.split("valid")
        if valid.n == 0:
            valid = train
        self.model = train_discriminator(train, valid, self.train_config, r=self.r)
        return self.model.predict_proba(fit.features), self.model.predict_proba(held.features)

    def discretize(self, F_fit, F_eval, rng):
        """Cluster ids of the fit and held-out points, and the cluster count"""
        opt = self.options
        if opt.getDiscretizer() == "point_mass":
            ids_fit, masses, reps = oracle_point_mass_groups(
                F_fit, opt.point_mass_epsilon, match_tol=opt.match_tol
            )
            self.representatives = reps
            self.info["point_mass_groups"] = int(reps.shape[0])
            return ids_fit, assign_point_masses(F_eval, reps, opt.match_tol), masses.size

        m = opt.getClusters() or self.m
        self.cluster_model = kmeans(F_fit, m, opt.niter, opt.nredo, rng)
        return self.cluster_model.labels, self.cluster_model.predict(F_eval), m

    def factorize(self, ids_fit, domains, m, rng):
        opt = self.options
        if opt.getFactorizer() == "spa":
            self.factorization = spa_anchor_nmf(self.q_cd, self.k)
        else:
            self.factorization = nmf(
                self.q_cd,
                self.k,
                max_iter=opt.nmf_max_iter,
                tol=opt.nmf_tol,
                n_init=opt.nmf_n_init,
                rng=rng,
                allow_overcomplete=opt.allow_overcomplete,
            )
        self.w_hat = self.factorization.w_hat
        self.h_hat = self.factorization.h_hat

    def adjust(self, F_eval, ids_eval, domains):
        self.G, self.A, self.y_pred, info = adjust_predict_batch(self.h_hat, F_eval, domains)
        self.info.update(info)

    def evaluate(self):
        """EvalReport on the held-out points, or None without ground truth"""
        labels = self.dataset.labels
        if self.instance is None or labels is None:
            return None
        y_true = labels[self.eval_mask]
        if np.any(y_true < 0):
            return None
        return evaluate(
            y_true,
            self.y_pred,
            self.dataset.domains[self.eval_mask],
            self.h_hat,
            self.instance.q_yd_true,
            r=self.r,
            y_agnostic=np.argmax(self.G, axis=1),
        )

    def showResults(self):
        """Show results"""
        if not self.results_valid:
            raise ValueError("Analysis not yet run")
        n_hyphen = 54
        print("")
        print("=" * n_hyphen)
        print("")
        print(" RESULTS FROM RUNNING LATENT LABEL SHIFT ANALYSIS")
        print("")
        print(" Mode:                     ", self.options.getMode())
        print(" Clusters:                 ", self.q_cd.rows)
        print(" Predicted points:         ", self.y_pred.size)
        if self.factorization is not None:
            print(" Factorization residual:   ", f"{self.factorization.residual:.3e}")
        if self.report is not None:
            print(" Matched accuracy:         ", f"{self.report.accuracy:.4f}")
            print(" Q_{Y|D} error:            ", f"{self.report.q_yd_error:.4e}")
        else:
            print(" Metrics:                   no labels")
        print("")
        print("=" * n_hyphen)
        print("")

    def getQYD(self):
        """Returns the recovered label marginals

        :Returns:
          - h_hat (StochasticMatrix): (k, r) estimate of :math:`Q_{Y|D}`
        """
        return self.h_hat

    def getReport(self):
        return self.report

    def getModel(self):
        return self.model

    def getFactorization(self):
        return self.factorization

    def getPredictions(self):
        """Held-out predictions as a DataFrame ``index,domain,y_pred,q0..``"""
        df = pd.DataFrame(
            {
                "index": np.flatnonzero(self.eval_mask),
                "domain": self.dataset.domains[self.eval_mask],
                "y_pred": self.y_pred,
            }
        )
        q = pd.DataFrame(self.A, columns=[f"q{y}" for y in range(self.A.shape[1])])
        return pd.concat([df, q], axis=1)

    def to_dict(self, config=None):
        """Report document; timings are kept out so reruns are byte-identical"""
        d = {
            "mode": self.options.getMode(),
            "seed": self.seed,
            "k": self.k,
            "r": self.r,
            "m": int(self.q_cd.rows),
            "q_yd_hat": self.h_hat.tolist(),
            "n_clipped": self.info.get("n_clipped", 0),
            "n_fallback": self.info.get("n_fallback", 0),
            "metrics": "no labels" if self.report is None else self.report.to_dict(),
        }
        if self.factorization is not None:
            d["factorization"] = {
                "method": self.factorization.method,
                "residual": self.factorization.residual,
                "converged": self.factorization.converged,
                "iterations": self.factorization.n_iter,
                "h_column_sums": np.asarray(self.factorization.h_column_sums).tolist(),
            }
        if config is not None:
            d["config"] = config
        return d

    def write_report(self, path, config=None):
        _dump(self.to_dict(config), path)

    def write_predictions(self, path):
        write_predictions_csv(
            path,
            self.dataset.domains[self.eval_mask],
            self.y_pred,
            self.A,
            index=np.flatnonzero(self.eval_mask),
        )

    def write_factors(self, path, config=None):
        """Recovered factors :math:`\\hat Q_{c(X)|Y}` and :math:`\\hat Q_{Y|D}`"""
        if self.factorization is not None:
            d = self.factorization.to_dict()
        else:
            d = {"method": "nmf", "w": self.w_hat.tolist(), "h": self.h_hat.tolist()}
        if config is not None:
            d["config"] = config
        _dump(d, path)

    def write_assignments(self, path):
        """Cluster of each train and valid record"""
        write_assignments_csv(
            path, self.cluster_ids, self.dataset.domains[self.fit_index], index=self.fit_index
        )

    def write_timings(self, path):
        _dump({"seconds": self.timings}, path)


def _dump(d, path):
    with open(path, "w") as f:
        json.dump(d, f, indent=2)
        f.write("\n")


class NaiveDDFA(DDFA):
    """DDFA on a representation that ignores the domains

    Each record is represented by Gaussian noise of dimension ``naive_dim``
    drawn from the run's seed, independently of its features, so the
    representation carries no class information. The noise is clustered with
    k-means, and every point of a cluster gets the cluster-level posterior
    :math:`\\hat q(y|c, d) \\propto \\hat q(c|y) \\hat q(y|d)`.
    """

    def __init__(self, data, analysis_options=None, train_config=None, k=None):
        if analysis_options is None:
            analysis_options = AnalysisOptions(mode="naive")
        super().__init__(data, analysis_options, train_config, k)
        self.representation = None

    def discriminate(self, data, fit, held, rng):
        dim = self.options.naive_dim or self.r
        self.representation = rng.standard_normal((fit.n + held.n, dim))
        return self.representation[: fit.n], self.representation[fit.n :]

    def discretize(self, F_fit, F_eval, rng):
        m = self.options.getClusters() or self.m
        self.cluster_model = kmeans(F_fit, m, self.options.niter, self.options.nredo, rng)
        return self.cluster_model.labels, self.cluster_model.predict(F_eval), m

    def factorize(self, ids_fit, domains, m, rng):
        opt = self.options
        self.w_hat, self.h_hat, _ = naive_train(
            ids_fit,
            domains,
            m,
            self.r,
            self.k,
            rng=rng,
            clusterer=self.cluster_model.predict,
            max_iter=opt.nmf_max_iter,
            tol=opt.nmf_tol,
            n_init=opt.nmf_n_init,
            allow_overcomplete=opt.allow_overcomplete,
        )

    def adjust(self, F_eval, ids_eval, domains):
        self.G, self.A, self.y_pred, info = naive_predict_batch(
            self.w_hat, self.h_hat, ids_eval, domains
        )
        self.info.update(info)


def run_pipeline(instance, mode="learned", options=None, train_config=None):
    """Run the pipeline on an instance and score it

    Parameters
    ----------
    instance : ProblemInstance
    mode : str, optional
        "learned", "oracle" or "naive"; overrides ``options.mode``.
    options : AnalysisOptions, optional
    train_config : TrainConfig, optional

    Returns
    -------
    EvalReport
        With stage timings in ``timings``; None when the instance has no
        labels.

    Raises
    ------
    StageError
        Naming the stage that failed.
    """
    options = AnalysisOptions() if options is None else options
    options = AnalysisOptions(**{**options.to_dict(), "mode": mode})
    cls = NaiveDDFA if mode == "naive" else DDFA
    analysis = cls(instance, options, train_config)
    analysis.run()
    return analysis.getReport()
