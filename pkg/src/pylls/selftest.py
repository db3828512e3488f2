# -*- coding: utf-8 -*-
"""
Executable identifiability checks.

Every check builds small seeded instances, compares an oracle quantity with
its closed form and reports the largest deviation. ``run_selftest`` runs
them all; the command line ``selftest`` prints the table and fails on any
failed check.
"""

import time

import numpy as np

from .adjust import adjust_predict_batch, q_d_given_y
from .discretize import oracle_point_mass_groups
from .discriminator import DiscriminatorModel, gradient_check
from .evaluation import match_rows
from .factorize import spa_anchor_nmf
from .linalg import condition_number_2norm
from .model import ProblemParams
from .synthgen import make_block_instance, make_discrete_instance

__all__ = ["CheckResult", "run_selftest", "print_selftest", "ORACLE_TOL"]

ORACLE_TOL = 1e-8
"""Tolerance of oracle identities"""

COND_LIMIT = 1e10


class CheckResult:
    """Outcome of one check

    :Attributes:
      - name (str): check name\n
      - passed (bool): whether the deviation is within tolerance\n
      - deviation (float): largest observed deviation\n
      - detail (str): short description\n
      - seconds (float): wall time\n
    """

    def __init__(self, name, passed, deviation=0.0, detail=""):
        self.name = name
        self.passed = bool(passed)
        self.deviation = float(deviation)
        self.detail = detail
        self.seconds = 0.0

    def __repr__(self):
        status = "pass" if self.passed else "FAIL"
        return f"CheckResult({self.name!r}, {status}, deviation={self.deviation:.3e})"

    def to_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "deviation": self.deviation,
            "detail": self.detail,
        }


class _Oracle:
    """Exact quantities of one block-mixture instance on its sampled points"""

    def __init__(self, overlap_fraction, seed, n_per_domain=400, n_shared=2):
        params = ProblemParams(3, 5, alpha=0.5, kappa_max=3.0, epsilon=0.3, seed=seed)
        self.instance = make_block_instance(
            params,
            p=1,
            overlap_fraction=overlap_fraction,
            n_per_domain=n_per_domain,
            n_shared=n_shared,
        )
        self.f = self.instance.oracle()
        data = self.instance.dataset
        self.X = data.features
        self.domains = data.domains
        self.F = self.f.batch(self.X)
        self.G = self.f.class_posterior(self.X)
        self.anchor = self.instance.spec.anchor_class(self.X)


def check_posterior_inversion(o):
    """Inverting Q_{D|Y} on f(x) gives q(y|x)"""
    G, _, _, info = adjust_predict_batch(o.instance.q_yd_true, o.F, o.domains)
    dev = float(np.max(np.abs(G - o.G)))
    passed = dev <= ORACLE_TOL and info["n_clipped"] == 0
    return CheckResult("posterior_inversion", passed, dev, f"{info['n_clipped']} clipped")


def check_adjusted_posterior(o):
    """Adjusted posterior matches q(y|x,d) from the class densities"""
    _, A, _, _ = adjust_predict_batch(o.instance.q_yd_true, o.F, o.domains)
    exact = o.f.domain_adjusted_posterior(o.X, o.domains)
    dev = float(np.max(np.abs(A - exact)))
    return CheckResult("adjusted_posterior", dev <= ORACLE_TOL, dev)


def check_anchor_constancy(o):
    """f is constant on each anchor block and differs from it elsewhere"""
    k = o.instance.params.k
    q_dy = o.f.q_dy.data
    spread = 0.0
    gap = np.inf
    for y in range(k):
        inside = o.anchor == y
        if inside.any():
            spread = max(spread, float(np.max(np.abs(o.F[inside] - o.F[inside][0]))))
        mixed = (o.anchor < 0) & (o.G[:, y] < 1.0)
        if mixed.any():
            gap = min(gap, float(np.min(np.abs(o.F[mixed] - q_dy[:, y]).max(axis=1))))
    passed = spread == 0.0 and gap > ORACLE_TOL
    return CheckResult("anchor_constancy", passed, spread, f"smallest gap {gap:.3e}")


def check_positive_priors(o):
    """Every class has positive prior"""
    prior = o.instance.q_yd_true.data.mean(axis=1)
    return CheckResult("positive_priors", bool(np.all(prior > 0)), float(prior.min()), "smallest prior")


def check_anchor_onehot(o):
    """x lies in the anchor block of y exactly when q(y|x) is one-hot at y"""
    onehot = o.G.max(axis=1) == 1.0
    agree = (onehot == (o.anchor >= 0)) & (~onehot | (o.G.argmax(axis=1) == o.anchor))
    n_bad = int((~agree).sum())
    return CheckResult("anchor_onehot", n_bad == 0, n_bad, f"{n_bad} of {agree.size} points disagree")


def check_column_independence(q_dy):
    """Q_{D|Y} has linearly independent columns"""
    cond = condition_number_2norm(q_dy)
    return CheckResult("column_independence", cond < COND_LIMIT, cond, "condition number")


def check_domain_posterior(o):
    """f(x) = Q_{D|Y} q(y|x), against q(d|x) computed from q(x|d)"""
    q_xd = o.f.class_densities(o.X) @ o.instance.q_yd_true.data
    direct = q_xd / q_xd.sum(axis=1, keepdims=True)
    dev = float(np.max(np.abs(o.F - direct)))
    return CheckResult("domain_posterior", dev <= ORACLE_TOL, dev)


def check_point_masses(seed):
    """Without overlap the heavy point masses of f are the columns of Q_{D|Y}"""
    o = _Oracle(0.0, seed, n_shared=1)
    _, _, reps = oracle_point_mass_groups(o.F, 0.01)
    q_dy = o.f.q_dy.data.T
    k = q_dy.shape[0]
    if reps.shape[0] != k:
        return CheckResult("point_masses", False, abs(reps.shape[0] - k), f"{reps.shape[0]} groups")
    perm = match_rows(reps, q_dy)
    dev = float(np.max(np.abs(reps - q_dy[perm])))
    return CheckResult("point_masses", dev <= 1e-9, dev, f"{k} groups")


def check_anchor_factorization(seed, n_instances=5):
    """Successive projection recovers Q_{Y|D} of exact anchored instances"""
    rng = np.random.default_rng(seed)
    dev = 0.0
    for _ in range(n_instances):
        params = ProblemParams(
            4, 8, alpha=0.5, kappa_max=10.0, m=20, seed=int(rng.integers(2**32))
        )
        inst = make_discrete_instance(params)
        result = spa_anchor_nmf(inst.q_xd, params.k)
        q_true = inst.q_yd_true.data
        perm = match_rows(result.h_hat.data, q_true)
        dev = max(dev, float(np.max(np.abs(result.h_hat.data - q_true[perm]))))
    return CheckResult("anchor_factorization", dev <= 1e-6, dev, f"{n_instances} instances")


def check_gradients(seed, n_models=10):
    """Analytic cross-entropy gradients agree with central differences"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_models):
        architecture = "linear" if i % 2 == 0 else "mlp"
        p, r = int(rng.integers(1, 4)), int(rng.integers(2, 5))
        model = DiscriminatorModel(architecture, p, r, hidden=5)
        model.params = {key: rng.normal(size=v.shape) for key, v in model.params.items()}
        X = rng.normal(size=(12, p))
        targets = rng.integers(r, size=12)
        worst = max(worst, gradient_check(model, X, targets, weight_decay=0.01))
    return CheckResult("gradients", worst <= 1e-5, worst, f"{n_models} models")


def run_selftest(seed=0, perturb_rank=False):
    """Run every identifiability check

    Parameters
    ----------
    seed : int, optional
        Seed of the instances.
    perturb_rank : bool, optional
        Duplicate a column of Q_{D|Y} before the independence check, which
        must then fail.

    Returns
    -------
    list of CheckResult
    """
    results = []

    def timed(fn, *args):
        start = time.perf_counter()
        result = fn(*args)
        result.seconds = time.perf_counter() - start
        results.append(result)

    o = _Oracle(0.3, seed)
    for fn in (check_posterior_inversion, check_adjusted_posterior, check_anchor_constancy, check_positive_priors, check_anchor_onehot):
        timed(fn, o)

    q_dy = q_d_given_y(o.instance.q_yd_true).data.copy()
    if perturb_rank:
        q_dy[:, 1] = q_dy[:, 0]
    timed(check_column_independence, q_dy)
    timed(check_domain_posterior, o)
    timed(check_point_masses, seed)
    timed(check_anchor_factorization, seed)
    timed(check_gradients, seed)
    return results


def print_selftest(results):
    n_hyphen = 54
    print("")
    print("=" * n_hyphen)
    print("")
    print(" IDENTIFIABILITY SELF-TEST")
    print("")
    for res in results:
        status = "pass" if res.passed else "FAIL"
        print(f" {res.name:<22s} {status}  {res.deviation:10.3e}  {res.detail}")
    print("")
    print(f" {sum(r.passed for r in results)} of {len(results)} checks passed")
    print("")
    print("=" * n_hyphen)
    print("")
