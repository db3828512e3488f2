# -*- coding: utf-8 -*-

import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor

import matplotlib.pyplot as plt
import pandas as pd

from .config import RunConfig
from .ddfa import run_pipeline
from .errors import InvalidInput

__all__ = ["GRID_KEYS", "SUMMARY_COLUMNS", "Sweep", "sweep"]

GRID_KEYS = ("alpha", "kappa", "r", "m", "modes", "seeds")

SUMMARY_COLUMNS = [
    "alpha",
    "kappa",
    "r",
    "m",
    "mode",
    "acc_mean",
    "acc_std",
    "qyd_err_mean",
    "qyd_err_std",
]

CELL_KEYS = ["alpha", "kappa", "r", "m", "mode"]


def _run_cell(doc, cell):
    """One grid cell; any failure becomes a failed row"""
    row = dict(cell)
    try:
        cfg = RunConfig(doc)
        k = cfg.problem["k"]
        instance = cfg.make_instance(
            alpha=cell["alpha"],
            kappa_max=cell["kappa"],
            r=cell["r"],
            m=cell["m"],
            seed=cell["seed"],
        )
        options = cfg.analysis_options(
            n_clusters=cell["m"],
            allow_overcomplete=cfg.pipeline["allow_overcomplete"] or cell["m"] < k,
            seed=cell["seed"],
        )
        report = run_pipeline(
            instance, cell["mode"], options, cfg.train_config(seed=cell["seed"])
        )
    except Exception as e:
        row.update(status="failed", error=f"{type(e).__name__}: {e}")
        return row
    row.update(
        status="ok",
        accuracy=report.accuracy,
        q_yd_error=report.q_yd_error,
        report=report.to_dict(),
    )
    return row


class Sweep:
    """Grid of pipeline runs

    The grid is the Cartesian product of the ``sweep`` section lists of a
    :class:`RunConfig`; an empty list stands for the single base value of
    the ``problem`` section. Rows are kept in grid order whatever the order
    of completion.

    :Attributes:
      - config (RunConfig): base configuration and grid\n
      - jobs (int): worker processes, 1 runs in this process\n
      - rows (list): one dict per cell after :meth:`run`\n
    """

    def __init__(self, config=None, jobs=1):
        self.config = RunConfig() if config is None else config
        if jobs < 1:
            raise InvalidInput(f"jobs must be positive, got {jobs}")
        self.jobs = int(jobs)
        self.rows = []

    def __repr__(self):
        return f"Sweep(cells={len(self.cells())}, jobs={self.jobs})"

    def cells(self):
        grid = self.config.sweep
        base = self.config.problem
        axes = [
            grid["alpha"] or [base["alpha"]],
            grid["kappa"] or [base["kappa_max"]],
            grid["r"] or [base["r"]],
            grid["m"] or [base["m"] if base["m"] is not None else base["k"]],
            grid["modes"] or [self.config.pipeline["mode"]],
            grid["seeds"] or [base["seed"]],
        ]
        if any(len(a) == 0 for a in axes):
            raise InvalidInput("empty sweep grid")
        return [
            dict(zip(CELL_KEYS + ["seed"], values)) for values in itertools.product(*axes)
        ]

    def run(self):
        doc = self.config.resolved()
        cells = self.cells()
        if self.jobs == 1:
            self.rows = []
            for i, cell in enumerate(cells):
                try:
                    self.rows.append(_run_cell(doc, cell))
                except KeyboardInterrupt:
                    self.rows += [
                        {**c, "status": "failed", "error": "interrupted"} for c in cells[i:]
                    ]
                    break
            return self.rows

        with ProcessPoolExecutor(max_workers=self.jobs) as executor:
            futures = [executor.submit(_run_cell, doc, cell) for cell in cells]
            self.rows = []
            for cell, future in zip(cells, futures):
                try:
                    self.rows.append(future.result())
                except Exception as e:
                    self.rows.append({**cell, "status": "failed", "error": repr(e)})
        return self.rows

    @property
    def n_failed(self):
        return sum(row["status"] != "ok" for row in self.rows)

    def results_frame(self):
        """Per-cell rows without the nested reports"""
        return pd.DataFrame(
            [{k: v for k, v in row.items() if k != "report"} for row in self.rows]
        )

    def summary(self):
        """Mean and sample standard deviation over seeds per cell"""
        df = self.results_frame()
        if df.empty or "accuracy" not in df:
            return pd.DataFrame(columns=SUMMARY_COLUMNS)
        ok = df[df["status"] == "ok"]
        grouped = ok.groupby(CELL_KEYS, sort=False)
        out = pd.DataFrame(
            {
                "acc_mean": grouped["accuracy"].mean(),
                "acc_std": grouped["accuracy"].std(ddof=1),
                "qyd_err_mean": grouped["q_yd_error"].mean(),
                "qyd_err_std": grouped["q_yd_error"].std(ddof=1),
            }
        ).reset_index()
        return out[SUMMARY_COLUMNS]

    def write(self, out_dir):
        """Write ``results.jsonl`` (one row per line) and ``summary.csv``"""
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "results.jsonl"), "w") as f:
            for row in self.rows:
                f.write(json.dumps(row) + "\n")
        self.summary().to_csv(
            os.path.join(out_dir, "summary.csv"), index=False, float_format="%.17g"
        )

    def plot(self, x="m", ax=None):
        """
        Mean matched accuracy against one grid axis, one line per mode,
        with the standard deviation over seeds as error bars.
        """
        summary = self.summary()

        show = False
        if ax is None:
            show = True
            _, ax = plt.subplots()

        for mode, df in summary.groupby("mode", sort=False):
            df = df.sort_values(x)
            ax.errorbar(df[x], df["acc_mean"], yerr=df["acc_std"], marker="o", label=mode)
        ax.set_xlabel(x)
        ax.set_ylabel("Matched accuracy")
        ax.legend()

        if show:
            plt.show()

        return ax


def sweep(grid, config=None, jobs=1):
    """Run a parameter grid

    Parameters
    ----------
    grid : dict
        Lists keyed by ``alpha``, ``kappa``, ``r``, ``m``, ``modes`` and
        ``seeds``; missing keys take the base values.
    config : RunConfig, optional
        Base configuration.
    jobs : int, optional

    Returns
    -------
    list of dict
        One row per cell in grid order, failed cells carry ``status`` and
        ``error``.
    """
    unknown = set(grid) - set(GRID_KEYS)
    if unknown:
        raise InvalidInput(f"unknown grid keys {sorted(unknown)}")
    doc = RunConfig() if config is None else config
    doc = doc.resolved()
    doc["sweep"].update({key: list(values) for key, values in grid.items()})
    s = Sweep(RunConfig(doc), jobs)
    return s.run()
