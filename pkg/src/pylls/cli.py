# -*- coding: utf-8 -*-
"""
Command line front end.

::

    pylls generate   --config CFG --out DIR [--seed S]
    pylls train-disc --config CFG --dataset CSV --out DIR [--seed S]
    pylls run        --config CFG --dataset CSV --out DIR [--mode M]
                     [--with-metrics --ground-truth JSON]
    pylls sweep      --config CFG --out DIR [--jobs N]
    pylls selftest   [--seed S]

Every command but selftest writes the fully resolved configuration to
``config.json`` in its output directory. CSV outputs and ``timings.json``
carry no configuration of their own; their sibling ``config.json`` is the
record of the run that produced them.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime
failure, 3 partial sweep failure.
"""

import argparse
import json
import os
import sys

from . import __version__
from .analysis import MODES
from .config import RunConfig
from .dataset import DomainDataset
from .ddfa import DDFA, NaiveDDFA
from .discriminator import train_discriminator
from .errors import InvalidInput, PyllsError, StageError, ValidationError
from .selftest import print_selftest, run_selftest
from .sweep import Sweep
from .synthgen import ProblemInstance

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2
EXIT_PARTIAL = 3

EPILOG = (
    "Each command writes its resolved configuration to config.json next to "
    "its other outputs; CSV files and timings.json rely on that sibling file."
)


def _load_config(args):
    cfg = RunConfig.from_json(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.override_seed(args.seed)
    return cfg


def _outdir(args):
    os.makedirs(args.out, exist_ok=True)
    return lambda name: os.path.join(args.out, name)


def _dump(d, path):
    with open(path, "w") as f:
        json.dump(d, f, indent=2)
        f.write("\n")


def cmd_generate(args):
    cfg = _load_config(args)
    out = _outdir(args)
    instance = cfg.make_instance()
    dataset = instance.dataset.hidden() if cfg.data["hide_labels"] else instance.dataset
    dataset.to_csv(out("dataset.csv"))
    instance.write_ground_truth(out("ground_truth.json"), config=cfg.resolved())
    cfg.to_json(out("config.json"))
    print(f"{dataset.n} records for {instance!r} written to {args.out}")
    return EXIT_OK


def cmd_train_disc(args):
    cfg = _load_config(args)
    out = _outdir(args)
    data = DomainDataset.from_csv(args.dataset).without_labels()
    valid = data.split("valid")
    train = data.split("train")
    model = train_discriminator(train, valid if valid.n else train, cfg.train_config())
    model.to_json(out("model.json"), config=cfg.resolved())
    model.write_loss_csv(out("loss.csv"))
    cfg.to_json(out("config.json"))
    print(f"best epoch {model.best_epoch}, valid loss {min(model.valid_loss):.6f}")
    return EXIT_OK


def cmd_run(args):
    cfg = _load_config(args)
    mode = args.mode or cfg.pipeline["mode"]
    if args.with_metrics and args.ground_truth is None:
        raise InvalidInput("--with-metrics needs --ground-truth")
    if mode == "oracle" and not args.with_metrics:
        raise InvalidInput("oracle mode reads the ground truth and needs --with-metrics")
    cfg.pipeline["mode"] = mode
    if cfg.pipeline["n_clusters"] is None:
        cfg.pipeline["n_clusters"] = cfg.problem["m"]
    if cfg.pipeline["seed"] is None:
        cfg.pipeline["seed"] = cfg.problem["seed"]
    resolved = cfg.resolved()

    dataset = DomainDataset.from_csv(args.dataset)
    data = dataset
    if args.with_metrics:
        data = ProblemInstance.read_ground_truth(args.ground_truth, dataset=dataset)
    cls = NaiveDDFA if mode == "naive" else DDFA
    options = cfg.analysis_options(print_output=True)
    analysis = cls(data, options, cfg.train_config(), k=cfg.problem["k"])
    analysis.run()

    out = _outdir(args)
    analysis.write_report(out("report.json"), config=resolved)
    analysis.write_predictions(out("predictions.csv"))
    analysis.write_assignments(out("assignments.csv"))
    analysis.write_factors(out("factors.json"), config=resolved)
    if analysis.getModel() is not None:
        analysis.getModel().to_json(out("model.json"), config=resolved)
    analysis.write_timings(out("timings.json"))
    cfg.to_json(out("config.json"))
    return EXIT_OK


def cmd_sweep(args):
    cfg = _load_config(args)
    out = _outdir(args)
    s = Sweep(cfg, jobs=args.jobs)
    s.run()
    s.write(args.out)
    cfg.to_json(out("config.json"))
    print(s.summary().to_string(index=False))
    if s.n_failed:
        print(f"{s.n_failed} of {len(s.rows)} cells failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_selftest(args):
    results = run_selftest(seed=args.seed or 0, perturb_rank=args.inject_rank_defect)
    print_selftest(results)
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pylls",
        description="Latent label shift identification pipeline",
        epilog=EPILOG,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, dataset=False):
        p.add_argument("--config", default=None, help="JSON run configuration")
        p.add_argument("--out", required=True, help="Output directory, also receives config.json")
        p.add_argument("--seed", type=int, default=None, help="Overrides the config seeds")
        if dataset:
            p.add_argument("--dataset", required=True, help="Dataset CSV")

    p = sub.add_parser("generate", help="Generate a synthetic dataset and its ground truth")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train-disc", help="Train a domain discriminator")
    common(p, dataset=True)
    p.set_defaults(func=cmd_train_disc)

    p = sub.add_parser("run", help="Run the pipeline on a dataset")
    common(p, dataset=True)
    p.add_argument("--mode", choices=MODES, default=None)
    p.add_argument("--with-metrics", action="store_true", help="Score against the ground truth")
    p.add_argument("--ground-truth", default=None, help="Ground-truth JSON")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="Run a parameter grid")
    common(p)
    p.add_argument("--jobs", type=int, default=1, help="Worker processes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("selftest", help="Run the identifiability checks")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--inject-rank-defect", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID if isinstance(e.cause, ValidationError) else EXIT_RUNTIME
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (PyllsError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
