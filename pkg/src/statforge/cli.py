"""Command-line entry point.

Subcommands: ``run`` executes one experiment from a flat key=value config
file, ``list-experiments`` prints the registry, ``dist`` evaluates a
distribution function at a point. Exit codes: 0 all tolerances met,
2 a tolerance failed, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import secrets
import sys

from .distributions import (Bernoulli, Beta, Binomial, ChiSquared, Exponential,
                            FisherF, Gamma, Geometric, LogNormal, Normal,
                            Poisson, StudentT, Uniform01, dist_cdf, dist_pdf,
                            dist_quantile)
from .errors import StatforgeError
from .experiments import (experiment_tags, parse_config_file, run_experiment)

_DIST_BUILDERS = {
    "normal": (Normal, ("mu", "sigma2")),
    "lognormal": (LogNormal, ("mu", "sigma2")),
    "gamma": (Gamma, ("alpha", "lam")),
    "chisquared": (ChiSquared, ("k",)),
    "studentt": (StudentT, ("k",)),
    "fisherf": (FisherF, ("k1", "k2")),
    "beta": (Beta, ("alpha", "beta")),
    "exponential": (Exponential, ("lam",)),
    "bernoulli": (Bernoulli, ("p",)),
    "binomial": (Binomial, ("p", "n")),
    "poisson": (Poisson, ("lam",)),
    "geometric": (Geometric, ("p",)),
    "uniform01": (Uniform01, ()),
}

_INT_FIELDS = {"k", "k1", "k2", "n"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="statforge")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a config file")
    run.add_argument("config", help="path to a key = value config file")
    run.add_argument("--seed", type=int, default=None,
                     help="override the config seed")
    run.add_argument("--fresh-seed", action="store_true",
                     help="draw a new seed from the OS and record it")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out", default=None, help="directory for report files")
    run.add_argument("--format", choices=["json", "csv"], default="json")
    run.add_argument("--set", dest="assignments", action="append", default=[],
                     metavar="KEY=VALUE", help="override any config key")

    sub.add_parser("list-experiments", help="print the experiment registry")

    dist = sub.add_parser("dist", help="evaluate a distribution function")
    dist.add_argument("tag", help="family:params, e.g. normal:0,1 or chisquared:4")
    group = dist.add_mutually_exclusive_group(required=True)
    group.add_argument("--pdf", type=float, default=None, metavar="X")
    group.add_argument("--cdf", type=float, default=None, metavar="X")
    group.add_argument("--quantile", type=float, default=None, metavar="U")
    return parser


def _parse_dist_tag(tag: str):
    name, _, raw = tag.partition(":")
    if name not in _DIST_BUILDERS:
        raise StatforgeError(
            f"unknown distribution {name!r}; choose from {sorted(_DIST_BUILDERS)}")
    builder, fields = _DIST_BUILDERS[name]
    pieces = [p for p in raw.split(",") if p != ""]
    if len(pieces) != len(fields):
        raise StatforgeError(
            f"{name} expects {len(fields)} parameters ({', '.join(fields)})")
    kwargs = {}
    for field, piece in zip(fields, pieces):
        kwargs[field] = int(piece) if field in _INT_FIELDS else float(piece)
    return builder(**kwargs)


def _cmd_dist(args) -> int:
    spec = _parse_dist_tag(args.tag)
    if args.pdf is not None:
        value = dist_pdf(spec, args.pdf)
    elif args.cdf is not None:
        value = dist_cdf(spec, args.cdf)
    else:
        value = dist_quantile(spec, args.quantile)
    print(f"{value:.17g}")
    return 0


def _parse_assignment(text: str):
    if "=" not in text:
        raise StatforgeError(f"--set expects KEY=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    from .experiments import _parse_scalar

    return key.strip(), _parse_scalar(value)


def _write_outputs(envelope, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(envelope.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "metrics.csv"), "w", encoding="utf-8",
              newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "value", "target", "tolerance", "se",
                         "passed", "method"])
        for m in envelope.metrics:
            writer.writerow([m.name, m.value, m.target, m.tolerance, m.se,
                             m.passed, m.method])


def _cmd_run(args) -> int:
    overrides = dict(_parse_assignment(a) for a in args.assignments)
    if args.fresh_seed:
        overrides["seed"] = secrets.randbits(63)
    if args.seed is not None:
        overrides["seed"] = args.seed
    config = parse_config_file(args.config, overrides)
    envelope = run_experiment(config, workers=max(1, args.workers))
    if args.out:
        _write_outputs(envelope, args.out)
    if args.format == "json":
        print(json.dumps(envelope.to_dict(), indent=2, sort_keys=True))
    else:
        print("name,value,target,tolerance,se,passed,method")
        for m in envelope.metrics:
            print(f"{m.name},{m.value},{m.target},{m.tolerance},{m.se},"
                  f"{m.passed},{m.method}")
    return 0 if envelope.passed else 2


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-experiments":
            for tag in experiment_tags():
                print(tag)
            return 0
        if args.command == "dist":
            return _cmd_dist(args)
        raise AssertionError(args.command)
    except StatforgeError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
