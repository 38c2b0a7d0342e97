#!/usr/bin/env python3
# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

"""Command-line interface: ggtest sample | entropy | test | critical-values | experiment | bounds.

Exit codes: 0 when the hypothesis is not rejected (or the command succeeded), 1 when
`test` rejects, 2 for usage and argument errors, 3 for duplicate points, 4 for a
missing or mismatched critical-value table and 5 for I/O failures.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from bounds import (
    bound_report,
    gg_summary,
    normal_summary,
    pathological_max_entropy_bound,
    pathological_mean,
    uniform_summary,
)
from distributions import (
    GGParams,
    RandomStream,
    STParams,
    gg_entropy,
    iep,
    sample_gg,
    sample_st,
    standardize,
)
from entropy import knn_entropy, knn_entropy_k1
from errors import ConfigurationError, DuplicatePointError, GGTestError, TableLookupError
from gof import (
    critical_values,
    library_version,
    load_table,
    run_test,
    save_table,
    settings_digest,
)
from harness import EXPERIMENTS, build_config, load_config_file, run_experiment, write_rows
from neighbors import Sample

logger = logging.getLogger(__name__)

EXIT_ACCEPT = 0
EXIT_REJECT = 1
EXIT_USAGE = 2
EXIT_DUPLICATES = 3
EXIT_TABLE = 4
EXIT_IO = 5


def _read_sample(path: str) -> Sample:
    try:
        points = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except ValueError as e:
        raise ConfigurationError(f"{path} is not a numeric matrix: {e}") from e
    return Sample(points)


def _print_json(payload) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _cmd_sample(args) -> int:
    stream = RandomStream(seed=args.seed).derive("sample")
    settings = {"dist": args.dist, "m": args.m, "n": args.n, "seed": args.seed}
    if args.dist == "gg":
        params = GGParams(dim=args.m, shape=args.s, rate=args.tau)
        sample = sample_gg(params, args.n, stream)
        if args.standardize:
            sample = standardize(sample, params)
        settings.update(s=args.s, tau=args.tau, standardize=args.standardize)
        header = f"ggtest sample dist=gg m={args.m} s={args.s:g} tau={args.tau:g}"
    else:
        if args.standardize:
            raise ConfigurationError("--standardize applies to gg samples only")
        sample = sample_st(STParams(dim=args.m, dof=args.nu), args.n, stream)
        settings.update(nu=args.nu)
        header = f"ggtest sample dist=st m={args.m} nu={args.nu:g}"
    header += f" n={args.n} seed={args.seed}" + (" standardized" if args.standardize else "")
    header += f" config_sha256={settings_digest(settings)} version={library_version()}"

    target = args.out if args.out else sys.stdout
    np.savetxt(target, sample.points, fmt="%.17g", delimiter=",", header=header)
    if args.out:
        logger.info("wrote %d points to %s", sample.n, args.out)
    return EXIT_ACCEPT


def _cmd_entropy(args) -> int:
    sample = _read_sample(args.data)
    if args.k1:
        estimate = knn_entropy_k1(sample, method=args.method, workers=args.threads)
    else:
        estimate = knn_entropy(sample, args.k, method=args.method, workers=args.threads)
    sys.stdout.write(estimate.model_dump_json(indent=2) + "\n")
    return EXIT_ACCEPT


def _cmd_test(args) -> int:
    sample = _read_sample(args.data)
    table = None
    if args.table:
        try:
            table = load_table(args.table)
        except FileNotFoundError as e:
            raise TableLookupError(f"no critical-value table at {args.table}") from e
    elif args.fresh_mc is None:
        raise TableLookupError("give a critical-value table with --table or use --fresh-mc")
    outcome = run_test(
        sample,
        args.s,
        args.k,
        args.alpha,
        table=table,
        replicates=args.fresh_mc,
        stream=RandomStream(seed=args.seed),
        tail=args.tail,
        workers=args.threads,
        table_path=args.table,
    )
    sys.stdout.write(outcome.model_dump_json(indent=2) + "\n")
    return EXIT_REJECT if outcome.reject else EXIT_ACCEPT


def _cmd_critical_values(args) -> int:
    table = critical_values(
        args.m,
        args.s,
        args.n,
        args.k,
        args.alpha,
        args.replicates,
        RandomStream(seed=args.seed),
        workers=args.threads,
    )
    save_table(table, args.out)
    return EXIT_ACCEPT


def _cmd_experiment(args) -> int:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {
        "dims": args.dims,
        "shapes": args.shapes,
        "data_shapes": args.data_shapes,
        "dofs": args.dofs,
        "sizes": args.sizes,
        "ks": args.ks,
        "repetitions": args.repetitions,
        "replicates": args.replicates,
        "bins": args.bins,
        "seed": args.seed,
        "output": args.out,
    }
    config = build_config(args.name, file_values, overrides)
    rows = run_experiment(config, threads=args.threads)
    if config.output:
        with open(config.output, "w", newline="") as out:
            write_rows(rows, config, out)
        logger.info("wrote %d rows to %s", len(rows), config.output)
    else:
        write_rows(rows, config, sys.stdout)
    return EXIT_ACCEPT


def _cmd_bounds(args) -> int:
    if args.family == "uniform":
        if args.m != 1:
            raise ConfigurationError("the uniform family is available for m = 1 only")
        summary, entropy = uniform_summary(), 0.0
    else:
        if args.family == "normal":
            params = iep(args.m, 2.0)
        elif args.family == "laplace":
            params = GGParams(dim=args.m, shape=1.0, rate=args.tau)
        else:
            params = GGParams(dim=args.m, shape=args.s, rate=args.tau)
        summary = normal_summary(args.m) if args.family == "normal" else gg_summary(params)
        entropy = gg_entropy(params)
    _print_json(
        {
            "family": args.family,
            "summary": summary.model_dump(mode="json"),
            "entropy": entropy,
            "bounds": bound_report(summary),
            "pathological": {
                "mean": pathological_mean(),
                "max_entropy_bound": pathological_max_entropy_bound(),
            },
        }
    )
    return EXIT_ACCEPT


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def _positive_float(value: str) -> float:
    number = float(value)
    if not number > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return number


def _add_global_options(parser: argparse.ArgumentParser, defaults: bool) -> None:
    # A subcommand only sets the options it was given, so that it does not
    # overwrite a value passed before the subcommand name.
    def default(value):
        return value if defaults else argparse.SUPPRESS

    parser.add_argument("--seed", type=int, default=default(None), help="master seed (default 0)")
    parser.add_argument("--threads", type=_positive_int, default=default(1), help="worker threads")
    parser.add_argument("--config", default=default(None), help="YAML file of experiment settings")
    parser.add_argument(
        "--log-level",
        default=default("WARNING"),
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="log level for messages on stderr",
    )


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser for every subcommand.

    The global options are accepted both before and after the subcommand name.
    """
    parser = argparse.ArgumentParser(
        prog="ggtest",
        description="k-NN entropy estimation and an entropy-based test for generalized Gaussians.",
    )
    _add_global_options(parser, defaults=True)
    common = argparse.ArgumentParser(add_help=False)
    _add_global_options(common, defaults=False)
    commands = parser.add_subparsers(dest="command", required=True)

    sample = commands.add_parser(
        "sample", parents=[common], help="draw a GG or Student-t sample as CSV"
    )
    sample.add_argument("--dist", choices=["gg", "st"], default="gg")
    sample.add_argument("--n", type=_positive_int, required=True)
    sample.add_argument("--m", type=_positive_int, default=1)
    sample.add_argument("--s", type=_positive_float, default=2.0, help="GG shape")
    sample.add_argument("--tau", type=_positive_float, default=0.5, help="GG rate")
    sample.add_argument("--nu", type=_positive_float, default=3.0, help="Student-t dof")
    sample.add_argument("--standardize", action="store_true", help="rescale to unit variance")
    sample.add_argument("--out", help="output CSV (default stdout)")
    sample.set_defaults(handler=_cmd_sample)

    entropy = commands.add_parser(
        "entropy", parents=[common], help="estimate the entropy of a CSV sample"
    )
    entropy.add_argument("data")
    entropy.add_argument("--k", type=_positive_int, default=1)
    entropy.add_argument("--method", choices=["auto", "brute", "kdtree"], default="auto")
    entropy.add_argument("--k1", action="store_true", help="use the k = 1 closed form")
    entropy.set_defaults(handler=_cmd_entropy)

    test = commands.add_parser("test", parents=[common], help="test a CSV sample for GG(m, s)")
    test.add_argument("data")
    test.add_argument("--s", type=_positive_float, required=True)
    test.add_argument("--k", type=_positive_int, default=1)
    test.add_argument("--alpha", type=float, default=0.05)
    test.add_argument("--tail", choices=["left", "right", "two-sided"], default="left")
    source = test.add_mutually_exclusive_group()
    source.add_argument("--table", help="critical-value table (JSON)")
    source.add_argument(
        "--fresh-mc", type=_positive_int, metavar="REPLICATES", help="simulate critical values"
    )
    test.set_defaults(handler=_cmd_test)

    table = commands.add_parser(
        "critical-values", parents=[common], help="simulate a critical-value table"
    )
    table.add_argument("--m", type=_positive_int, required=True)
    table.add_argument("--s", type=_positive_float, required=True)
    table.add_argument("--n", type=_positive_int, required=True)
    table.add_argument("--k", type=_positive_int, default=1)
    table.add_argument("--alpha", type=float, nargs="+", default=[0.01, 0.025, 0.05, 0.1])
    table.add_argument("--replicates", type=_positive_int, default=1000)
    table.add_argument("--out", required=True)
    table.set_defaults(handler=_cmd_critical_values)

    experiment = commands.add_parser(
        "experiment", parents=[common], help="run a numerical study to CSV"
    )
    experiment.add_argument("name", choices=EXPERIMENTS)
    experiment.add_argument("--dims", type=_positive_int, nargs="+")
    experiment.add_argument("--shapes", type=_positive_float, nargs="+")
    experiment.add_argument("--data-shapes", type=_positive_float, nargs="+")
    experiment.add_argument("--dofs", type=_positive_float, nargs="+")
    experiment.add_argument("--sizes", type=_positive_int, nargs="+")
    experiment.add_argument("--ks", type=_positive_int, nargs="+")
    experiment.add_argument("--repetitions", type=_positive_int)
    experiment.add_argument("--replicates", type=_positive_int)
    experiment.add_argument("--bins", type=_positive_int)
    experiment.add_argument("--out")
    experiment.set_defaults(handler=_cmd_experiment)

    bounds = commands.add_parser(
        "bounds", parents=[common], help="print entropy bounds for a built-in family"
    )
    bounds.add_argument("--family", choices=["gg", "normal", "laplace", "uniform"], default="gg")
    bounds.add_argument("--m", type=_positive_int, default=1)
    bounds.add_argument("--s", type=_positive_float, default=2.0)
    bounds.add_argument("--tau", type=_positive_float, default=0.5)
    bounds.set_defaults(handler=_cmd_bounds)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and return its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    if args.command != "experiment":
        if args.config:
            logger.warning("--config only applies to the experiment command; ignoring it")
        if args.seed is None:
            args.seed = 0

    try:
        return args.handler(args)
    except DuplicatePointError as e:
        logger.error("%s", e)
        return EXIT_DUPLICATES
    except TableLookupError as e:
        logger.error("%s", e)
        return EXIT_TABLE
    except (GGTestError, ValidationError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except OSError as e:
        logger.error("%s", e)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
