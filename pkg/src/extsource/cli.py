"""Command line entry point: ``extsource <experiment> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ExperimentConfig, load_config, parse_assignments
from .errors import ExtSourceError
from .experiments import EXPERIMENTS, run_experiment
from .report import write_report
from .rng import MAX_SEED

log = logging.getLogger("extsource")

_HELP = {
    "density": "limiting density on a grid (x,rho); --svg adds a histogram overlay",
    "edges": "band edges z2 < z1 of the two-band support",
    "sample": "eigenvalues of one sampled matrix",
    "locallaw": "eigenvalue counts in bulk intervals vs n * limiting mass",
    "crude": "max N_I / (n |I|) over random bulk intervals across sizes",
    "variance": "variance of the empirical Stieltjes transform across n and eta",
    "concentration": "tail frequencies of the empirical Stieltjes transform",
    "bias": "|E s_n(z) - s(z)| across sizes with a log-log rate fit",
    "perturb": "eigenvector derivative formulas vs finite differences",
}


def _seed(text: str) -> int:
    value = int(text, 10)
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _threads(text: str) -> int:
    value = int(text, 10)
    if value < 1:
        raise argparse.ArgumentTypeError(f"threads must be >= 1, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--seed", type=_seed, help="master seed (overrides the config file)")
    common.add_argument("--threads", type=_threads, default=1, help="worker threads for trials")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--svg", action="store_true", help="also write an SVG overlay (density)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration key; may be repeated")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="extsource",
        description="Spectral density and Monte Carlo checks for Wigner matrices with a "
                    "two-valued external source.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common], help=_HELP[name])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        overrides = parse_assignments(args.overrides)
        if args.seed is not None:
            overrides["seed"] = args.seed
        cfg = cfg.with_values(**overrides)
        report = run_experiment(args.experiment, cfg, threads=args.threads, svg=args.svg)
        paths = write_report(report, args.out)
    except (ExtSourceError, OSError) as exc:
        print(f"extsource {args.experiment}: error: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        log.info("wrote %s", path)
    for key, value in report.summary.items():
        print(f"{key} = {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
