"""
cli.py — Command-Line Entry Point
Grassmann tensor toolkit: subcommand router, logging setup and exit codes.
"""

import argparse
import logging
import sys
from pathlib import Path

import config
from modules import experiment, pipeline
from modules.errors import GeometryError
from modules.report import format_lines

logger = logging.getLogger("gtensor")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with EXIT_USAGE instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(config.EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None


def build_parser():
    parser = _Parser(prog="gtensor", description="Grassmann tensors of multiview camera configurations")
    parser.add_argument("--version", action="version", version=f"%(prog)s {config.VERSION}")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    def _experiment_args(p):
        p.add_argument("--experiment", help="JSON file of experiment settings")
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=_int_list, help="target dimensions, e.g. 2,2,2")
        p.add_argument("--alpha", type=_int_list, help="profile, e.g. 2,1,1")
        p.add_argument("--restarts", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--sigma", type=float)
        p.add_argument("--min-count", type=int, dest="min_count")
        p.add_argument("--seeds", type=int, help="seed-battery size for verify")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--plots", help="directory for HTML charts and CSV tables")
        p.add_argument("--report", help="write the JSON report here")

    p = sub.add_parser("generate", help="seeded cameras, tensor and correspondences")
    _experiment_args(p)
    p.add_argument("--count", type=int, dest="correspondences")

    p = sub.add_parser("tensor", help="Grassmann tensor of a camera file")
    p.add_argument("--config", required=True)
    p.add_argument("--alpha", type=_int_list, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("estimate", help="tensor from correspondences or point tuples")
    _experiment_args(p)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--correspondences")
    source.add_argument("--points")
    p.add_argument("--out")

    p = sub.add_parser("reconstruct", help="cameras from a tensor or point tuples")
    _experiment_args(p)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--tensor")
    source.add_argument("--points")
    p.add_argument("--out")

    p = sub.add_parser("twist", help="dual configuration for m = (1,...,1)")
    _experiment_args(p)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--verify", action="store_true")

    p = sub.add_parser("verify", help="acceptance suite over the acceptance shapes")
    _experiment_args(p)

    p = sub.add_parser("pipeline", help="generate, estimate, reconstruct and twist")
    _experiment_args(p)
    return parser


_EXPERIMENT_KEYS = ("seed", "n", "m", "alpha", "restarts", "samples", "sigma", "min_count",
                    "out_dir", "plots", "correspondences", "seeds")


def _experiment(args):
    overrides = {k: getattr(args, k, None) for k in _EXPERIMENT_KEYS}
    return experiment.load(args.experiment, **overrides)


def _dispatch(args):
    if args.command == "tensor":
        pipeline.cmd_tensor(args.config, args.alpha, args.out)
        return None

    exp = _experiment(args)
    if args.command == "generate":
        for name, path in pipeline.cmd_generate(exp).items():
            print(f"{name}: {path}")
        return None
    if args.command == "estimate":
        return pipeline.cmd_estimate(exp, args.correspondences, args.points, args.out)
    if args.command == "reconstruct":
        return pipeline.cmd_reconstruct(exp, args.tensor, args.points, args.out)
    if args.command == "twist":
        return pipeline.cmd_twist(exp, args.config, args.out, args.verify)
    if args.command == "verify":
        return pipeline.cmd_verify(exp)
    return pipeline.cmd_pipeline(exp)


def main(argv=None):
    """Run one subcommand; returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=config.LOG_FORMAT)

    try:
        report = _dispatch(args)
    except GeometryError as exc:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return config.EXIT_VALIDATION

    if report is None:
        return config.EXIT_OK
    for line in format_lines(report):
        print(line)
    if getattr(args, "report", None):
        report.save(args.report)
    elif args.command in ("verify", "pipeline"):
        report.save(Path(report.settings["out_dir"]) / f"{args.command}_report.json")
    return config.EXIT_OK if report.passed else config.EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
