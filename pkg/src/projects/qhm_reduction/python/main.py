#!/usr/bin/env python3

import argparse
import logging
import sys

from qhmr import __version__
from qhmr.commands import cmd_generate, cmd_info, cmd_reduce, cmd_verify
from qhmr.config import ORDERS, get_settings, set_settings
from qhmr.generators import GENERATORS
from qhmr.reduction import ALGORITHMS

LOG_FORMAT = "[%(levelname)s] %(message)s"


def _common_options(parser, default):
    parser.add_argument("--tol", type=float, default=default,
                        help="relative rank/positivity tolerance (default from config "
                             "or QHMR_TOL)")
    parser.add_argument("--seed", type=int, default=default,
                        help="seed of the randomized block decomposition")
    return parser


def build_parser():
    # accepted before or after the subcommand; the subcommand value wins
    common = _common_options(argparse.ArgumentParser(add_help=False), argparse.SUPPRESS)
    parser = argparse.ArgumentParser(
        description="Exact CPTP reduction of quantum hidden Markov models")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv for debug output")
    _common_options(parser, None)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", parents=[common],
                         help="write a built-in model to a JSON file")
    gen.add_argument("name", choices=sorted(GENERATORS))
    gen.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                     help="generator parameter, repeatable (e.g. --param N=16)")
    gen.add_argument("-o", "--output", default=None, help="output model file")

    info = sub.add_parser("info", parents=[common],
                          help="print dimensions and ranks of a model")
    info.add_argument("model")

    red = sub.add_parser("reduce", parents=[common],
                         help="reduce a model and write its certificate")
    red.add_argument("model")
    red.add_argument("--algorithm", choices=ALGORITHMS, default="iterative")
    red.add_argument("--max-iters", type=int, default=None)
    red.add_argument("--order", choices=ORDERS, default=None)
    red.add_argument("--horizon", type=int, default=None)
    red.add_argument("-o", "--output", default=None, help="output certificate file")

    ver = sub.add_parser("verify", parents=[common],
                         help="check a certificate against its model")
    ver.add_argument("model")
    ver.add_argument("certificate")
    ver.add_argument("--horizon", type=int, default=None)
    ver.add_argument("--trials", type=int, default=None)
    ver.add_argument("--max-deviation", type=float, default=None)
    return parser


def main(argv):
    args = build_parser().parse_args(argv[1:])
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)

    try:
        settings = get_settings().replace(
            tol=args.tol, seed=args.seed,
            max_iters=getattr(args, "max_iters", None),
            order=getattr(args, "order", None),
            horizon=getattr(args, "horizon", None))
    except ValueError as e:
        logging.error("invalid option: %s", e)
        return 1
    set_settings(settings)

    if args.command == "generate":
        return cmd_generate(args.name, args.param, args.output)
    if args.command == "info":
        return cmd_info(args.model, settings)
    if args.command == "reduce":
        return cmd_reduce(args.model, args.algorithm, args.output, settings)
    return cmd_verify(args.model, args.certificate, args.horizon, args.trials,
                      args.max_deviation, settings)


if __name__ == "__main__":
    sys.exit(main(sys.argv))
