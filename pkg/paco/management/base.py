import logging
import re
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from paco.exceptions import PacoError
from paco.services import RestorationService, RunConfig, exit_code_for, parse_clip, parse_ints

VERBOSITY_LEVELS = {0: logging.WARNING, 1: None, 2: logging.DEBUG, 3: logging.DEBUG}
NUMBER_PAIR = re.compile(r"^-?[\d.]+(e[+-]?\d+)?,-?[\d.]+(e[+-]?\d+)?$", re.IGNORECASE)


def join_option_values(args, flags=("--clip",)):
    """Attach a ``lo,hi`` value that starts with a minus sign to its flag.

    argparse reads a token such as ``-32768,32767`` as an option string, so
    ``--clip -32768,32767`` becomes ``--clip=-32768,32767``.
    """
    if args is None:
        return None
    args = list(args)
    joined = []
    i = 0
    while i < len(args):
        if args[i] in flags and i + 1 < len(args) and NUMBER_PAIR.match(str(args[i + 1])):
            joined.append(f"{args[i]}={args[i + 1]}")
            i += 2
        else:
            joined.append(args[i])
            i += 1
    return joined


class PacoCommand(BaseCommand):
    """Shared flag handling; subclasses name the subcommand and print its result."""
    subcommand = None

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parse_args = parser.parse_args
        parser.parse_args = lambda args=None, namespace=None: parse_args(join_option_values(args), namespace)
        return parser

    def add_solver_arguments(self, parser):
        parser.add_argument("--patch", help="patch extents, comma-separated per axis")
        parser.add_argument("--stride", help="patch strides, comma-separated per axis")
        parser.add_argument("--kappa", type=float, help="initial lambda is kappa times the signal peak")
        parser.add_argument("--shrink", type=float, help="lambda factor applied when the cost goes up")
        parser.add_argument("--max-iter", type=int, dest="max_iter")
        parser.add_argument("--tol", type=float)
        parser.add_argument("--clip", nargs="?", const="auto",
                            help="clamp restored samples to lo,hi (media range when no value is given)")
        parser.add_argument("--no-partial", action="store_true", dest="no_partial",
                            help="update every patch instead of only those touching missing samples")
        parser.add_argument("--trace", type=Path, help="write the per-iteration trace as CSV")
        parser.add_argument("--scaled-trace", action="store_true", dest="scaled_trace",
                            help="scale trace values by 1/(n*m*peak)")
        parser.add_argument("--ref", type=Path, dest="reference",
                            help="ground truth for per-iteration metrics in the trace")
        parser.add_argument("--workers", type=int, help="scipy.fft worker threads")

    def add_io_arguments(self, parser):
        parser.add_argument("input", type=Path)
        parser.add_argument("mask", type=Path)
        parser.add_argument("output", type=Path)

    def build_config(self, options) -> RunConfig:
        return RunConfig(
            subcommand=self.subcommand,
            input=options.get("input"),
            mask=options.get("mask"),
            output=options.get("output"),
            patch_shape=parse_ints(options["patch"], "--patch") if options.get("patch") else None,
            strides=parse_ints(options["stride"], "--stride") if options.get("stride") else None,
            kappa=options.get("kappa"),
            shrink=options.get("shrink"),
            max_iter=options.get("max_iter"),
            tol=options.get("tol"),
            clip=parse_clip(options.get("clip")),
            partial=False if options.get("no_partial") else None,
            trace=options.get("trace"),
            scaled_trace=bool(options.get("scaled_trace")),
            reference=options.get("reference"),
            workers=options.get("workers"),
        )

    def show(self, result):
        pass

    def handle(self, *args, **options):
        level = VERBOSITY_LEVELS.get(options.get("verbosity", 1))
        if level is not None:
            logging.getLogger("paco").setLevel(level)
        try:
            result = RestorationService(self.build_config(options)).dispatch()
        except (PacoError, OSError) as e:
            raise CommandError(str(e), returncode=exit_code_for(e))
        self.show(result)
