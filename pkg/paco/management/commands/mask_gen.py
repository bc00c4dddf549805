from pathlib import Path

from paco.management.base import PacoCommand
from paco.masks import GENERATORS
from paco.services import RunConfig, parse_ints, parse_param


class Command(PacoCommand):
    help = "Write a seeded synthetic erasure mask (byte 0 = known sample)"
    subcommand = "mask-gen"

    def add_arguments(self, parser):
        parser.add_argument("kind", choices=sorted(GENERATORS))
        parser.add_argument("shape", help="signal shape, comma-separated")
        parser.add_argument("output", type=Path)
        parser.add_argument("--param", action="append", default=[], dest="params",
                            help="generator parameter as key=value, repeatable")
        parser.add_argument("--seed", type=int)

    def build_config(self, options):
        return RunConfig(
            subcommand=self.subcommand,
            kind=options["kind"],
            shape=parse_ints(options["shape"], "shape"),
            output=options["output"],
            params=dict(parse_param(p) for p in options["params"]),
            seed=options.get("seed"),
        )

    def show(self, mask):
        self.stdout.write(f"{int(mask.missing.sum())} of {mask.known.size} samples missing")
