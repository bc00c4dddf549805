from pathlib import Path

from paco.management.base import PacoCommand
from paco.services import RunConfig


class Command(PacoCommand):
    help = "Print rmse,psnr,mad,bias[,ssim] of a restored file against its reference as one CSV row"
    subcommand = "metrics"

    def add_arguments(self, parser):
        parser.add_argument("reference", type=Path)
        parser.add_argument("restored", type=Path)

    def build_config(self, options):
        return RunConfig(subcommand=self.subcommand, reference=options["reference"], input=options["restored"])

    def show(self, row):
        self.stdout.write(row)
