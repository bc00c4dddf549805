from pathlib import Path

from paco.management.base import PacoCommand


class Command(PacoCommand):
    help = "Inpaint every image of a directory with one mask and report RMSE/SSIM quartiles"
    subcommand = "benchmark-corpus"

    def add_arguments(self, parser):
        parser.add_argument("input", type=Path, help="directory of PGM/PPM images")
        parser.add_argument("mask", type=Path)
        parser.add_argument("--output-dir", type=Path, dest="output", help="also write the restored images here")
        self.add_solver_arguments(parser)

    def show(self, lines):
        for line in lines:
            self.stdout.write(line)
