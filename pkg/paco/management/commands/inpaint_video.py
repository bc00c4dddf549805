from paco.management.base import PacoCommand


class Command(PacoCommand):
    help = "Restore a directory of numbered PGM/PPM frames (patch 4x8x8, strides 1,2,2 by default)"
    subcommand = "inpaint-video"

    def add_arguments(self, parser):
        self.add_io_arguments(parser)
        self.add_solver_arguments(parser)

    def show(self, trace):
        self.stdout.write(self.style.SUCCESS(f"Restored video in {len(trace)} iterations"))
