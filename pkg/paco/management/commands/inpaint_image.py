from paco.management.base import PacoCommand


class Command(PacoCommand):
    help = "Restore the missing pixels of a PGM/PPM image (patch 16x16, stride 2 by default)"
    subcommand = "inpaint-image"

    def add_arguments(self, parser):
        self.add_io_arguments(parser)
        self.add_solver_arguments(parser)

    def show(self, trace):
        self.stdout.write(self.style.SUCCESS(f"Restored image in {len(trace)} iterations"))
