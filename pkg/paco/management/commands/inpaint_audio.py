from paco.management.base import PacoCommand


class Command(PacoCommand):
    help = "Restore the missing samples of a mono PCM16 WAV file (window 4096, overlap 1/32 by default)"
    subcommand = "inpaint-audio"

    def add_arguments(self, parser):
        self.add_io_arguments(parser)
        self.add_solver_arguments(parser)
        parser.add_argument("--overlap", type=float, default=1 / 32,
                            help="window overlap as a fraction of the window length")

    def build_config(self, options):
        config = super().build_config(options)
        config.overlap = options["overlap"]
        return config

    def show(self, trace):
        self.stdout.write(self.style.SUCCESS(f"Restored audio in {len(trace)} iterations"))
