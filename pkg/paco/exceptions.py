EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SOLVER = 4


class PacoError(Exception):
    """Base error; carries the module it came from and the CLI exit code."""
    module = "paco"
    exit_code = 1

    def __init__(self, message, module=None):
        if module:
            self.module = module
        super().__init__(message)

    def __str__(self):
        return f"{self.module}: {super().__str__()}"


class ShapeMismatchError(PacoError, ValueError):
    exit_code = EXIT_USAGE


class GridError(PacoError, ValueError):
    module = "patch_grid"
    exit_code = EXIT_USAGE


class ConstraintError(PacoError, ValueError):
    exit_code = EXIT_USAGE


class MediaFormatError(PacoError):
    module = "ndsignal"
    exit_code = EXIT_IO


class MaskError(PacoError):
    module = "ndsignal"
    exit_code = EXIT_IO


class DictionaryError(PacoError, ValueError):
    module = "transforms"
    exit_code = EXIT_IO


class WeightEstimationError(PacoError):
    module = "paco_dct_inpaint"
    exit_code = EXIT_SOLVER


class SolverAbort(PacoError):
    module = "solver"
    exit_code = EXIT_SOLVER
