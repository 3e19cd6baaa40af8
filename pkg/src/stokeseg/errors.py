class StokesEGError(Exception):
    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class InputError(StokesEGError):
    """Bad user input: configuration, mesh files, unsupported parameters."""


class NumericalError(StokesEGError):
    """A discretization or linear-algebra step broke down."""
