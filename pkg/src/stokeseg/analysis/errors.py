from stokeseg.errors import InputError


class InvalidStudy(InputError):
    """A study was requested with parameters it cannot run with."""
