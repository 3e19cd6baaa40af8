from stokeseg.errors import InputError, NumericalError


class InvalidPenalty(InputError):
    pass


class SingularLocalBDM(NumericalError):
    pass
