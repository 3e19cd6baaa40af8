from stokeseg.errors import NumericalError


class SingularLocalMass(NumericalError):
    pass
