from stokeseg.errors import InputError


class UnsupportedDegree(InputError):
    pass
