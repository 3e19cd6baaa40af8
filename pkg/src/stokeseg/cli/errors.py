from stokeseg.errors import InputError


class ConfigError(InputError):
    pass
