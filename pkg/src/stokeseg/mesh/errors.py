from stokeseg.errors import InputError, NumericalError


class MeshError(InputError):
    pass


class ParseError(MeshError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class TopologyError(MeshError):
    pass


class DegenerateCellError(MeshError):
    pass


class UnsupportedDimension(MeshError):
    pass


class PerturbationFoldover(NumericalError):
    pass


class InvalidMeshParameter(MeshError):
    pass
