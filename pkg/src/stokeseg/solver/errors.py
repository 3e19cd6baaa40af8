from stokeseg.errors import NumericalError


class SingularSystem(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class BudgetExceeded(NumericalError):
    pass
