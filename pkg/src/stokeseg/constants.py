from enum import Enum


class Constants:
    SOLVER_RELATIVE_RESIDUAL: float = 1e-10
    SOLVER_REFINEMENT_STEPS: int = 3
    GMRES_MAX_ITERATIONS: int = 500
    CONDITION_NUMBER_BUDGET: int = 200_000
    CONDITION_NUMBER_DENSE_LIMIT: int = 500
    CONDITION_NUMBER_TOLERANCE: float = 1e-4
    INFSUP_VELOCITY_BUDGET: int = 10_000
    PERTURBATION_AMPLITUDE: float = 0.3
    PERTURBATION_RETRIES: int = 100
    HOLE_RADIUS: float = 0.25
    BILINEAR_QUADRATURE_DEGREE: int = 2
    LOAD_QUADRATURE_DEGREE: int = 5
    ERROR_CELL_QUADRATURE_DEGREE: int = 6
    ERROR_FACET_QUADRATURE_DEGREE: int = 4
    CSV_FLOAT_FORMAT: str = "%.6e"


class Method(Enum):
    EG = 'eg'
    MEG = 'meg'
    PR_MEG = 'pr-meg'


class Problem(Enum):
    VORTEX2D = 'vortex2d'
    CUBE3D = 'cube3d'
    LSHAPE = 'lshape'
    HOLE = 'hole'
