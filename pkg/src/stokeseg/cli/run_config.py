import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from stokeseg import config
from stokeseg.analysis.exact_solutions import ExactSolution, solution_cube3d, solution_lshape, solution_vortex2d
from stokeseg.cli.errors import ConfigError
from stokeseg.constants import Method, Problem
from stokeseg.mesh.errors import InvalidMeshParameter
from stokeseg.mesh.generators import (generate_lshape, generate_square_with_hole, generate_unit_cube,
                                      generate_unit_square, perturb)
from stokeseg.mesh.mesh_io import load_mesh
from stokeseg.mesh.simplicial_mesh import SimplicialMesh

logger = logging.getLogger(__name__)

EMIT_CHOICES = frozenset({"csv", "vtk", "svg"})
DEFAULT_EMIT = {"convergence": {"csv"}, "sweep": {"csv"}, "export-vtk": {"vtk"}, "quality": {"csv"}}
COMMAND_EMIT = {"convergence": {"csv", "svg"}, "sweep": {"csv", "svg"}, "export-vtk": {"vtk"}, "quality": {"csv"}}
FILE_PREFIX = "file:"

_GENERATORS: dict[Problem, Callable[[int], SimplicialMesh]] = {
    Problem.VORTEX2D: generate_unit_square,
    Problem.CUBE3D: generate_unit_cube,
    Problem.LSHAPE: generate_lshape,
    Problem.HOLE: generate_square_with_hole,
}

_SOLUTIONS: dict[Problem, Callable[[float], ExactSolution]] = {
    Problem.VORTEX2D: solution_vortex2d,
    Problem.CUBE3D: solution_cube3d,
    Problem.LSHAPE: solution_lshape,
    Problem.HOLE: solution_vortex2d,
}


def parse_grid(text: Optional[str], name: str) -> list[float]:
    """Comma list ``a,b,c`` or inclusive range ``start:stop:step``."""
    if text is None:
        return []
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(part) for part in text.split(":"))
            if step <= 0 or stop < start:
                raise ConfigError(f"{name} range {text!r} must have start <= stop and a positive step")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [float(v) for v in np.round(start + step * np.arange(count), 12)]
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse {name} grid {text!r}")


def parse_mesh_size(text: str) -> int:
    """``1/n`` or ``n``; returns the number of subdivisions n."""
    numerator, _, denominator = text.partition("/")
    try:
        n = int(denominator) if denominator else int(numerator)
        if denominator and float(numerator) != 1.0:
            raise ValueError
    except ValueError:
        raise ConfigError(f"mesh size must be written 1/n, got {text!r}")
    if n < 1:
        raise ConfigError(f"mesh size must be written 1/n with n >= 1, got {text!r}")
    return n


def parse_levels(text: Optional[str]) -> list[int]:
    if text is None:
        return []
    return [parse_mesh_size(part.strip()) for part in text.split(",") if part.strip()]


def parse_methods(text: str) -> list[Method]:
    try:
        methods = [Method(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"unknown method in {text!r}; expected {', '.join(m.value for m in Method)}")
    if not methods:
        raise ConfigError("no method given")
    return methods


def parse_emit(text: Optional[str], command: str) -> frozenset[str]:
    if text is None:
        return frozenset(DEFAULT_EMIT[command])
    emit = frozenset(part.strip() for part in text.split(",") if part.strip())
    unknown = emit - EMIT_CHOICES
    if unknown:
        raise ConfigError(f"unknown emit target(s): {', '.join(sorted(unknown))}")
    unsupported = emit - COMMAND_EMIT[command]
    if unsupported:
        raise ConfigError(f"{command} does not produce {', '.join(sorted(unsupported))}")
    return emit


@dataclass(frozen=True)
class RunConfig:
    command: str
    methods: list[Method]
    problem: Optional[Problem]
    mesh_path: Optional[Path]
    levels: list[int]
    nu: list[float]
    rho: list[float]
    rho_m: list[float]
    seed: int = 0
    perturb: float = 0.0
    out: Path = Path(config.OUTPUT_DIR)
    emit: frozenset[str] = field(default_factory=frozenset)
    condition: bool = False

    @property
    def method(self) -> Method:
        return self.methods[0]

    @property
    def problem_name(self) -> str:
        return self.problem.value if self.problem else str(self.mesh_path)

    @property
    def single_rho(self) -> Optional[float]:
        return self.rho[0] if self.rho else None

    def exact(self, nu: Optional[float] = None, dim: Optional[int] = None) -> ExactSolution:
        nu = self.nu[0] if nu is None else nu
        if self.problem is not None:
            return _SOLUTIONS[self.problem](nu)
        return solution_cube3d(nu) if dim == 3 else solution_vortex2d(nu)

    def mesh(self, n: Optional[int] = None) -> SimplicialMesh:
        if self.mesh_path is not None:
            mesh = load_mesh(self.mesh_path)
        else:
            try:
                mesh = _GENERATORS[self.problem](n)
            except InvalidMeshParameter as ex:
                raise ConfigError(ex.message)
        if self.perturb:
            mesh = perturb(mesh, self.perturb, self.seed)
        return mesh

    def mesh_factory(self, n: Optional[int] = None) -> Callable[[], SimplicialMesh]:
        return lambda: self.mesh(n)


def _parse_problem(text: str) -> tuple[Optional[Problem], Optional[Path]]:
    if text.startswith(FILE_PREFIX):
        path = Path(text[len(FILE_PREFIX):])
        if not path.is_file():
            raise ConfigError(f"mesh file {str(path)!r} does not exist")
        return None, path
    try:
        return Problem(text), None
    except ValueError:
        raise ConfigError(f"unknown problem {text!r}")


def _check_penalties(command: str, methods: list[Method], rho: list[float], rho_m: list[float], nu: list[float]):
    if rho and Method.EG not in methods:
        raise ConfigError("mEG accepts no penalty parameter")
    if rho_m and command != "sweep":
        raise ConfigError("--rho-m is only valid for a penalty sweep")
    if rho_m and Method.MEG not in methods:
        raise ConfigError("--rho-m applies to the meg method only")
    if rho_m and len(nu) > 1:
        raise ConfigError("a sweep takes a penalty grid or a viscosity grid, not both")
    if any(not v > 0 for v in rho + rho_m):
        raise ConfigError("penalty parameters must be positive")


def build_run_config(args) -> RunConfig:
    """Validate parsed arguments for one command and resolve defaults."""
    command = args.command
    methods = parse_methods(args.method)
    problem, mesh_path = _parse_problem(args.problem)
    nu = parse_grid(args.nu, "viscosity")
    rho = parse_grid(args.rho, "penalty")
    rho_m = parse_grid(getattr(args, "rho_m", None), "penalty")
    levels = parse_levels(args.levels) if args.levels else []
    if args.h:
        if levels:
            raise ConfigError("give either --levels or --h, not both")
        levels = [parse_mesh_size(args.h)]

    if not nu:
        raise ConfigError("viscosity grid is empty")
    if any(not v > 0 for v in nu):
        raise ConfigError("viscosity must be positive")
    _check_penalties(command, methods, rho, rho_m, nu)

    sweeping_penalty = command == "sweep" and len(nu) == 1
    if command != "sweep":
        if len(methods) > 1:
            raise ConfigError(f"{command} runs a single method")
        if len(nu) > 1:
            raise ConfigError(f"{command} takes a single viscosity")
        if len(rho) > 1:
            raise ConfigError(f"{command} takes a single penalty parameter")
    if command in ("convergence", "export-vtk") and Method.EG in methods and not rho:
        raise ConfigError("EG requires --rho")
    if sweeping_penalty:
        if Method.PR_MEG in methods:
            raise ConfigError("the pressure-robust method has no penalty parameter to sweep")
        if Method.EG in methods and not rho:
            raise ConfigError("penalty grid is empty")
        if Method.MEG in methods and not rho_m:
            raise ConfigError("penalty grid is empty")
    elif command == "sweep":
        if Method.EG in methods and len(rho) != 1:
            raise ConfigError("a viscosity sweep with EG takes a single --rho")

    if command == "convergence":
        if mesh_path is not None:
            raise ConfigError("a convergence study needs a generated problem, not a mesh file")
        if len(levels) < 2:
            raise ConfigError("a convergence study needs at least two --levels")
    elif mesh_path is None and len(levels) != 1:
        raise ConfigError(f"{command} needs a single mesh size (--h 1/n)")

    if args.perturb and not 0.0 <= args.perturb < 0.5:
        raise ConfigError(f"perturbation amplitude must lie in [0, 0.5), got {args.perturb}")

    run_config = RunConfig(
        command=command, methods=methods, problem=problem, mesh_path=mesh_path, levels=levels,
        nu=nu, rho=rho, rho_m=rho_m, seed=args.seed, perturb=args.perturb or 0.0,
        out=Path(args.out), emit=parse_emit(args.emit, command), condition=args.cond,
    )
    logger.debug("Run config", extra={"command": command, "methods": [m.value for m in methods],
                                      "problem": run_config.problem_name, "levels": levels})
    return run_config
