import pytest

from stokeseg.cli.errors import ConfigError
from stokeseg.cli.main import build_parser
from stokeseg.cli.run_config import build_run_config, parse_emit, parse_grid, parse_levels, parse_mesh_size
from stokeseg.constants import Method, Problem
from stokeseg.mesh.generators import generate_unit_square
from stokeseg.mesh.mesh_io import save_mesh


def run_config(*argv):
    return build_run_config(build_parser().parse_args(list(argv)))


@pytest.mark.parametrize("text, expected", [
    ("1,10,100", [1.0, 10.0, 100.0]),
    ("0.5:2:0.5", [0.5, 1.0, 1.5, 2.0]),
    ("0.1:0.3:0.1", [0.1, 0.2, 0.3]),
    ("5", [5.0]),
    (None, []),
])
def test_parse_grid(text, expected):
    assert parse_grid(text, "penalty") == expected


@pytest.mark.parametrize("text", ["1:0:1", "0:1:0", "a,b", "1:2"])
def test_parse_grid_errors(text):
    with pytest.raises(ConfigError):
        parse_grid(text, "penalty")


def test_mesh_sizes():
    assert parse_mesh_size("1/16") == 16
    assert parse_mesh_size("8") == 8
    assert parse_levels("1/4, 1/8,16") == [4, 8, 16]
    for text in ("2/8", "0", "1/x", "-3"):
        with pytest.raises(ConfigError):
            parse_mesh_size(text)


def test_emit():
    assert parse_emit(None, "export-vtk") == {"vtk"}
    assert parse_emit("csv, svg", "convergence") == {"csv", "svg"}
    with pytest.raises(ConfigError):
        parse_emit("csv,png", "convergence")


@pytest.mark.parametrize("command, emit, target", [
    ("export-vtk", "vtk,csv", "csv"),
    ("export-vtk", "svg", "svg"),
    ("convergence", "csv,vtk", "vtk"),
    ("quality", "svg", "svg"),
])
def test_emit_targets_a_command_cannot_produce(command, emit, target):
    with pytest.raises(ConfigError) as ex:
        parse_emit(emit, command)
    assert ex.value.message == f"{command} does not produce {target}"


def test_convergence_config():
    config = run_config("convergence", "--method", "eg", "--rho", "10", "--levels", "4,8,16", "--nu", "0.01",
                        "--cond", "--out", "results/eg")
    assert config.method is Method.EG
    assert config.problem is Problem.VORTEX2D
    assert config.levels == [4, 8, 16]
    assert config.nu == [0.01]
    assert config.single_rho == 10.0
    assert config.condition
    assert config.exact().nu == 0.01
    assert config.emit == {"csv"}


def test_sweep_config():
    config = run_config("sweep", "--method", "eg,meg", "--h", "1/8", "--rho", "1:3:1", "--rho-m", "0.1,1")
    assert config.methods == [Method.EG, Method.MEG]
    assert config.rho == [1.0, 2.0, 3.0]
    assert config.rho_m == [0.1, 1.0]
    assert config.levels == [8]


@pytest.mark.parametrize("argv, message", [
    (["convergence", "--method", "meg", "--rho", "1", "--levels", "4,8"], "mEG accepts no penalty parameter"),
    (["convergence", "--method", "eg", "--levels", "4,8"], "EG requires --rho"),
    (["convergence", "--levels", "8"], "at least two"),
    (["convergence", "--levels", "4,8", "--h", "1/8"], "either --levels or --h"),
    (["convergence", "--method", "stokes", "--levels", "4,8"], "unknown method"),
    (["convergence", "--problem", "torus", "--levels", "4,8"], "unknown problem"),
    (["convergence", "--nu", "0", "--levels", "4,8"], "viscosity must be positive"),
    (["export-vtk"], "single mesh size"),
    (["export-vtk", "--h", "1/4", "--method", "meg,eg", "--rho", "1"], "single method"),
    (["quality", "--h", "1/4", "--perturb", "0.7"], "perturbation amplitude"),
    (["sweep", "--method", "pr-meg", "--h", "1/8"], "no penalty parameter to sweep"),
    (["sweep", "--method", "meg", "--h", "1/8"], "penalty grid is empty"),
    (["sweep", "--method", "meg", "--h", "1/8", "--rho-m", "1,-1"], "must be positive"),
    (["sweep", "--method", "eg", "--h", "1/8", "--nu", "1,0.1", "--rho", "1,2"], "single --rho"),
    (["sweep", "--method", "eg", "--h", "1/8", "--rho", "1", "--rho-m", "1"], "meg method only"),
    (["convergence", "--problem", "file:/nonexistent/mesh.smesh", "--levels", "4,8"], "does not exist"),
])
def test_invalid_configurations(argv, message):
    with pytest.raises(ConfigError) as ex:
        run_config(*argv)
    assert message in ex.value.message


def test_file_problem(tmp_path):
    path = tmp_path / "square.smesh"
    save_mesh(generate_unit_square(2), path)
    config = run_config("quality", "--problem", f"file:{path}")
    assert config.problem is None
    assert config.mesh().n_cells == 8
    assert config.exact(dim=2).name == "vortex2d"
    assert config.exact(dim=3).name == "cube3d"
    with pytest.raises(ConfigError):
        run_config("convergence", "--problem", f"file:{path}", "--levels", "4,8")


def test_generator_errors_become_config_errors():
    config = run_config("quality", "--problem", "hole", "--h", "1/2")
    with pytest.raises(ConfigError):
        config.mesh(2)


def test_perturbed_meshes_are_reproducible():
    config = run_config("quality", "--h", "1/4", "--perturb", "0.2", "--seed", "3")
    assert (config.mesh(4).vertices == config.mesh(4).vertices).all()
    assert not (config.mesh(4).vertices == generate_unit_square(4).vertices).all()
