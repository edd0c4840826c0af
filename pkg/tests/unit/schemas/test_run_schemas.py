import pytest
from pydantic import ValidationError

from src.schemas.model import ModelKind
from src.schemas.run import CommandType, OutputFormat, RunConfig


def test_point_config():
    config = RunConfig(command="point", mu=-1.0, model="2")
    assert config.command == CommandType.point
    assert config.params.model == ModelKind.rayleigh
    assert config.output == OutputFormat.csv


@pytest.mark.parametrize("command", ["point", "grating", "fv"])
def test_single_mu_commands_need_mu(command):
    with pytest.raises(ValidationError):
        RunConfig(command=command)


def test_sweep_range():
    config = RunConfig(command="sweep", mu_from=-1.0, mu_to=1.0, steps=5)
    assert config.mu_grid() == pytest.approx([-1.0, -0.5, 0.0, 0.5, 1.0])
    with pytest.raises(ValidationError):
        RunConfig(command="sweep", mu_from=1.0, mu_to=0.0)
    with pytest.raises(ValidationError):
        RunConfig(command="sweep", mu_from=0.0)
    with pytest.raises(ValidationError):
        RunConfig(command="sweep", mu_from=0.0, mu_to=1.0, steps=1)


def test_lists_from_text():
    # Comma separated values as written on the command line or in a config file
    config = RunConfig(command="fv", mu=-1.0, L="10, 20,40", h="1e-2,1e-3")
    assert config.L == [10.0, 20.0, 40.0]
    assert config.h == [1e-2, 1e-3]
    assert config.lattice.L == 10.0
    assert config.lattice.h == 1e-2


def test_invalid_lists():
    with pytest.raises(ValidationError):
        RunConfig(command="fv", mu=-1.0, L="10,-20")
    with pytest.raises(ValidationError):
        RunConfig(command="fv", mu=-1.0, h="-1e-3")


def test_model_params_are_validated():
    with pytest.raises(ValidationError):
        RunConfig(command="boundaries", lam=0.1)
    with pytest.raises(ValidationError):
        RunConfig(command="boundaries", model="raman-ish")


def test_unknown_keys_are_rejected():
    with pytest.raises(ValidationError):
        RunConfig(command="boundaries", temperature=1.0)


def test_lambda_alias():
    assert RunConfig(command="boundaries", **{"lambda": 2.0}).params.lam == 2.0
