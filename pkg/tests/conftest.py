# Third party imports
import pytest

# Local application imports
from src.core.branch_solver import critical_points
from src.schemas.model import ModelKind, ModelParams


@pytest.fixture
def params():
    return ModelParams()


@pytest.fixture
def rayleigh_params():
    return ModelParams(model=ModelKind.rayleigh)


@pytest.fixture
def subtle_params():
    # Small recoil energy, the S3 minimum sits below mu_c
    return ModelParams(q=0.03)


@pytest.fixture
def ctx(params):
    return params.thermo


@pytest.fixture
def critical(params):
    return critical_points(params)
