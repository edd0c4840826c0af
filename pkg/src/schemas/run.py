from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, root_validator, validator

from src.core.config import settings
from src.schemas.finite_volume import LatticeConfig
from src.schemas.model import ModelKind, ModelParams


class CommandType(str, Enum):
    """CLI commands."""

    point = "point"
    sweep = "sweep"
    boundaries = "boundaries"
    grating = "grating"
    fv = "fv"
    curves = "curves"


class OutputFormat(str, Enum):
    """Serialization formats of emitted artifacts."""

    csv = "csv"
    json = "json"


MODEL_FIELDS = ("beta", "lam", "omega", "g", "mass", "q", "model")

# Commands that need a single chemical potential
SINGLE_MU_COMMANDS = (CommandType.point, CommandType.grating, CommandType.fv)


def _float_list(v: Any) -> Any:
    if isinstance(v, str):
        return [float(item) for item in v.replace(";", ",").split(",") if item.strip()]
    if isinstance(v, (int, float)):
        return [float(v)]
    return v


class RunConfig(BaseModel):
    command: CommandType

    # Model parameters
    model: ModelKind = ModelKind.raman
    beta: float = 1.0
    lam: float = Field(1.0, alias="lambda")
    omega: float = 1.0
    g: float = 1.0
    mass: float = 1.0
    q: float = 1.0

    # Chemical potential selection
    mu: Optional[float] = None
    mu_from: Optional[float] = None
    mu_to: Optional[float] = None
    steps: int = settings.MU_GRID_POINTS

    # Grating and density curves
    n_samples: int = Field(64, ge=2)
    phase: float = 0.0
    delta_max: float = Field(2.0, gt=0)

    # Finite-volume oracle
    L: List[float] = Field(default_factory=lambda: [10.0, 20.0, 40.0])
    h: List[float] = Field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    cutoff: int = Field(24, ge=1)
    damping: float = Field(settings.FV_DAMPING, gt=0, le=1)
    max_iter: int = Field(settings.FV_MAX_ITER, ge=1)
    tol: float = Field(settings.FV_TOL, gt=0)

    output: OutputFormat = OutputFormat.csv
    out: Optional[str] = Field(None, description="Output path, stdout when empty.")

    @validator("model", pre=True)
    def parse_model(cls, v: Any) -> ModelKind:
        try:
            return ModelKind.parse(v)
        except ValueError:
            raise ValueError(f"Unknown model {v!r}, expected 1, 2, raman or rayleigh.")

    @validator("L", "h", pre=True)
    def split_lists(cls, v: Any) -> Any:
        return _float_list(v)

    @validator("L", each_item=True)
    def positive_box(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("Box side L must be positive.")
        return v

    @validator("h", each_item=True)
    def non_negative_source(cls, v: float) -> float:
        if v < 0:
            raise ValueError("Source h must be non-negative.")
        return v

    @root_validator(skip_on_failure=True)
    def check_command_inputs(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        # Same invariants as the solver parameters
        ModelParams(**{k: values[k] for k in MODEL_FIELDS})

        command = values["command"]
        if command in SINGLE_MU_COMMANDS and values.get("mu") is None:
            raise ValueError(f"Command {command.value} requires --mu.")
        if command == CommandType.sweep:
            mu_from, mu_to = values.get("mu_from"), values.get("mu_to")
            if mu_from is None or mu_to is None:
                raise ValueError("sweep requires --mu-from and --mu-to.")
            if not mu_from < mu_to:
                raise ValueError("sweep requires mu_from < mu_to.")
        if command in (CommandType.sweep, CommandType.curves) and values["steps"] < 2:
            raise ValueError("steps must be at least 2.")
        return values

    @property
    def params(self) -> ModelParams:
        return ModelParams(**{k: getattr(self, k) for k in MODEL_FIELDS})

    @property
    def lattice(self) -> LatticeConfig:
        return LatticeConfig(
            L=self.L[0],
            cutoff=self.cutoff,
            h=self.h[0],
            damping=self.damping,
            max_iter=self.max_iter,
            tol=self.tol,
        )

    def mu_grid(self) -> List[float]:
        return np.linspace(self.mu_from, self.mu_to, self.steps).tolist()

    class Config:
        allow_population_by_field_name = True
        extra = "forbid"
