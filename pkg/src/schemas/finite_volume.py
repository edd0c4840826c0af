from typing import Dict, List, Optional

from pydantic import BaseModel, Field, validator

from src.core.config import settings
from src.schemas.phase import BranchKind, SourceCase


class LatticeConfig(BaseModel):
    """Periodic box and iteration controls of one finite-volume run."""

    L: float = Field(20.0, gt=0, description="Box side length.")
    cutoff: int = Field(
        24, ge=1, description="Largest lattice index per axis before tail refinement."
    )
    h: float = Field(1e-3, ge=0, description="Gauge-breaking source amplitude.")
    damping: float = Field(settings.FV_DAMPING, gt=0, le=1)
    max_iter: int = Field(settings.FV_MAX_ITER, ge=1)
    tol: float = Field(settings.FV_TOL, gt=0)
    refine_cutoff: bool = Field(
        True, description="Double the cutoff until the dropped tail is below tol."
    )

    @property
    def volume(self) -> float:
        return self.L**3

    class Config:
        frozen = True


class FvState(BaseModel):
    eta: float = Field(0.0, ge=0)
    zeta: float = Field(0.0, ge=0)
    rho: float = Field(0.0, ge=0)
    delta_V: float = Field(..., description="lambda * rho - mu.")
    E_plus: float = 0.0
    E_minus: float = 0.0
    iterations: int = 0
    converged: bool = False
    residual: float = float("nan")
    monotone: bool = Field(
        True, description="Residual non-increasing over the final iterations."
    )
    cutoff: Optional[int] = None
    case: Optional[SourceCase] = Field(
        None, description="Root of the eta equation to follow, read off eta when unset."
    )


class FvRecord(BaseModel):
    """One (L, h) row of a convergence table."""

    L: float
    h: float
    volume: float
    eta_sq: float
    zeta: float
    rho: float
    delta_V: float
    V_E_minus: float
    iterations: int
    converged: bool
    reference_rho: float = Field(..., description="Large-volume value at this h.")
    rho_error: float = Field(..., description="Relative error against the branch rho.")


FV_RECORD_COLUMNS = list(FvRecord.__fields__)


class FvScan(BaseModel):
    mu: float
    branch: BranchKind
    case: SourceCase = Field(..., description="Case read off the V scaling of E_minus.")
    records: List[FvRecord]
    analytic: Dict[str, float] = Field(
        ..., description="Thermodynamic-limit values of the selected branch."
    )
    extrapolated: Dict[str, float] = Field(
        ..., description="Values extrapolated to 1/V -> 0 and then h -> 0."
    )
    V_E_minus_prediction: Optional[float] = Field(
        None, description="Large-volume V * E_minus predicted from the recoil density."
    )

    @validator("records")
    def records_not_empty(cls, v: List[FvRecord]) -> List[FvRecord]:
        if not v:
            raise ValueError("A scan needs at least one record.")
        return v
