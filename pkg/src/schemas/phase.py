from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field


class BranchKind(str, Enum):
    """Self-consistent solution families of the density equations."""

    s1 = "S1"
    s2 = "S2"
    s3_lower = "S3lower"
    s3_upper = "S3upper"


S3_KINDS = (BranchKind.s3_lower, BranchKind.s3_upper)


class Subcase(str, Enum):
    """Whether the S3 window opens above or below mu_c."""

    easy = "Easy"
    subtle = "Subtle"


class Mu1Side(str, Enum):
    """Position of the first-order transition relative to mu_c."""

    above_mu_c = "AboveMuC"
    below_mu_c = "BelowMuC"


class Branch(BaseModel):
    kind: BranchKind
    delta: float = Field(..., ge=0, description="Limiting value of lambda*rho - mu.")
    mu: float
    pressure: float
    rho_total: float = Field(..., ge=0, description="(delta + mu) / lambda.")

    class Config:
        frozen = True


class CriticalPoints(BaseModel):
    mu_c: float = Field(..., description="w * lambda * rho_c.")
    delta0: float = Field(..., gt=0, description="Minimum of the S3 density map.")
    mu0: float
    alpha: float
    mu1: float = Field(..., description="First-order transition into S3.")
    mu1_residual: float = Field(
        ..., description="|p3 - max(p1, p2)| at mu1, the bisection residual."
    )
    subcase: Subcase
    mu1_side: Mu1Side

    class Config:
        frozen = True


class PhasePoint(BaseModel):
    """One equilibrium point with every observable the solver reports."""

    mu: float
    branch: BranchKind
    delta: float
    rho: float = Field(..., description="Total particle density.")
    pressure: float
    entropy: float
    energy: float
    n0: float = Field(..., description="Rest condensate density.")
    nq: float = Field(..., description="Recoil condensate density.")
    nb: float = Field(..., description="Photon condensate density.")
    corr_qb: float
    corr_0b: float
    corr_0q: float
    E_plus: float
    E_minus: float
    theta: float = Field(0.0, description="Mixing angle of the quasi-particles.")
    eta_mag: float = Field(0.0, description="sqrt(n0).")

    class Config:
        frozen = True


# Fixed record layout of point and sweep output
PHASE_POINT_COLUMNS = [
    "mu",
    "branch",
    "delta",
    "rho",
    "pressure",
    "entropy",
    "energy",
    "n0",
    "nq",
    "nb",
    "corr_qb",
    "corr_0b",
    "corr_0q",
    "E_plus",
    "E_minus",
]


class GratingProfile(BaseModel):
    period: float = Field(..., description="gamma = 2 pi / q.")
    samples: List[Tuple[float, float]] = Field(
        ..., description="(x, density) pairs over one period, endpoint excluded."
    )
    mean_density: float
    amplitude: float = Field(..., ge=0, description="2 |C| with |C| = corr_0q.")
    phase: float = Field(0.0, description="Phase of the interference term.")


class PhotonProfile(BaseModel):
    period: float
    samples: List[Tuple[float, float]] = Field(
        ..., description="(x, field quadrature) pairs over one period."
    )
    photon_density: float
    phase: float = 0.0


class DensityCurves(BaseModel):
    """The two zero-source density maps on a delta grid."""

    delta: List[float]
    normal: List[float] = Field(..., description="w lambda rho0(delta) - delta.")
    superradiant: List[float] = Field(
        ..., description="w lambda rho0(delta) + kappa delta + alpha."
    )


class SourceCase(str, Enum):
    """Large-volume behaviour of the lower quasi-particle energy."""

    case_a = "A"
    case_b = "B"


class SourceLimit(BaseModel):
    """Thermodynamic-limit solution at fixed source h > 0."""

    case: SourceCase
    mu: float
    h: float
    delta: float
    eta_sq: float
    tau: float = Field(..., description="Recoil-mode density.")
    photon_density: Optional[float] = None
    rho: float
