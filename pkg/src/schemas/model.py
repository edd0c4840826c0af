import math
from enum import Enum
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field, root_validator, validator


class ModelKind(str, Enum):
    """Scattering model. Raman recoils into a second internal state, Rayleigh into the same one."""

    raman = "raman"
    rayleigh = "rayleigh"

    @classmethod
    def parse(cls, value: Any) -> "ModelKind":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        return MODEL_ALIASES.get(text) or cls(text)


MODEL_ALIASES = {
    "1": ModelKind.raman,
    "2": ModelKind.rayleigh,
    "model1": ModelKind.raman,
    "model2": ModelKind.rayleigh,
}

# Number of atomic kinetic sums entering the free-gas terms
MODE_MULTIPLICITY = {
    ModelKind.raman: 2,
    ModelKind.rayleigh: 1,
}


class ThermoContext(BaseModel):
    """Inverse temperature and mass of the ideal Bose gas, with the thermal density scale."""

    beta: float = Field(1.0, gt=0, description="Inverse temperature.")
    mass: float = Field(1.0, gt=0, description="Particle mass.")
    prefactor: Optional[float] = Field(
        None, description="(m/(2 pi beta))^(3/2), derived on construction."
    )

    @validator("prefactor", pre=True, always=True)
    def compute_prefactor(cls, v: Optional[float], values: Dict[str, Any]) -> float:
        beta, mass = values.get("beta"), values.get("mass")
        if beta is None or mass is None:
            # Field validation already failed, pydantic reports that error
            return v
        return (mass / (2.0 * math.pi * beta)) ** 1.5

    class Config:
        frozen = True


class ModelParams(BaseModel):
    """Physical couplings of one superradiance model."""

    beta: float = Field(1.0, gt=0, description="Inverse temperature.")
    lam: float = Field(
        1.0, gt=0, alias="lambda", description="Stabilizing mean-field coupling."
    )
    omega: float = Field(1.0, gt=0, description="Photon mode frequency.")
    g: float = Field(1.0, gt=0, description="Photon-atom coupling.")
    mass: float = Field(1.0, gt=0, description="Particle mass.")
    q: float = Field(1.0, ge=0, description="Recoil wavenumber magnitude.")
    model: ModelKind = Field(ModelKind.raman, description="Scattering model.")
    dimension: int = Field(3, description="Space dimension, only 3 is supported.")

    @validator("model", pre=True)
    def parse_model(cls, v: Any) -> ModelKind:
        try:
            return ModelKind.parse(v)
        except ValueError:
            raise ValueError(f"Unknown model {v!r}, expected 1, 2, raman or rayleigh.")

    @validator("dimension")
    def only_three_dimensions(cls, v: int) -> int:
        if v != 3:
            raise ValueError(
                "Only dimension 3 is supported, the critical density is infinite below it."
            )
        return v

    @root_validator(skip_on_failure=True)
    def check_stability(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        lam, omega, g = values["lam"], values["omega"], values["g"]
        if lam <= g**2 / (8.0 * omega):
            raise ValueError(
                f"Unstable couplings: lambda={lam} must exceed g^2/(8 omega)={g**2 / (8.0 * omega)}."
            )
        eps_q = values["q"] ** 2 / (2.0 * values["mass"])
        kappa = 8.0 * omega * lam / g**2 - 1.0
        # Both forms of the S2 window edge must agree
        assert math.isclose(
            eps_q * (kappa + 1.0) / 2.0,
            4.0 * omega * lam * eps_q / g**2,
            rel_tol=1e-12,
            abs_tol=1e-300,
        )
        return values

    @property
    def w(self) -> int:
        return MODE_MULTIPLICITY[self.model]

    @property
    def eps_q(self) -> float:
        return self.q**2 / (2.0 * self.mass)

    @property
    def kappa(self) -> float:
        return 8.0 * self.omega * self.lam / self.g**2 - 1.0

    @property
    def alpha(self) -> float:
        return self.eps_q * (self.kappa + 1.0) / 2.0

    @property
    def stability_margin(self) -> float:
        """lambda - g^2/(8 omega), positive for every valid parameter set."""
        return self.lam - self.g**2 / (8.0 * self.omega)

    @property
    def is_degenerate(self) -> bool:
        """True for q = 0, where alpha vanishes and the recoil-free model is recovered."""
        return self.q == 0.0

    @property
    def thermo(self) -> ThermoContext:
        return ThermoContext(beta=self.beta, mass=self.mass)

    def with_model(self, model: ModelKind) -> "ModelParams":
        return self.copy(update={"model": ModelKind.parse(model)})

    class Config:
        frozen = True
        allow_population_by_field_name = True
        use_enum_values = False


DEFAULT_PARAMS = ModelParams()
