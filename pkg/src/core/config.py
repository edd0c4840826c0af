from typing import Optional

from pydantic import BaseSettings, validator


class Settings(BaseSettings):
    PROJECT_NAME: str = "BEC Superradiance Solver"
    CONFIG: Optional[str] = None  # Run-config file used when --config is absent
    LOG_LEVEL: str = "WARNING"
    MAX_WORKERS: int = 4  # Threads used for sweeps

    # Root finding
    BISECTION_MAX_ITER: int = 65
    DELTA_TOL: float = 1e-13  # Bracket width on sqrt(delta)
    RESIDUAL_TOL: float = 1e-10
    PRESSURE_TIE_TOL: float = 1e-12
    MU1_MAX_DOUBLINGS: int = 60

    # Bose functions
    POLYLOG_SWITCH_FUGACITY: float = 0.5
    POLYLOG_TAIL_TOL: float = 1e-16
    POLYLOG_LOG_TERMS: int = 40
    QUADRATURE_TAIL_TOL: float = 1e-12

    # Finite-volume oracle
    FV_DAMPING: float = 0.3
    FV_MAX_ITER: int = 2000
    FV_TOL: float = 1e-10
    FV_MAX_CUTOFF: int = 256

    # Output
    MU_GRID_POINTS: int = 500
    FLOAT_DIGITS: int = 17

    @validator("LOG_LEVEL", pre=True)
    def upper_log_level(cls, v: str) -> str:
        return str(v).upper()

    @validator("POLYLOG_SWITCH_FUGACITY")
    def switch_inside_unit_interval(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("POLYLOG_SWITCH_FUGACITY must lie in (0, 1).")
        return v

    class Config:
        case_sensitive = True
        env_prefix = "BEC_"


settings = Settings()
