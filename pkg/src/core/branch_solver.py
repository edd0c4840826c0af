"""Thermodynamic-limit density equations and phase selection.

Model 2 is Model 1 with the mode multiplicity ``w = params.w`` set to 1, so
every function below is written once for both models.
"""

import math
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from src.core import bose_thermo
from src.core.config import settings
from src.core.job import map_ordered, solver_logger
from src.schemas.error import BranchNotAdmissibleError, NumericalError
from src.schemas.model import ModelParams
from src.schemas.phase import (
    Branch,
    BranchKind,
    CriticalPoints,
    DensityCurves,
    Mu1Side,
    SourceCase,
    SourceLimit,
    Subcase,
)

S3Pair = Tuple[Optional[Branch], Optional[Branch]]


def _bisect(func: Callable[[float], float], lo: float, hi: float, xtol: float) -> float:
    root, _ = optimize.bisect(
        func,
        lo,
        hi,
        xtol=xtol,
        maxiter=settings.BISECTION_MAX_ITER,
        full_output=True,
        disp=False,
    )
    return root


def _bisect_delta(func: Callable[[float], float], lo: float, hi: float) -> float:
    """Bisection for a root in delta carried out on t = sqrt(delta).

    The density maps behave like sqrt(delta) at the origin and are Lipschitz
    in t, which keeps the residual small even for roots close to zero.
    """

    def in_t(t: float) -> float:
        return func(t * t)

    t = _bisect(in_t, math.sqrt(lo), math.sqrt(hi), settings.DELTA_TOL)
    return t * t


def _check_residual(name: str, residual: float, mu: float) -> None:
    if abs(residual) > settings.RESIDUAL_TOL * max(1.0, abs(mu)):
        solver_logger.warning(f"{name}: residual {residual:.3e} above tolerance.")


# Density maps and pressures


def mu_c(params: ModelParams) -> float:
    return params.w * params.lam * bose_thermo.rho_c(params.thermo)


def normal_density_map(delta: float, params: ModelParams) -> float:
    """Right-hand side of the S1 density equation, w lambda rho0(delta) - delta."""
    return params.w * params.lam * bose_thermo.rho0(delta, params.thermo) - delta


def superradiant_density_map(delta: float, params: ModelParams) -> float:
    """Right-hand side of the S3 density equation, w lambda rho0(delta) + kappa delta + alpha."""
    return (
        params.w * params.lam * bose_thermo.rho0(delta, params.thermo)
        + params.kappa * delta
        + params.alpha
    )


def pressure_s1(delta: float, mu: float, params: ModelParams) -> float:
    return params.w * bose_thermo.p0(delta, params.thermo) + (delta + mu) ** 2 / (
        2.0 * params.lam
    )


def pressure_s2(mu: float, params: ModelParams) -> float:
    return pressure_s1(0.0, mu, params)


def pressure_s3(delta: float, mu: float, params: ModelParams) -> float:
    quadratic = (
        (delta + mu) ** 2
        - (params.kappa + 1.0) * delta**2
        - 2.0 * params.alpha * delta
    )
    return params.w * bose_thermo.p0(delta, params.thermo) + quadratic / (
        2.0 * params.lam
    )


def _branch(
    kind: BranchKind, delta: float, mu: float, pressure: float, params: ModelParams
) -> Branch:
    return Branch(
        kind=kind,
        delta=delta,
        mu=mu,
        pressure=pressure,
        rho_total=max(0.0, (delta + mu) / params.lam),
    )


# Branch solvers


def solve_s1(mu: float, params: ModelParams) -> Branch:
    """Normal phase: the unique root of mu = w lambda rho0(delta) - delta."""
    critical = mu_c(params)
    if mu > critical:
        raise BranchNotAdmissibleError(
            f"S1 requires mu <= mu_c={critical!r}, got mu={mu!r}."
        )

    def residual(delta: float) -> float:
        return normal_density_map(delta, params) - mu

    delta = _bisect_delta(residual, 0.0, critical - mu + 1.0)
    _check_residual("solve_s1", residual(delta), mu)
    return _branch(BranchKind.s1, delta, mu, pressure_s1(delta, mu, params), params)


def solve_s2(mu: float, params: ModelParams) -> Branch:
    """Rest condensate only: delta = 0 on mu_c <= mu <= mu_c + alpha."""
    critical = mu_c(params)
    if not critical <= mu <= critical + params.alpha:
        raise BranchNotAdmissibleError(
            f"S2 requires {critical!r} <= mu <= {critical + params.alpha!r}, got mu={mu!r}."
        )
    return _branch(BranchKind.s2, 0.0, mu, pressure_s2(mu, params), params)


@lru_cache(maxsize=256)
def _delta0_mu0(params: ModelParams) -> Tuple[float, float]:
    """Minimum of the S3 density map: w lambda drho0(delta0) = kappa."""
    slope = params.w * params.lam

    def residual(log_delta: float) -> float:
        return slope * bose_thermo.drho0(math.exp(log_delta), params.thermo) - params.kappa

    lo = hi = 0.0
    for _ in range(settings.MU1_MAX_DOUBLINGS * 4):
        if residual(lo) > 0.0:
            break
        lo -= 5.0
    else:
        raise NumericalError("Could not bracket delta0 from below.")
    for _ in range(settings.MU1_MAX_DOUBLINGS * 4):
        if residual(hi) < 0.0:
            break
        hi += 5.0
    else:
        raise NumericalError("Could not bracket delta0 from above.")

    delta0 = math.exp(_bisect(residual, lo, hi, 1e-15))
    mu0 = slope * bose_thermo.rho0(delta0, params.thermo) + params.kappa * delta0
    solver_logger.debug(f"delta0={delta0!r}, mu0={mu0!r}")
    return delta0, mu0


def solve_s3(mu: float, params: ModelParams) -> S3Pair:
    """Both roots of mu = w lambda rho0(delta) + kappa delta + alpha.

    Returns ``(lower, upper)`` with ``None`` for a root that does not exist.
    """

    delta0, mu0 = _delta0_mu0(params)
    if mu < mu0 + params.alpha:
        return None, None

    def residual(delta: float) -> float:
        return superradiant_density_map(delta, params) - mu

    if residual(delta0) >= 0.0:
        # Double root at the minimum
        lower_delta = upper_delta = delta0
    else:
        hi = max(delta0, (mu - params.alpha) / params.kappa) + 1.0
        upper_delta = _bisect_delta(residual, delta0, hi)
        lower_delta = (
            _bisect_delta(residual, 0.0, delta0) if residual(0.0) >= 0.0 else None
        )

    upper = _branch(
        BranchKind.s3_upper,
        upper_delta,
        mu,
        pressure_s3(upper_delta, mu, params),
        params,
    )
    _check_residual("solve_s3", residual(upper_delta), mu)
    lower = None
    if lower_delta is not None:
        lower = _branch(
            BranchKind.s3_lower,
            lower_delta,
            mu,
            pressure_s3(lower_delta, mu, params),
            params,
        )
    return lower, upper


def pressure_branches(mu: float, params: ModelParams) -> List[Branch]:
    """Every branch admissible at mu, the S3 lower root included."""
    critical = mu_c(params)
    branches = []
    if mu <= critical:
        branches.append(solve_s1(mu, params))
    if critical <= mu <= critical + params.alpha:
        branches.append(solve_s2(mu, params))
    lower, upper = solve_s3(mu, params)
    branches.extend(b for b in (lower, upper) if b is not None)
    return branches


def select_phase(mu: float, params: ModelParams) -> Branch:
    """Branch of maximal pressure among S1, S2 and S3upper; ties go to S3upper."""
    candidates = [
        b for b in pressure_branches(mu, params) if b.kind != BranchKind.s3_lower
    ]
    if not candidates:
        raise NumericalError(f"No admissible branch at mu={mu!r}.")
    best = max(candidates, key=lambda b: b.pressure)
    for branch in candidates:
        if branch.kind == BranchKind.s3_upper:
            tie = settings.PRESSURE_TIE_TOL * max(1.0, abs(best.pressure))
            if branch.pressure >= best.pressure - tie:
                return branch
    return best


# Critical points


def _envelope_pressure(mu: float, params: ModelParams) -> float:
    """max(p1, p2), with S2 continued past mu_c + alpha."""
    if mu <= mu_c(params):
        return solve_s1(mu, params).pressure
    return pressure_s2(mu, params)


def _pressure_gap(mu: float, params: ModelParams) -> float:
    _, upper = solve_s3(mu, params)
    return upper.pressure - _envelope_pressure(mu, params)


def _locate_mu1(params: ModelParams) -> Tuple[float, float]:
    _, mu0 = _delta0_mu0(params)
    lo = mu0 + params.alpha
    gap_lo = _pressure_gap(lo, params)
    if gap_lo >= 0.0:
        solver_logger.warning(
            f"S3 already dominates at mu0 + alpha (gap {gap_lo:.3e}), taking mu1 there."
        )
        return lo, abs(gap_lo)

    step = max(1.0, abs(lo))
    hi = lo + step
    for _ in range(settings.MU1_MAX_DOUBLINGS):
        if _pressure_gap(hi, params) > 0.0:
            break
        lo = hi
        step *= 2.0
        hi = lo + step
    else:
        raise NumericalError(
            f"Could not bracket mu1 after {settings.MU1_MAX_DOUBLINGS} doublings."
        )

    mu1 = _bisect(lambda mu: _pressure_gap(mu, params), lo, hi, 1e-14)
    residual = abs(_pressure_gap(mu1, params))
    solver_logger.debug(f"mu1={mu1!r}, residual={residual:.3e}")
    return mu1, residual


def locate_mu1(params: ModelParams) -> float:
    """First mu where the S3upper pressure reaches the max(p1, p2) envelope."""
    return _locate_mu1(params)[0]


@lru_cache(maxsize=256)
def critical_points(params: ModelParams) -> CriticalPoints:
    if params.is_degenerate:
        solver_logger.warning(
            "q = 0: alpha vanishes and the S2 window collapses to mu_c."
        )
    delta0, mu0 = _delta0_mu0(params)
    critical = mu_c(params)
    mu1, residual = _locate_mu1(params)
    return CriticalPoints(
        mu_c=critical,
        delta0=delta0,
        mu0=mu0,
        alpha=params.alpha,
        mu1=mu1,
        mu1_residual=residual,
        subcase=Subcase.easy if mu0 + params.alpha >= critical else Subcase.subtle,
        mu1_side=Mu1Side.above_mu_c if mu1 >= critical else Mu1Side.below_mu_c,
    )


# Sweeps, curves and fixed-source limits


def density_curves(params: ModelParams, deltas: Sequence[float]) -> DensityCurves:
    """Both zero-source density maps sampled on a delta grid."""
    deltas = np.asarray(deltas, dtype=float)
    normal = [normal_density_map(d, params) for d in deltas]
    superradiant = [superradiant_density_map(d, params) for d in deltas]
    return DensityCurves(
        delta=deltas.tolist(), normal=normal, superradiant=superradiant
    )


def phase_sweep(params: ModelParams, mus: Sequence[float]) -> List[Branch]:
    return map_ordered(lambda mu: select_phase(mu, params), mus)


def _first_positive(func: Callable[[float], float], start: float, factor: float) -> float:
    """First x = start * factor**k with func(x) > 0."""
    x = start
    for _ in range(settings.MU1_MAX_DOUBLINGS * 4):
        if func(x) > 0.0:
            return x
        x *= factor
    raise NumericalError("Bracket growth failed for the fixed-source equation.")


def _source_case_a(mu: float, h: float, params: ModelParams) -> SourceLimit:
    coupling = params.lam * params.g**2 * h**2 / 4.0

    def residual(delta: float) -> float:
        return normal_density_map(delta, params) + coupling / delta**2 - mu

    lo = _first_positive(residual, 1.0, 0.5)
    hi = _first_positive(lambda d: -residual(d), 1.0, 2.0)
    log_delta = _bisect(
        lambda u: residual(math.exp(u)), math.log(lo), math.log(hi), 1e-15
    )
    delta = math.exp(log_delta)
    eta_sq = (params.g * h / (2.0 * delta)) ** 2
    return SourceLimit(
        case=SourceCase.case_a,
        mu=mu,
        h=h,
        delta=delta,
        eta_sq=eta_sq,
        tau=0.0,
        photon_density=0.0,
        rho=params.w * bose_thermo.rho0(delta, params.thermo) + eta_sq,
    )


def _source_case_b(mu: float, h: float, params: ModelParams) -> Optional[SourceLimit]:
    four_omega = 4.0 * params.omega / params.g**2

    def eta(delta: float) -> float:
        return math.sqrt(four_omega * (delta + params.eps_q))

    def source_shift(delta: float) -> float:
        return 2.0 * h * params.omega / (params.g * eta(delta))

    def tau(delta: float) -> float:
        return four_omega * delta - source_shift(delta)

    def residual(delta: float) -> float:
        return (
            superradiant_density_map(delta, params)
            - params.lam * source_shift(delta)
            - mu
        )

    delta0, _ = _delta0_mu0(params)
    lo = delta0
    if tau(lo) < 0.0:
        # recoil density must stay non-negative
        lo = _bisect_delta(tau, lo, _first_positive(tau, max(lo, 1.0), 2.0))
    if residual(lo) > 0.0:
        return None
    hi = _first_positive(residual, max(lo, 1.0) * 2.0, 2.0)
    delta = _bisect_delta(residual, lo, hi)
    eta_sq = eta(delta) ** 2
    return SourceLimit(
        case=SourceCase.case_b,
        mu=mu,
        h=h,
        delta=delta,
        eta_sq=eta_sq,
        tau=tau(delta),
        photon_density=params.g**2 * eta_sq * tau(delta) / (4.0 * params.omega**2),
        rho=params.w * bose_thermo.rho0(delta, params.thermo) + eta_sq + tau(delta),
    )


def solve_with_source(
    mu: float, h: float, params: ModelParams, case: Optional[SourceCase] = None
) -> SourceLimit:
    """Large-volume solution at fixed source h > 0, before h is sent to zero.

    Case A keeps the lower quasi-particle energy gapped, Case B closes it.
    Without an explicit case the one matching the selected phase is used,
    falling back to Case A when no Case B root exists.
    """

    if h <= 0.0:
        raise BranchNotAdmissibleError("solve_with_source needs a source h > 0.")
    if case is None:
        kind = select_phase(mu, params).kind
        case = SourceCase.case_b if kind == BranchKind.s3_upper else SourceCase.case_a
    if case == SourceCase.case_b:
        limit = _source_case_b(mu, h, params)
        if limit is not None:
            return limit
        solver_logger.debug(f"No Case B root at mu={mu!r}, h={h!r}.")
    return _source_case_a(mu, h, params)
