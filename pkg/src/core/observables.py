"""Expectation values at a solved phase point.

Order parameters are taken real and non-negative; the grating and photon
profiles take the undetermined condensate phase as an explicit argument.
"""

import math
from typing import Optional, Tuple

import numpy as np

from src.core import bose_thermo
from src.core.branch_solver import select_phase
from src.schemas.error import DomainError
from src.schemas.model import ModelKind, ModelParams
from src.schemas.phase import (
    S3_KINDS,
    Branch,
    BranchKind,
    GratingProfile,
    PhasePoint,
    PhotonProfile,
)

# Relative slack on the constraint g^2 eta^2 <= 4 omega (delta + eps_q)
CONSTRAINT_RTOL = 1e-12


def spectrum(delta: float, eta_mag: float, params: ModelParams) -> Tuple[float, float, float]:
    """Quasi-particle energies ``(E_plus, E_minus, theta)`` of the q-mode pair.

    E_minus is computed as det / E_plus so that it vanishes exactly on the
    constraint surface instead of through cancellation.
    """

    if delta < 0.0 or eta_mag < 0.0:
        raise DomainError(f"spectrum needs delta >= 0 and eta >= 0, got {delta}, {eta_mag}.")
    atom = delta + params.eps_q
    coupling = params.g * eta_mag
    det = params.omega * atom - coupling**2 / 4.0
    scale = params.omega * atom + coupling**2 / 4.0
    if det < -CONSTRAINT_RTOL * scale:
        raise DomainError(
            f"eta^2={eta_mag**2!r} violates eta^2 <= 4 omega (delta + eps_q) / g^2="
            f"{4.0 * params.omega * atom / params.g**2!r}."
        )
    if abs(det) <= CONSTRAINT_RTOL * scale:
        det = 0.0

    e_plus = 0.5 * (params.omega + atom) + 0.5 * math.hypot(
        params.omega - atom, coupling
    )
    e_minus = det / e_plus if e_plus > 0.0 else 0.0
    theta = 0.5 * math.atan2(coupling, atom - params.omega)
    return e_plus, e_minus, theta


def condensates(branch: Branch, params: ModelParams) -> Tuple[float, float, float]:
    """Rest, recoil and photon condensate densities ``(n0, nq, nb)``."""
    if branch.kind == BranchKind.s1:
        return 0.0, 0.0, 0.0
    if branch.kind == BranchKind.s2:
        rho_c = bose_thermo.rho_c(params.thermo)
        return max(0.0, branch.mu / params.lam - params.w * rho_c), 0.0, 0.0

    delta, atom = branch.delta, branch.delta + params.eps_q
    g_sq = params.g**2
    n0 = 4.0 * params.omega * atom / g_sq
    nq = 4.0 * delta * params.omega / g_sq
    nb = 4.0 * delta * atom / g_sq
    return n0, nq, nb


def correlations(branch: Branch, params: ModelParams) -> Tuple[float, float, float]:
    """Off-diagonal densities ``(corr_qb, corr_0b, corr_0q)``, zero outside S3."""
    if branch.kind not in S3_KINDS:
        return 0.0, 0.0, 0.0
    delta, atom = branch.delta, branch.delta + params.eps_q
    g_sq, omega = params.g**2, params.omega
    corr_qb = 4.0 * delta * math.sqrt(omega * atom) / g_sq
    corr_0b = 4.0 * omega * atom * math.sqrt(delta) / g_sq
    corr_0q = 4.0 * omega * math.sqrt(atom * delta) / g_sq
    return corr_qb, corr_0b, corr_0q


def thermo(branch: Branch, mu: float, params: ModelParams) -> Tuple[float, float, float]:
    """Energy, entropy and pressure densities ``(u, s, p)`` of a branch."""
    ctx = params.thermo
    delta = branch.delta
    w = params.w
    entropy = w * bose_thermo.s0(delta, ctx)
    energy = w * bose_thermo.eps0(delta, ctx) - (delta + mu) ** 2 / (2.0 * params.lam)
    if branch.kind in S3_KINDS:
        energy += 4.0 * params.omega * (delta + params.eps_q) * delta / params.g**2
    return energy, entropy, branch.pressure


def phase_point(
    mu: float, params: ModelParams, branch: Optional[Branch] = None
) -> PhasePoint:
    """Every observable at mu on the selected (or given) branch."""
    branch = branch or select_phase(mu, params)
    n0, nq, nb = condensates(branch, params)
    corr_qb, corr_0b, corr_0q = correlations(branch, params)
    energy, entropy, pressure = thermo(branch, mu, params)
    eta_mag = math.sqrt(n0)
    e_plus, e_minus, theta = spectrum(branch.delta, eta_mag, params)
    return PhasePoint(
        mu=mu,
        branch=branch.kind,
        delta=branch.delta,
        rho=branch.rho_total,
        pressure=pressure,
        entropy=entropy,
        energy=energy,
        n0=n0,
        nq=nq,
        nb=nb,
        corr_qb=corr_qb,
        corr_0b=corr_0b,
        corr_0q=corr_0q,
        E_plus=e_plus,
        E_minus=e_minus,
        theta=theta,
        eta_mag=eta_mag,
    )


def _one_period(
    params: ModelParams, n_samples: int, phase: float
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Sample positions over one period and the fringe angle q x + phase at each.

    The grid is uniform from the first maximum, with the sample nearest the
    half period moved onto the minimum. Positions are folded into [0, period).
    """
    if n_samples < 2:
        raise DomainError(f"n_samples must be at least 2, got {n_samples}.")
    if params.q <= 0.0:
        raise DomainError("q = 0 has no spatial period.")
    period = 2.0 * math.pi / params.q
    fraction = np.arange(n_samples) / n_samples
    fraction[n_samples // 2] = 0.5
    start = math.fmod(-phase / params.q, period)
    x = np.mod(start + period * fraction, period)
    order = np.argsort(x, kind="stable")
    return period, x[order], 2.0 * math.pi * fraction[order]


def grating_profile(
    point: PhasePoint, params: ModelParams, n_samples: int, phase: float = 0.0
) -> GratingProfile:
    """Matter-wave grating rho(x) = rho + 2 |C| cos(q x + phase) over one period.

    Only Rayleigh scattering in S3 interferes; with Raman the recoiled atoms
    sit in another internal state and the density stays flat. The mean is the
    exact period average, which is rho.
    """

    period, x, angle = _one_period(params, n_samples, phase)
    interferes = params.model == ModelKind.rayleigh and point.branch in S3_KINDS
    amplitude = 2.0 * point.corr_0q if interferes else 0.0
    density = point.rho + amplitude * np.cos(angle)
    return GratingProfile(
        period=period,
        samples=list(zip(x.tolist(), density.tolist())),
        mean_density=point.rho,
        amplitude=amplitude,
        phase=phase,
    )


def photon_profile(
    point: PhasePoint, params: ModelParams, n_samples: int, phase: float = 0.0
) -> PhotonProfile:
    """Real quadrature of the condensed photon field sqrt(nb) cos(q x + phase)."""
    period, x, angle = _one_period(params, n_samples, phase)
    field = math.sqrt(point.nb) * np.cos(angle)
    return PhotonProfile(
        period=period,
        samples=list(zip(x.tolist(), field.tolist())),
        photon_density=point.nb,
        phase=phase,
    )
