"""Ideal Bose gas in three dimensions.

All functions take the gap ``delta = -mu >= 0`` of the free gas and a
:class:`ThermoContext`. Units are hbar = k_B = 1.
"""

import math
from functools import lru_cache
from typing import Tuple

import mpmath
import numpy as np
from numba import njit
from scipy import integrate

from src.core.config import settings
from src.schemas.error import DivergenceError, DomainError
from src.schemas.model import ThermoContext

SUPPORTED_ORDERS = (0.5, 1.5, 2.5)


@njit(cache=True)
def _series(order: float, z: float, tail_tol: float) -> float:
    """Direct sum of z^n / n^order, stopped once the geometric tail bound is below tail_tol."""
    total = 0.0
    power = z
    n = 1
    while True:
        total += power / n**order
        power *= z
        tail = power / ((n + 1) ** order * (1.0 - z))
        if tail < tail_tol or n > 100000:
            break
        n += 1
    return total


@lru_cache(maxsize=None)
def _log_expansion_coefficients(order: float, n_terms: int) -> Tuple[float, np.ndarray]:
    """Gamma(1 - s) and the power-series coefficients zeta(s - k) (-1)^k / k!."""
    gamma = float(mpmath.gamma(1 - mpmath.mpf(order)))
    coefficients = np.array(
        [
            float(mpmath.zeta(mpmath.mpf(order) - k) * (-1) ** k / mpmath.factorial(k))
            for k in range(n_terms)
        ]
    )
    return gamma, coefficients


def _check_order(order: float) -> float:
    order = float(order)
    if order not in SUPPORTED_ORDERS:
        raise DomainError(f"Polylog order {order} not supported, use one of 1/2, 3/2, 5/2.")
    return order


def _polylog_of_log(order: float, x: float) -> float:
    """Li_order(exp(-x)) for x >= 0."""
    if math.isinf(x):
        return 0.0
    if x == 0.0 and order <= 1.0:
        raise DivergenceError(f"Polylog of order {order} diverges at fugacity 1.")
    if x > -math.log(settings.POLYLOG_SWITCH_FUGACITY):
        return float(_series(order, math.exp(-x), settings.POLYLOG_TAIL_TOL))
    gamma, coefficients = _log_expansion_coefficients(order, settings.POLYLOG_LOG_TERMS)
    singular = gamma * x ** (order - 1.0) if x > 0.0 else 0.0
    return singular + float(np.polynomial.polynomial.polyval(x, coefficients))


def polylog(order: float, fugacity: float) -> float:
    """Polylogarithm Li_order(z) for real z in [0, 1] and half-integer order.

    Small fugacities are summed directly; close to z = 1 the expansion in
    ``-ln z`` with zeta-function coefficients is used instead.
    """

    order = _check_order(order)
    z = float(fugacity)
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"Fugacity {fugacity} outside [0, 1].")
    if z == 0.0:
        return 0.0
    return _polylog_of_log(order, -math.log(z))


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if math.isnan(delta) or delta < 0.0:
        raise DomainError(
            f"Gap delta={delta} must be non-negative (the free gas needs mu <= 0)."
        )
    return delta


def rho0(delta: float, ctx: ThermoContext) -> float:
    delta = _check_delta(delta)
    return ctx.prefactor * _polylog_of_log(1.5, ctx.beta * delta)


def p0(delta: float, ctx: ThermoContext) -> float:
    delta = _check_delta(delta)
    return ctx.prefactor * _polylog_of_log(2.5, ctx.beta * delta) / ctx.beta


def eps0(delta: float, ctx: ThermoContext) -> float:
    """Energy density of the free gas measured from mu, (3/2) p0 + delta rho0."""
    delta = _check_delta(delta)
    if math.isinf(delta):
        return 0.0
    return 1.5 * p0(delta, ctx) + delta * rho0(delta, ctx)


def s0(delta: float, ctx: ThermoContext) -> float:
    return ctx.beta * (eps0(delta, ctx) + p0(delta, ctx))


def drho0(delta: float, ctx: ThermoContext) -> float:
    """Derivative of rho0 with respect to mu, diverging like delta^(-1/2) at 0."""
    delta = _check_delta(delta)
    if delta == 0.0:
        raise DivergenceError("drho0 diverges at delta = 0.")
    return ctx.beta * ctx.prefactor * _polylog_of_log(0.5, ctx.beta * delta)


def rho_c(ctx: ThermoContext) -> float:
    """Critical density rho0(0)."""
    return rho0(0.0, ctx)


# Radial quadrature of the defining integrals, used to cross-check the series.


def _momentum_cutoff(delta: float, ctx: ThermoContext) -> float:
    # Occupations at beta * k^2 / 2m = cut are below the tail tolerance
    cut = -math.log(settings.QUADRATURE_TAIL_TOL) + 10.0
    return math.sqrt(2.0 * ctx.mass * cut / ctx.beta)


def _radial_integral(integrand, delta: float, ctx: ThermoContext) -> float:
    k_max = _momentum_cutoff(delta, ctx)
    value, _ = integrate.quad(
        integrand, 0.0, k_max, epsabs=0.0, epsrel=1e-12, limit=400
    )
    return value / (2.0 * math.pi**2)


def rho0_quadrature(delta: float, ctx: ThermoContext) -> float:
    delta = _check_delta(delta)

    def integrand(k: float) -> float:
        x = ctx.beta * (k * k / (2.0 * ctx.mass) + delta)
        if x == 0.0:
            return 0.0
        return k * k / math.expm1(x)

    return _radial_integral(integrand, delta, ctx)


def p0_quadrature(delta: float, ctx: ThermoContext) -> float:
    delta = _check_delta(delta)

    def integrand(k: float) -> float:
        x = ctx.beta * (k * k / (2.0 * ctx.mass) + delta)
        if x == 0.0:
            return 0.0
        return -k * k * math.log(-math.expm1(-x))

    return _radial_integral(integrand, delta, ctx) / ctx.beta


def eps0_quadrature(delta: float, ctx: ThermoContext) -> float:
    delta = _check_delta(delta)

    def integrand(k: float) -> float:
        energy = k * k / (2.0 * ctx.mass) + delta
        x = ctx.beta * energy
        if x == 0.0:
            return 0.0
        return k * k * energy / math.expm1(x)

    return _radial_integral(integrand, delta, ctx)
