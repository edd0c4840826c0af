import math

import mpmath
import numpy as np
import pytest

from src.core import bose_thermo
from src.schemas.error import DivergenceError, DomainError
from src.schemas.model import ThermoContext
from tests.utils import central_difference

ZETA_3_2 = 2.6123753486854883
ZETA_5_2 = 1.3414872572509171

FUGACITIES = [0.0, 1e-6, 0.1, 0.3, 0.5, 0.5000001, 0.7, 0.9, 0.99, 0.999999]
DELTAS = [1e-4, 0.01, 0.1, 1.0, 10.0]


@pytest.mark.parametrize("order", bose_thermo.SUPPORTED_ORDERS)
@pytest.mark.parametrize("fugacity", FUGACITIES)
def test_polylog_matches_mpmath(order, fugacity):
    # Both evaluation regimes agree with the arbitrary precision reference
    expected = float(mpmath.polylog(order, fugacity))
    assert bose_thermo.polylog(order, fugacity) == pytest.approx(
        expected, rel=1e-12, abs=1e-15
    )


def test_polylog_at_unit_fugacity():
    # Convergent orders reduce to the Riemann zeta values
    assert bose_thermo.polylog(1.5, 1.0) == pytest.approx(ZETA_3_2, rel=1e-13)
    assert bose_thermo.polylog(2.5, 1.0) == pytest.approx(ZETA_5_2, rel=1e-13)


@pytest.mark.parametrize("order", bose_thermo.SUPPORTED_ORDERS)
def test_polylog_is_increasing(order):
    # Li_s is increasing on [0, 1)
    grid = np.linspace(0.0, 0.999, 400)
    values = [bose_thermo.polylog(order, z) for z in grid]
    assert all(b > a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("fugacity", [-0.1, 1.0 + 1e-9, 2.0])
def test_polylog_outside_unit_interval(fugacity):
    with pytest.raises(DomainError):
        bose_thermo.polylog(1.5, fugacity)


def test_polylog_half_order_diverges_at_one():
    with pytest.raises(DivergenceError):
        bose_thermo.polylog(0.5, 1.0)


def test_polylog_unsupported_order():
    with pytest.raises(DomainError):
        bose_thermo.polylog(1.0, 0.5)


def test_prefactor():
    # (m / (2 pi beta))^(3/2)
    ctx = ThermoContext(beta=2.0, mass=3.0)
    assert ctx.prefactor == pytest.approx((3.0 / (4.0 * math.pi)) ** 1.5, rel=1e-15)


def test_critical_density(ctx):
    # zeta(3/2) / (2 pi)^(3/2) at beta = m = 1
    assert bose_thermo.rho_c(ctx) == pytest.approx(0.165869, abs=1e-6)
    assert bose_thermo.rho0(0.0, ctx) == bose_thermo.rho_c(ctx)


@pytest.mark.parametrize("delta", DELTAS)
def test_density_matches_quadrature(ctx, delta):
    assert bose_thermo.rho0(delta, ctx) == pytest.approx(
        bose_thermo.rho0_quadrature(delta, ctx), rel=1e-8
    )


@pytest.mark.parametrize("delta", DELTAS)
def test_pressure_matches_quadrature(ctx, delta):
    assert bose_thermo.p0(delta, ctx) == pytest.approx(
        bose_thermo.p0_quadrature(delta, ctx), rel=1e-8
    )


@pytest.mark.parametrize("delta", DELTAS)
def test_energy_matches_quadrature(ctx, delta):
    assert bose_thermo.eps0(delta, ctx) == pytest.approx(
        bose_thermo.eps0_quadrature(delta, ctx), rel=1e-8
    )


@pytest.mark.parametrize("delta", [0.01, 0.1, 1.0, 10.0])
def test_pressure_derivative_is_density(ctx, delta):
    # d p0 / d mu = rho0 with mu = -delta
    slope = central_difference(lambda d: -bose_thermo.p0(d, ctx), delta, 1e-5)
    assert slope == pytest.approx(bose_thermo.rho0(delta, ctx), rel=1e-6)


@pytest.mark.parametrize("delta", [0.01, 0.5, 3.0])
def test_density_derivative(ctx, delta):
    slope = central_difference(lambda d: -bose_thermo.rho0(d, ctx), delta, 1e-6)
    assert slope == pytest.approx(bose_thermo.drho0(delta, ctx), rel=1e-6)


@pytest.mark.parametrize("beta", [1.0, 2.0])
def test_density_derivative_diverges_as_inverse_root(beta):
    # drho0 * sqrt(delta) -> prefactor * sqrt(pi * beta)
    ctx = ThermoContext(beta=beta, mass=1.0)
    delta = 1e-10
    scaled = bose_thermo.drho0(delta, ctx) * math.sqrt(delta)
    assert scaled == pytest.approx(ctx.prefactor * math.sqrt(math.pi * beta), rel=1e-4)


def test_density_derivative_at_zero_gap(ctx):
    with pytest.raises(DivergenceError):
        bose_thermo.drho0(0.0, ctx)


@pytest.mark.parametrize("delta", DELTAS)
def test_energy_and_entropy_identities(ctx, delta):
    # eps0 = 3/2 p0 + delta rho0 and s0 = beta (eps0 + p0)
    p, rho = bose_thermo.p0(delta, ctx), bose_thermo.rho0(delta, ctx)
    assert bose_thermo.eps0(delta, ctx) == pytest.approx(1.5 * p + delta * rho, rel=1e-14)
    assert bose_thermo.s0(delta, ctx) == pytest.approx(
        ctx.beta * (bose_thermo.eps0(delta, ctx) + p), rel=1e-14
    )


def test_functions_vanish_at_infinite_gap(ctx):
    assert bose_thermo.rho0(math.inf, ctx) == 0.0
    assert bose_thermo.p0(math.inf, ctx) == 0.0
    assert bose_thermo.eps0(math.inf, ctx) == 0.0


def test_density_is_decreasing(ctx):
    grid = np.linspace(0.0, 5.0, 200)
    values = [bose_thermo.rho0(d, ctx) for d in grid]
    assert all(b < a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("func", [bose_thermo.rho0, bose_thermo.p0, bose_thermo.drho0])
def test_negative_gap_is_rejected(ctx, func):
    with pytest.raises(DomainError):
        func(-1e-3, ctx)
