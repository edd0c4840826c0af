import math

import numpy as np
import pytest

from src.core import bose_thermo
from src.core.branch_solver import select_phase, solve_with_source
from src.core.finite_volume import (
    admissible_rho,
    free_lattice_density,
    fv_iterate,
    fv_limit_scan,
    initial_state,
    lattice_sum,
    level_spacing,
    mode_pair,
    predicted_scaled_gap,
    recoil_index,
    resolve_cutoff,
    shell_counts,
    solve_order_parameter,
)
from src.schemas.error import DomainError, FvIterationError, InvalidRegionError
from src.schemas.finite_volume import FvState, LatticeConfig
from src.schemas.phase import BranchKind, SourceCase

# Box with the recoil momentum exactly on the lattice for q = 1
COMMENSURATE_L = 6.0 * math.pi


def test_shell_counts():
    counts = shell_counts(1)
    assert counts[:4].tolist() == [1.0, 6.0, 12.0, 8.0]
    assert shell_counts(5).sum() == 11**3


def test_shell_counts_are_read_only():
    with pytest.raises(ValueError):
        shell_counts(2)[0] = 5.0


def test_recoil_index(params):
    assert recoil_index(params, COMMENSURATE_L) == 3
    assert level_spacing(params, COMMENSURATE_L) * 3**2 == pytest.approx(params.eps_q, rel=1e-12)


def test_lattice_sum_skips_zero_mode():
    # the origin has no occupation at delta_V = 0
    assert math.isfinite(lattice_sum(0.0, 1.0, 0.1, 4))


@pytest.mark.parametrize("model", ["raman", "rayleigh"])
def test_free_lattice_density_approaches_continuum(params, model):
    params = params.with_model(model)
    delta = 0.5
    lattice = free_lattice_density(delta, params, 40.0, 48)
    continuum = params.w * bose_thermo.rho0(delta, params.thermo)
    assert lattice == pytest.approx(continuum, rel=1e-2)


def test_resolve_cutoff_keeps_a_converged_cutoff(params):
    lattice = LatticeConfig(L=5.0, cutoff=32, tol=1e-6)
    assert resolve_cutoff(params, lattice) == 32
    assert resolve_cutoff(params, lattice.copy(update={"refine_cutoff": False})) == 32


def test_resolve_cutoff_grows_a_small_cutoff(params):
    lattice = LatticeConfig(L=40.0, cutoff=2, tol=1e-8)
    assert resolve_cutoff(params, lattice) > 2


def test_mode_pair_without_coupling(params):
    # eta = 0 puts the recoil occupation on the bare atomic level
    delta_V, volume = 0.2, 1000.0
    atom = delta_V + params.eps_q
    u = 4.0 * params.omega * atom / params.g**2
    pair = mode_pair(0.0, u, delta_V, params, volume)
    assert pair.zeta == 0.0
    assert pair.E_minus == pytest.approx(atom, rel=1e-12)
    assert pair.recoil_occupation == pytest.approx(1.0 / math.expm1(atom), rel=1e-10)


@pytest.mark.parametrize("h", [1e-3, 1e-4, 1e-5, 1e-6])
def test_order_parameter_follows_source(params, h):
    lattice = LatticeConfig(L=10.0, h=h)
    pair = solve_order_parameter(3.0, params, lattice, SourceCase.case_a)
    assert pair.eta == pytest.approx(params.g * (lattice.h + pair.zeta) / 6.0, rel=1e-10)
    assert pair.zeta >= 0.0


def test_order_parameter_needs_positive_gap(params):
    with pytest.raises(InvalidRegionError):
        solve_order_parameter(0.0, params, LatticeConfig(), SourceCase.case_a)


def test_normal_phase_without_source(params):
    # h = 0 keeps every order parameter at zero and the density on the free lattice gas
    lattice = LatticeConfig(L=COMMENSURATE_L, h=0.0)
    mu = -1.0
    state = fv_iterate(params, lattice, mu, initial_state(params, lattice, mu))
    assert state.converged
    assert state.eta == 0.0
    assert state.zeta == 0.0
    assert state.delta_V == pytest.approx(params.lam * state.rho - mu, rel=1e-14)
    expected = free_lattice_density(state.delta_V, params, lattice.L, state.cutoff)
    assert state.rho == pytest.approx(expected, rel=1e-8)


def test_normal_phase_with_source(params):
    lattice = LatticeConfig(L=10.0, h=1e-3)
    mu = -3.0
    state = fv_iterate(params, lattice, mu, initial_state(params, lattice, mu))
    limit = solve_with_source(mu, lattice.h, params)
    assert state.converged
    assert state.delta_V > 0.0
    assert state.zeta <= 1e-6
    assert state.eta == pytest.approx(params.g * lattice.h / (2.0 * state.delta_V), rel=1e-3)
    assert state.eta**2 == pytest.approx(limit.eta_sq, rel=1e-2)


def test_admissible_rho_keeps_a_solvable_start(params):
    lattice = LatticeConfig(L=10.0, h=1e-3)
    assert admissible_rho(2.0, -1.0, params, lattice) == 2.0
    assert admissible_rho(1.5, 1.0, params, lattice.copy(update={"h": 0.0})) == 1.5


def test_admissible_rho_lifts_a_condensed_seed(params):
    # the large-volume gap in S2 is too small for the eta equation in a finite box
    lattice = LatticeConfig(L=10.0, h=1e-3)
    mu = 1.0
    seed = initial_state(params, lattice, mu)
    assert seed.case == SourceCase.case_a
    rho = admissible_rho(seed.rho, mu, params, lattice)
    assert rho >= seed.rho
    pair = solve_order_parameter(params.lam * rho - mu, params, lattice, SourceCase.case_a)
    assert pair.eta > 0.0


def test_condensed_phase_with_source(params):
    lattice = LatticeConfig(L=10.0, h=1e-3)
    mu = 1.0
    state = fv_iterate(params, lattice, mu, initial_state(params, lattice, mu))
    assert state.converged
    assert state.case == SourceCase.case_a
    assert state.delta_V > 0.0
    assert state.eta == pytest.approx(
        params.g * (lattice.h + state.zeta) / (2.0 * state.delta_V), rel=1e-8
    )


@pytest.mark.slow
@pytest.mark.parametrize("L", [10.0, 20.0, 40.0])
@pytest.mark.parametrize("h", [1e-2, 1e-3, 1e-4])
def test_condensed_phase_grid_converges(params, L, h):
    lattice = LatticeConfig(L=L, h=h)
    mu = 1.0
    state = fv_iterate(params, lattice, mu, initial_state(params, lattice, mu))
    assert state.converged
    assert state.delta_V > 0.0
    assert state.rho > 0.0


def test_invalid_start_without_source(params):
    lattice = LatticeConfig(L=10.0, h=0.0)
    with pytest.raises(InvalidRegionError):
        fv_iterate(params, lattice, 1.0, FvState(rho=0.0, delta_V=-1.0))


def test_iteration_budget_exhausted(params):
    lattice = LatticeConfig(L=10.0, h=1e-3, max_iter=1)
    with pytest.raises(FvIterationError) as excinfo:
        fv_iterate(params, lattice, -3.0, initial_state(params, lattice, -3.0))
    assert excinfo.value.residual > 0.0


def test_initial_state_on_superradiant_branch(params):
    lattice = LatticeConfig(L=20.0, h=1e-3)
    state = initial_state(params, lattice, 5.0)
    limit = solve_with_source(5.0, lattice.h, params)
    assert state.eta**2 < limit.eta_sq
    assert state.delta_V == pytest.approx(params.lam * state.rho - 5.0, rel=1e-14)


def test_predicted_scaled_gap(params):
    delta = 0.4
    tau = 4.0 * delta * params.omega / params.g**2
    expected = params.omega / (tau * (params.omega + delta + params.eps_q))
    assert predicted_scaled_gap(delta, params) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize(
    "L_list, h_list",
    [([20.0, 10.0], [1e-3]), ([10.0], [1e-4, 1e-3]), ([], [1e-3])],
)
def test_scan_grid_checks(params, L_list, h_list):
    with pytest.raises(DomainError):
        fv_limit_scan(params, -1.0, L_list, h_list)


@pytest.mark.slow
def test_superradiant_gap_closes_like_inverse_volume(params):
    lattice = LatticeConfig(L=20.0, h=1e-3)
    mu = 5.0
    state = fv_iterate(params, lattice, mu, initial_state(params, lattice, mu))
    branch = select_phase(mu, params)
    eta_max_sq = 4.0 * params.omega * (branch.delta + params.eps_q) / params.g**2
    assert state.converged
    assert state.eta**2 == pytest.approx(eta_max_sq, rel=5e-2)
    ratio = lattice.volume * state.E_minus / predicted_scaled_gap(branch.delta, params)
    assert 0.5 < ratio < 2.0


@pytest.mark.slow
@pytest.mark.parametrize(
    "mu, kind, case",
    [
        (-1.0, BranchKind.s1, SourceCase.case_a),
        (1.0, BranchKind.s2, None),
        (5.0, BranchKind.s3_upper, SourceCase.case_b),
    ],
)
def test_limit_scan_reaches_thermodynamic_branch(params, mu, kind, case):
    scan = fv_limit_scan(params, mu, [10.0, 20.0, 40.0], [1e-2, 1e-3, 1e-4])
    assert scan.branch == kind
    assert len(scan.records) == 9
    assert all(record.converged for record in scan.records)
    final = scan.records[-1]
    assert (final.L, final.h) == (40.0, 1e-4)
    assert final.rho_error <= 2e-2
    if case is not None:
        assert scan.case == case
    if kind == BranchKind.s3_upper:
        ratio = final.V_E_minus / scan.V_E_minus_prediction
        assert 0.5 < ratio < 2.0
    else:
        assert scan.V_E_minus_prediction is None
    assert np.isfinite(scan.extrapolated["rho"])
