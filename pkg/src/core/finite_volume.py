"""Finite-volume consistency equations with a gauge-breaking source h.

The box has side L with periodic boundary conditions, so momenta live on
(2 pi / L) Z^3 truncated at |n_i| <= cutoff. The source h couples to the rest
condensate and all order parameters are taken real and non-negative:

    eta  = g (h + zeta) / (2 delta_V),        delta_V = lambda rho - mu > 0
    zeta = g eta (n(E_-) - n(E_+)) / (2 V (E_+ - E_-))
    rho  = eta^2 + [n(delta_V) + <a_q* a_q> + thermal lattice sums] / V

with n(E) = 1 / (exp(beta E) - 1). The second equation is the photon/recoil
coherence of the diagonalized q-mode pair, with the sign fixed so that
zeta >= 0 whenever h >= 0.

For fixed rho the gapped root of the eta equation is solved directly in eta.
The root next to the constraint surface is solved on u = eta_max^2 - eta^2 > 0
in log space, where u controls E_- = g^2 u / (4 E_+) without cancellation.
The equation for rho is iterated with a damped secant-relaxed update; the
plain fixed-point map is repelling on the superradiant branch.
"""

import math
from functools import lru_cache
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from src.core.branch_solver import select_phase, solve_with_source
from src.core.config import settings
from src.core.job import map_ordered, solver_logger
from src.core.observables import condensates
from src.schemas.error import DomainError, FvIterationError, InvalidRegionError
from src.schemas.finite_volume import FvRecord, FvScan, FvState, LatticeConfig
from src.schemas.model import ModelKind, ModelParams
from src.schemas.phase import BranchKind, SourceCase

_MAX_BACKTRACK = 40
_MAX_SEED_DOUBLINGS = 80
_MONOTONE_WINDOW = 10
_LOG_SPAN = 50.0  # Width of one log-space extension step of the eta bracket
_MAX_LOG_SPAN = 700.0


def bose_factor(energy: float, beta: float) -> float:
    return 1.0 / math.expm1(beta * energy)


# Momentum lattice


@lru_cache(maxsize=32)
def shell_counts(cutoff: int) -> np.ndarray:
    """Number of lattice vectors n in {-K..K}^3 with |n|^2 = s, indexed by s."""
    line = np.zeros(cutoff**2 + 1)
    np.add.at(line, np.arange(-cutoff, cutoff + 1) ** 2, 1.0)
    counts = np.rint(np.convolve(np.convolve(line, line), line))
    counts.flags.writeable = False
    return counts


def level_spacing(params: ModelParams, L: float) -> float:
    """Kinetic energy of the first lattice shell, (2 pi / L)^2 / 2m."""
    return (2.0 * math.pi / L) ** 2 / (2.0 * params.mass)


def recoil_index(params: ModelParams, L: float) -> int:
    """Lattice index along e_1 closest to the recoil momentum q."""
    return int(round(params.q * L / (2.0 * math.pi)))


def lattice_sum(delta_V: float, beta: float, spacing: float, cutoff: int) -> float:
    """Sum of Bose factors over every lattice momentum, origin included."""
    counts = shell_counts(cutoff)
    energies = spacing * np.arange(counts.size) + delta_V
    with np.errstate(over="ignore", divide="ignore"):
        occupations = counts / np.expm1(beta * energies)
    if delta_V == 0.0:
        occupations[0] = 0.0
    return float(np.sum(occupations))


def thermal_occupation(
    delta_V: float, params: ModelParams, L: float, cutoff: int
) -> float:
    """Thermal atoms outside the rest condensate and the recoil mode, summed over the box."""
    beta, spacing = params.beta, level_spacing(params, L)
    total = lattice_sum(delta_V, beta, spacing, cutoff)
    origin = bose_factor(delta_V, beta)
    n_q = recoil_index(params, L)
    recoil = bose_factor(spacing * n_q**2 + delta_V, beta)
    if params.model == ModelKind.raman:
        # ground state without k = 0 plus excited state without k = q
        return (total - origin) + (total - recoil)
    if n_q == 0:
        return total - origin
    return total - origin - recoil


def free_lattice_density(
    delta: float, params: ModelParams, L: float, cutoff: int
) -> float:
    """Density of the uncoupled gas on the lattice, w sum_k n(eps_k + delta) / V."""
    return params.w * lattice_sum(delta, params.beta, level_spacing(params, L), cutoff) / L**3


def resolve_cutoff(params: ModelParams, lattice: LatticeConfig) -> int:
    """Double the cutoff until the lattice tail at delta_V = 0 changes by less than tol."""
    cutoff = lattice.cutoff
    if not lattice.refine_cutoff:
        return cutoff
    spacing, volume = level_spacing(params, lattice.L), lattice.volume
    current = lattice_sum(0.0, params.beta, spacing, cutoff)
    while cutoff < settings.FV_MAX_CUTOFF:
        refined = lattice_sum(0.0, params.beta, spacing, 2 * cutoff)
        if abs(refined - current) / volume < lattice.tol:
            break
        solver_logger.debug(f"Cutoff {cutoff} too small at L={lattice.L}, doubling.")
        cutoff, current = 2 * cutoff, refined
    else:
        solver_logger.warning(
            f"Cutoff capped at {cutoff}, lattice tail may exceed tol={lattice.tol}."
        )
    return cutoff


# The q-mode pair


class ModePair(NamedTuple):
    eta: float
    zeta: float
    E_plus: float
    E_minus: float
    recoil_occupation: float


def mode_pair(
    eta: float, u: float, delta_V: float, params: ModelParams, volume: float
) -> ModePair:
    """Energies, coherence and recoil occupation for eta with u = eta_max^2 - eta^2."""
    atom = delta_V + params.eps_q
    e_plus = 0.5 * (params.omega + atom) + 0.5 * math.hypot(
        params.omega - atom, params.g * eta
    )
    e_minus = params.g**2 * u / (4.0 * e_plus)
    gap = e_plus - e_minus
    n_plus = bose_factor(e_plus, params.beta)
    n_minus = bose_factor(e_minus, params.beta)
    if gap <= 1e-14 * e_plus:
        # degenerate pair, (n_- - n_+) / gap -> -n'(E)
        x = params.beta * e_plus
        weight = params.beta * math.exp(x) / math.expm1(x) ** 2
        recoil = n_plus
    else:
        weight = (n_minus - n_plus) / gap
        recoil = 0.5 * (n_plus + n_minus) + (atom - params.omega) * (
            n_plus - n_minus
        ) / (2.0 * gap)
    zeta = params.g * eta * weight / (2.0 * volume)
    return ModePair(eta, zeta, e_plus, e_minus, recoil)


class _EtaLandscape:
    """phi = eta - g (h + zeta) / (2 delta_V), read either at eta or at u = exp(s)."""

    def __init__(self, delta_V: float, params: ModelParams, lattice: LatticeConfig):
        self.delta_V, self.params, self.lattice = delta_V, params, lattice
        self.eta_max_sq = 4.0 * params.omega * (delta_V + params.eps_q) / params.g**2
        self.s_max = math.log(self.eta_max_sq)

    def pair(self, s: float) -> ModePair:
        u = min(math.exp(s), self.eta_max_sq)
        eta = math.sqrt(max(self.eta_max_sq - u, 0.0))
        return mode_pair(eta, u, self.delta_V, self.params, self.lattice.volume)

    def pair_at(self, eta: float) -> ModePair:
        u = self.eta_max_sq - eta * eta
        return mode_pair(eta, u, self.delta_V, self.params, self.lattice.volume)

    def residual(self, pair: ModePair) -> float:
        return pair.eta - self.params.g * (self.lattice.h + pair.zeta) / (
            2.0 * self.delta_V
        )

    def phi(self, s: float) -> float:
        return self.residual(self.pair(s))

    def phi_at(self, eta: float) -> float:
        return self.residual(self.pair_at(eta))

    def bracket(self) -> Tuple[float, float]:
        """Lower end with phi < 0 and the location of the maximum of phi."""
        s_lo = self.s_max - _LOG_SPAN
        while self.phi(s_lo) >= 0.0:
            if self.s_max - s_lo > _MAX_LOG_SPAN:
                raise InvalidRegionError(
                    f"eta equation has no closing root at delta_V={self.delta_V!r}."
                )
            s_lo -= _LOG_SPAN
        peak = optimize.minimize_scalar(
            lambda s: -self.phi(s),
            bounds=(s_lo, self.s_max),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return s_lo, float(peak.x)

    def has_root(self) -> bool:
        if self.lattice.h == 0.0:
            return True
        try:
            _, s_peak = self.bracket()
        except InvalidRegionError:
            return False
        return self.phi(s_peak) > 0.0


def _brentq(
    func: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-14
) -> float:
    return optimize.brentq(func, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)


def solve_order_parameter(
    delta_V: float, params: ModelParams, lattice: LatticeConfig, case: SourceCase
) -> ModePair:
    """Root of the eta equation at fixed delta_V.

    Case A is the root at small eta (gapped E_-), found directly in eta above
    the bare value g h / (2 delta_V). Case B is the one next to the constraint
    surface where E_- is of order 1/V, found in log u.
    """

    if delta_V <= 0.0:
        raise InvalidRegionError(f"delta_V={delta_V!r} must be positive.")
    landscape = _EtaLandscape(delta_V, params, lattice)
    h = lattice.h
    if case == SourceCase.case_a and h == 0.0:
        return landscape.pair(landscape.s_max)

    s_lo, s_peak = landscape.bracket()
    if landscape.phi(s_peak) <= 0.0:
        if h == 0.0:
            return landscape.pair(landscape.s_max)
        raise InvalidRegionError(
            f"eta equation has no root at delta_V={delta_V!r}, h={h!r}."
        )
    if case == SourceCase.case_b:
        return landscape.pair(_brentq(landscape.phi, s_lo, s_peak))

    bare = params.g * h / (2.0 * delta_V)
    eta_peak = landscape.pair(s_peak).eta
    if landscape.phi_at(eta_peak) <= 0.0:
        raise InvalidRegionError(
            f"eta equation has no gapped root at delta_V={delta_V!r}, h={h!r}."
        )
    eta = _brentq(landscape.phi_at, bare, eta_peak, xtol=1e-15 * bare)
    return landscape.pair_at(eta)


def _pick_case(
    eta: float, delta_V: float, params: ModelParams, lattice: LatticeConfig
) -> SourceCase:
    landscape = _EtaLandscape(delta_V, params, lattice)
    if eta == 0.0:
        return SourceCase.case_a
    try:
        _, s_peak = landscape.bracket()
    except InvalidRegionError:
        return SourceCase.case_a
    return SourceCase.case_b if eta >= landscape.pair(s_peak).eta else SourceCase.case_a


def density_target(
    rho: float,
    mu: float,
    params: ModelParams,
    lattice: LatticeConfig,
    cutoff: int,
    case: SourceCase,
) -> Tuple[float, ModePair]:
    """Right-hand side of the density equation at rho, with the solved q-mode pair."""
    delta_V = params.lam * rho - mu
    pair = solve_order_parameter(delta_V, params, lattice, case)
    fluctuations = (
        bose_factor(delta_V, params.beta)
        + pair.recoil_occupation
        + thermal_occupation(delta_V, params, lattice.L, cutoff)
    )
    return pair.eta**2 + fluctuations / lattice.volume, pair


# Fixed-point iteration


def admissible_rho(
    rho: float, mu: float, params: ModelParams, lattice: LatticeConfig
) -> float:
    """Smallest rho on a doubling ladder of delta_V at which the eta equation has a root.

    Large-volume seeds can sit below the finite-volume gap, where
    g h / (2 delta_V) already exceeds every attainable eta.
    """
    start = delta_V = params.lam * rho - mu
    if delta_V <= 0.0:
        if lattice.h == 0.0:
            raise InvalidRegionError(
                f"Initial delta_V={delta_V!r} is not positive and h = 0."
            )
        delta_V = 1e-3 * max(1.0, abs(mu))
    for _ in range(_MAX_SEED_DOUBLINGS):
        if _EtaLandscape(delta_V, params, lattice).has_root():
            return rho if delta_V == start else (mu + delta_V) / params.lam
        solver_logger.debug(f"No eta root at delta_V={delta_V!r}, doubling the gap.")
        delta_V *= 2.0
    raise InvalidRegionError(
        f"No admissible starting gap below delta_V={delta_V!r} at mu={mu!r}."
    )


def fv_iterate(
    params: ModelParams, lattice: LatticeConfig, mu: float, initial: FvState
) -> FvState:
    """Solve the finite-volume consistency equations starting from ``initial``.

    This replaces the joint damped map on (eta, zeta, rho): at every density
    the eta equation is solved exactly, which fixes eta and zeta, and only rho
    is iterated. The density is updated as rho <- rho + d (T(rho) - rho) / (1 - s),
    where s is a secant estimate of dT/drho. The start is first moved up to a
    density where the eta equation is solvable. Steps that leave that region
    are halved, and the damping is halved whenever the residual grows.
    """

    cutoff = resolve_cutoff(params, lattice)
    rho = admissible_rho(initial.rho, mu, params, lattice)
    case = initial.case or _pick_case(
        initial.eta, params.lam * rho - mu, params, lattice
    )

    def evaluate(x: float) -> Tuple[float, ModePair]:
        return density_target(x, mu, params, lattice, cutoff, case)

    target, pair = evaluate(rho)
    last_eta, last_zeta = initial.eta, initial.zeta
    damping, slope, calm_steps = lattice.damping, 0.0, 0
    residuals: List[float] = []

    for iteration in range(1, lattice.max_iter + 1):
        residual = target - rho
        if residuals and abs(residual) > residuals[-1]:
            damping *= 0.5
            calm_steps = 0
        else:
            calm_steps += 1
            if calm_steps >= 5:
                damping = min(lattice.damping, 2.0 * damping)
        residuals.append(abs(residual))

        change = max(
            abs(residual), abs(pair.eta - last_eta), abs(pair.zeta - last_zeta)
        )
        if change < lattice.tol:
            window = residuals[-_MONOTONE_WINDOW:]
            monotone = all(b <= a + 1e-15 for a, b in zip(window, window[1:]))
            if not monotone:
                solver_logger.warning(
                    f"Residual not monotone over the last {len(window)} iterations "
                    f"(mu={mu!r}, L={lattice.L!r}, h={lattice.h!r})."
                )
            return FvState(
                eta=pair.eta,
                zeta=pair.zeta,
                rho=rho,
                delta_V=params.lam * rho - mu,
                E_plus=pair.E_plus,
                E_minus=pair.E_minus,
                iterations=iteration,
                converged=True,
                residual=abs(residual),
                monotone=monotone,
                cutoff=cutoff,
                case=case,
            )

        denominator = 1.0 - slope
        if abs(denominator) < 0.05:
            denominator = math.copysign(0.05, denominator)
        step = damping * residual / denominator
        for _ in range(_MAX_BACKTRACK):
            candidate = rho + step
            if candidate >= 0.0 and params.lam * candidate - mu > 0.0:
                try:
                    new_target, new_pair = evaluate(candidate)
                    break
                except InvalidRegionError:
                    pass
            step *= 0.5
        else:
            raise InvalidRegionError(
                f"No admissible step from rho={rho!r} at mu={mu!r}, delta_V stays <= 0."
            )

        if abs(candidate - rho) > 1e-12 * max(1.0, abs(rho)):
            slope = (new_target - target) / (candidate - rho)
        last_eta, last_zeta = pair.eta, pair.zeta
        rho, target, pair = candidate, new_target, new_pair

    raise FvIterationError(
        f"Finite-volume iteration did not converge in {lattice.max_iter} steps "
        f"(last residual {residuals[-1]:.3e}).",
        residual=residuals[-1],
    )


def initial_state(params: ModelParams, lattice: LatticeConfig, mu: float) -> FvState:
    """Starting point taken from the large-volume solution at the same source."""
    if lattice.h > 0.0:
        limit = solve_with_source(mu, lattice.h, params)
        delta, rho, case = limit.delta, limit.rho, limit.case
        eta_sq = limit.eta_sq
    else:
        branch = select_phase(mu, params)
        delta, rho = branch.delta, branch.rho_total
        eta_sq = condensates(branch, params)[0]
        case = SourceCase.case_b if branch.kind == BranchKind.s3_upper else SourceCase.case_a
        if branch.kind == BranchKind.s2:
            delta = 1.0 / (params.beta * lattice.volume * max(eta_sq, 1e-12))
            rho = (mu + delta) / params.lam
    if case == SourceCase.case_b:
        eta_max_sq = 4.0 * params.omega * (delta + params.eps_q) / params.g**2
        correction = 1.0 / (delta * params.beta * lattice.volume)
        eta_sq = max(eta_max_sq - correction, 0.5 * eta_max_sq)
    return FvState(
        eta=math.sqrt(eta_sq),
        zeta=0.0,
        rho=max(rho, 0.0),
        delta_V=params.lam * max(rho, 0.0) - mu,
        case=case,
    )


def predicted_scaled_gap(delta: float, params: ModelParams) -> float:
    """Large-volume limit of V * E_- on the superradiant branch."""
    tau = 4.0 * delta * params.omega / params.g**2
    return params.omega / (
        params.beta * tau * (params.omega + delta + params.eps_q)
    )


def _extrapolate(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Intercept at x = 0 of a straight-line fit, or the single value."""
    if len(xs) < 2:
        return float(ys[-1])
    slope, intercept = np.polyfit(np.asarray(xs), np.asarray(ys), 1)
    return float(intercept)


def _check_scan_grid(L_list: Sequence[float], h_list: Sequence[float]) -> None:
    if not L_list or not h_list:
        raise DomainError("fv_limit_scan needs at least one L and one h.")
    if any(b <= a for a, b in zip(L_list, L_list[1:])):
        raise DomainError(f"L_list must be increasing, got {list(L_list)}.")
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise DomainError(f"h_list must be decreasing, got {list(h_list)}.")


def fv_limit_scan(
    params: ModelParams,
    mu: float,
    L_list: Sequence[float],
    h_list: Sequence[float],
    lattice: Optional[LatticeConfig] = None,
) -> FvScan:
    """Finite-volume runs over growing boxes and shrinking sources.

    Every run starts from the large-volume solution at its own h. The table
    is compared against the selected thermodynamic-limit branch, and the
    regime (gapped or closing E_-) is read off how V * E_- scales between the
    two largest boxes at the smallest source.
    """

    L_list, h_list = list(L_list), list(h_list)
    _check_scan_grid(L_list, h_list)
    base = lattice or LatticeConfig()
    branch = select_phase(mu, params)
    n0, nq, _ = condensates(branch, params)
    analytic = {
        "rho": branch.rho_total,
        "delta": branch.delta,
        "eta_sq": n0,
        "tau": nq,
    }

    def run(cell: Tuple[float, float]) -> FvRecord:
        L, h = cell
        config = base.copy(update={"L": L, "h": h})
        state = fv_iterate(params, config, mu, initial_state(params, config, mu))
        reference = solve_with_source(mu, h, params).rho if h > 0.0 else branch.rho_total
        solver_logger.info(
            f"fv run L={L!r} h={h!r}: rho={state.rho!r} in {state.iterations} iterations"
        )
        return FvRecord(
            L=L,
            h=h,
            volume=config.volume,
            eta_sq=state.eta**2,
            zeta=state.zeta,
            rho=state.rho,
            delta_V=state.delta_V,
            V_E_minus=config.volume * state.E_minus,
            iterations=state.iterations,
            converged=state.converged,
            reference_rho=reference,
            rho_error=abs(state.rho - branch.rho_total) / max(branch.rho_total, 1e-300),
        )

    cells = [(L, h) for L in L_list for h in h_list]
    records = map_ordered(run, cells)

    case = _classify(records, L_list, h_list, branch.kind)
    extrapolated = {}
    for key in ("rho", "eta_sq", "delta_V"):
        per_h = []
        for h in h_list:
            rows = [r for r in records if r.h == h]
            per_h.append(
                _extrapolate([1.0 / r.volume for r in rows], [getattr(r, key) for r in rows])
            )
        extrapolated[key] = _extrapolate(h_list, per_h)

    prediction = None
    if branch.kind == BranchKind.s3_upper:
        prediction = predicted_scaled_gap(branch.delta, params)
    return FvScan(
        mu=mu,
        branch=branch.kind,
        case=case,
        records=records,
        analytic=analytic,
        extrapolated=extrapolated,
        V_E_minus_prediction=prediction,
    )


def _classify(
    records: Iterable[FvRecord],
    L_list: Sequence[float],
    h_list: Sequence[float],
    kind: BranchKind,
) -> SourceCase:
    if len(L_list) < 2:
        return SourceCase.case_b if kind == BranchKind.s3_upper else SourceCase.case_a
    h_min = h_list[-1]
    by_L = {r.L: r for r in records if r.h == h_min}
    small, large = by_L[L_list[-2]], by_L[L_list[-1]]
    ratio = large.V_E_minus / small.V_E_minus
    return (
        SourceCase.case_b
        if ratio < math.sqrt(large.volume / small.volume)
        else SourceCase.case_a
    )
