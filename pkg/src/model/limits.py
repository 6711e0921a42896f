"""Energy of the closed-form allocation as the segment count grows without bound.

With a_i = (d0/v)*phi_i, phi_i = tan((N+1-i)theta) - tan((N-i)theta), the
finite energy splits into three sums over the phi_i:

    E(N) = (d0/v) * [p1/g - p2*(1/g + M + 10n*log10(lambda/4pi)) + p3]

    p1 = sum phi_i * 2^(Q / (N*phi_i))
    p2 = sum phi_i                       (= H for every N)
    p3 = 10n * sum phi_i * log10(d_i_mid)

Each is a Riemann sum in u = (N - i + 1/2)*theta with phi_i ~ theta*sec^2(u),
which gives the exact limits used by ``limit_energy_exact``.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from model.errors import DegenerateInputError, ModeMismatchError
from model.geometry import NetworkGeometry, segment_plan
from model.link import LinkBudget, SnrModel, noise_power_dbm
from model.traffic import DataBudget, requirement_value
from utils.logger import get_logger
from utils.quadrature import adaptive_simpson

logger = get_logger(__name__)


class LimitForm(Enum):
    CLOSED_FORM = "closed-form"
    PRINTED = "printed"
    EXACT = "exact"


@dataclass(frozen=True)
class LimitConstants:
    h: float
    k: float
    q: float
    m: float


class EnergyParts(NamedTuple):
    p1: float
    p2: float
    p3: float
    total: float


def _literal_requirement(d_fixed: Union[float, DataBudget], mode: SnrModel) -> float:
    if mode is not SnrModel.PAPER_LITERAL:
        raise ModeMismatchError("the infinite-segment limit is only defined for the paper-literal SNR")
    return requirement_value(d_fixed, mode)


def _slope(budget: LinkBudget) -> float:
    noise = noise_power_dbm(budget)
    if noise == 0.0:
        raise DegenerateInputError("noise power is exactly 0 dBm; g is undefined")
    return 1.0 / noise


def limit_constants(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    d_fixed: Union[float, DataBudget],
    mode: SnrModel = SnrModel.PAPER_LITERAL,
) -> LimitConstants:
    required = _literal_requirement(d_fixed, mode)
    h = geometry.dl / (2.0 * geometry.d0)
    return LimitConstants(
        h=h,
        k=math.atan(h),
        q=geometry.v * required / geometry.d0,
        m=2.0 * budget.pattern.g0 - budget.w,
    )


def _combine(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    constants: LimitConstants,
    p1: float,
    p2: float,
    p3: float,
) -> float:
    g = _slope(budget)
    offset = 1.0 / g + constants.m + 10.0 * budget.n_pl * math.log10(budget.wavelength / (4.0 * math.pi))
    return geometry.d0 / geometry.v * (p1 / g - p2 * offset + p3)


def energy_decomposition(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    d_fixed: Union[float, DataBudget],
    n_segments: int,
    mode: SnrModel = SnrModel.PAPER_LITERAL,
) -> EnergyParts:
    """The three partial sums of the finite-N energy and their combination."""
    constants = limit_constants(geometry, budget, d_fixed, mode)
    plan = segment_plan(geometry.with_segments(n_segments))
    phi = np.asarray(plan.widths) / geometry.d0
    p1 = float(np.sum(phi * np.exp2(constants.q / (n_segments * phi))))
    p2 = float(np.sum(phi))
    p3 = float(10.0 * budget.n_pl * np.sum(phi * np.log10(np.asarray(plan.midpoint_distances))))
    return EnergyParts(p1, p2, p3, _combine(geometry, budget, constants, p1, p2, p3))


def finite_energy_sum(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    d_fixed: Union[float, DataBudget],
    n_segments: int,
    mode: SnrModel = SnrModel.PAPER_LITERAL,
) -> float:
    """Closed-form allocation energy at N segments, evaluated through its decomposition."""
    return energy_decomposition(geometry, budget, d_fixed, n_segments, mode).total


def partial_limits(
    constants: LimitConstants,
    budget: LinkBudget,
    d0: float,
    form: LimitForm = LimitForm.EXACT,
) -> Tuple[float, float, float]:
    """Limits of (p1, p2, p3) as N grows.

    The closed-form limits are p1 -> H + K*(2^(Q/K) - 1) and
    p3 -> 10n*H*log10(d0). They treat d_i_mid as d0 and the per-segment
    exponent as Q/K, which only holds near broadside, so they drift from the
    finite sums as H grows. The printed form shares these parts; it differs
    only in how ``limit_energy`` combines them.
    """
    h, k, q = constants.h, constants.k, constants.q
    if form is LimitForm.EXACT:
        p1 = adaptive_simpson(
            lambda u: np.exp2(q * np.cos(u) ** 2 / k) / np.cos(u) ** 2, 0.0, k
        ).value
        p3 = 10.0 * budget.n_pl * adaptive_simpson(
            lambda u: np.log10(d0 / np.cos(u)) / np.cos(u) ** 2, 0.0, k
        ).value
        return p1, h, p3
    p1 = h + k * (2.0 ** (q / k) - 1.0)
    p3 = 10.0 * budget.n_pl * h * math.log10(d0)
    return p1, h, p3


def limit_energy(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    d_fixed: Union[float, DataBudget],
    as_printed: bool = False,
    mode: SnrModel = SnrModel.PAPER_LITERAL,
) -> float:
    """Closed-form OTPA(N -> inf) energy in dBm-seconds.

    E = (d0/v) * [H*(10n*log10(4pi*d0/lambda) - M) + (K/g)*(2^(Q/K) - 1)].
    With ``as_printed`` the log10 is dropped from the first term, the
    printed variant kept for comparison.
    """
    constants = limit_constants(geometry, budget, d_fixed, mode)
    g = _slope(budget)
    ratio = 4.0 * math.pi * geometry.d0 / budget.wavelength
    path_term = 10.0 * budget.n_pl * (ratio if as_printed else math.log10(ratio))
    data_term = constants.k / g * (2.0 ** (constants.q / constants.k) - 1.0)
    return geometry.d0 / geometry.v * (constants.h * (path_term - constants.m) + data_term)


def limit_energy_exact(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    d_fixed: Union[float, DataBudget],
    mode: SnrModel = SnrModel.PAPER_LITERAL,
) -> float:
    """True N -> inf limit of ``finite_energy_sum``, from the integral limits of its parts."""
    constants = limit_constants(geometry, budget, d_fixed, mode)
    p1, p2, p3 = partial_limits(constants, budget, geometry.d0, LimitForm.EXACT)
    return _combine(geometry, budget, constants, p1, p2, p3)


def limit_energy_for_form(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    d_fixed: Union[float, DataBudget],
    form: LimitForm,
    mode: SnrModel = SnrModel.PAPER_LITERAL,
) -> float:
    if form is LimitForm.EXACT:
        return limit_energy_exact(geometry, budget, d_fixed, mode)
    return limit_energy(geometry, budget, d_fixed, as_printed=form is LimitForm.PRINTED, mode=mode)


@dataclass(frozen=True)
class ConvergenceRow:
    n_segments: int
    energy: float
    relative_gap: float


def convergence_ladder(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    d_fixed: Union[float, DataBudget],
    reference: Optional[float] = None,
    max_segments: int = 2048,
) -> Tuple[ConvergenceRow, ...]:
    """E(N) for N = 2, 4, ..., max_segments with its gap to ``reference`` (the exact limit by default)."""
    target = limit_energy_exact(geometry, budget, d_fixed) if reference is None else reference
    rows = []
    n = 2
    while n <= max_segments:
        energy = finite_energy_sum(geometry, budget, d_fixed, n)
        gap = (energy - target) / abs(target) if target != 0.0 else math.nan
        rows.append(ConvergenceRow(n_segments=n, energy=energy, relative_gap=gap))
        n *= 2
    logger.debug(f"Convergence ladder up to N={max_segments}: last gap {rows[-1].relative_gap if rows else math.nan}")
    return tuple(rows)
