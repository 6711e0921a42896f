import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from model.errors import ConvergenceError, DegenerateInputError, DomainError, ModeMismatchError
from model.geometry import SegmentPlan
from model.link import LinkBudget, SnrModel, noise_power_dbm, path_gain_db, tx_power_for_snr
from model.traffic import DataBudget, requirement_value
from model.units import dbm_to_watts, Dbm, Watts, watts_to_dbm
from utils.config import settings
from utils.logger import get_logger, log_with_context

logger = get_logger(__name__)


class Scheme(Enum):
    MCTP = "MCTP"
    OTPA = "OTPA"
    MTPA = "MTPA"
    OTPA_INF = "OTPA_INF"
    ORACLE = "ORACLE"


SCHEME_ORDER: Tuple[Scheme, ...] = (
    Scheme.MCTP,
    Scheme.OTPA,
    Scheme.MTPA,
    Scheme.OTPA_INF,
    Scheme.ORACLE,
)

NEGATIVE_POWER_WARNING = "negative_power"


@dataclass(frozen=True)
class PowerAllocation:
    powers_dbm: Tuple[Dbm, ...]
    scheme: Scheme
    mode: SnrModel
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.powers_dbm)

    @property
    def powers_watts(self) -> Tuple[Watts, ...]:
        return tuple(dbm_to_watts(p) for p in self.powers_dbm)


class AllocationCoefficients(NamedTuple):
    a: Tuple[float, ...]
    c: Tuple[float, ...]
    g: float


def coefficients(plan: SegmentPlan, budget: LinkBudget, mode: SnrModel) -> AllocationCoefficients:
    """Dwell times a_i, the dB-ratio offsets c_i and slope g of the per-segment SNR c_i + g*P_i."""
    if mode is not SnrModel.PAPER_LITERAL:
        raise ModeMismatchError("allocation coefficients only exist for the paper-literal SNR")
    noise = noise_power_dbm(budget)
    if noise == 0.0:
        raise DegenerateInputError("noise power is exactly 0 dBm; g and c_i are undefined")
    gains = path_gain_db(budget, np.asarray(plan.midpoint_distances))
    return AllocationCoefficients(
        a=tuple(plan.dwell_times),
        c=tuple(float(x) for x in gains / noise),
        g=1.0 / noise,
    )


def _equal_data_rates(plan: SegmentPlan, d_fixed: float) -> np.ndarray:
    dwell = np.asarray(plan.dwell_times)
    return d_fixed / (dwell * plan.n_segments)


def allocate_closed_form(
    plan: SegmentPlan,
    budget: LinkBudget,
    d_fixed: Union[float, DataBudget],
    mode: SnrModel,
    scheme: Scheme = Scheme.OTPA,
) -> PowerAllocation:
    """Closed-form powers giving every segment D_fixed / N of midpoint-rule data.

    Paper-literal powers follow P_i = (2^(D/(a_i N)) - 1 - c_i) / g and may come
    out negative; they are reported with a warning rather than clamped.
    """
    required = requirement_value(d_fixed, mode)
    rates = _equal_data_rates(plan, required)
    targets = np.exp2(rates) - 1.0
    warnings: Tuple[str, ...] = ()

    if mode is SnrModel.PAPER_LITERAL:
        a, c, g = coefficients(plan, budget, mode)
        powers = (targets - np.asarray(c)) / g
        negative = int(np.count_nonzero(powers < 0))
        if negative:
            warnings = (NEGATIVE_POWER_WARNING,)
            log_with_context(
                logger,
                "warning",
                "Closed-form allocation produced negative dBm powers",
                negative_segments=negative,
                n_segments=plan.n_segments,
                d_fixed=required,
            )
    else:
        powers = np.asarray(
            tx_power_for_snr(budget, mode, targets, np.asarray(plan.midpoint_distances)),
            dtype=float,
        )

    return PowerAllocation(
        powers_dbm=tuple(Dbm(float(p)) for p in np.atleast_1d(powers)),
        scheme=scheme,
        mode=mode,
        warnings=warnings,
    )


def _channel_gains_per_watt(plan: SegmentPlan, budget: LinkBudget) -> np.ndarray:
    """Linear SNR per watt of transmit power at each segment midpoint."""
    gap_db = path_gain_db(budget, np.asarray(plan.midpoint_distances)) - noise_power_dbm(budget) + 30.0
    return 10.0 ** (gap_db / 10.0)


def _waterfill_data(level: float, dwell: np.ndarray, gains: np.ndarray) -> float:
    return float(np.sum(dwell * np.log2(np.maximum(1.0, level * gains))))


def allocate_oracle(
    plan: SegmentPlan,
    budget: LinkBudget,
    d_fixed: Union[float, DataBudget],
    mode: SnrModel,
    max_iterations: Optional[int] = None,
    tolerance: float = 1e-9,
) -> PowerAllocation:
    """Minimum-energy powers for the dwell-weighted data constraint (physical mode).

    Solves min sum a_i p_i s.t. sum a_i log2(1 + gamma_i p_i) >= D, p_i >= 0.
    The KKT conditions give water-filling, p_i = max(0, w - 1/gamma_i); the
    level w is bracketed and bisected in log space, then recomputed exactly
    on the active set the bisection identified.
    """
    if mode is not SnrModel.PHYSICAL:
        raise ModeMismatchError("the oracle solves the physical-mode program only")
    required = requirement_value(d_fixed, mode)
    max_iterations = settings.oracle_max_iterations if max_iterations is None else max_iterations

    dwell = np.asarray(plan.dwell_times)
    gains = _channel_gains_per_watt(plan, budget)

    if required == 0.0:
        return PowerAllocation(
            powers_dbm=tuple(-math.inf for _ in dwell),
            scheme=Scheme.ORACLE,
            mode=mode,
        )

    low = float(np.min(1.0 / gains))
    high = low * 2.0
    while _waterfill_data(high, dwell, gains) < required:
        high *= 2.0
        if not math.isfinite(high):
            raise ConvergenceError("could not bracket the water level")

    converged = False
    for _ in range(max_iterations):
        mid = math.sqrt(low * high)
        delivered = _waterfill_data(mid, dwell, gains)
        if delivered < required:
            low = mid
        else:
            high = mid
        if abs(_waterfill_data(high, dwell, gains) - required) <= tolerance * required:
            converged = True
            break
    if not converged:
        raise ConvergenceError(f"water-level bisection did not converge in {max_iterations} iterations")

    active = high * gains > 1.0
    level = 2.0 ** (
        (required - float(np.sum(dwell[active] * np.log2(gains[active])))) / float(np.sum(dwell[active]))
    )
    if np.all(level * gains[active] > 1.0) and np.all(level * gains[~active] <= 1.0):
        high = level

    watts = np.maximum(0.0, high - 1.0 / gains)
    log_with_context(
        logger,
        "debug",
        "Oracle water level found",
        water_level_w=high,
        active_segments=int(np.count_nonzero(watts > 0)),
    )
    return PowerAllocation(
        powers_dbm=tuple(watts_to_dbm(Watts(float(p))) for p in watts),
        scheme=Scheme.ORACLE,
        mode=mode,
    )


def energy_of(plan: SegmentPlan, allocation: PowerAllocation) -> float:
    """Half-cell energy: sum of a_i * P_i.

    Paper-literal sums dBm values (dBm-seconds); physical converts to watts
    first and returns joules.
    """
    if len(allocation) != plan.n_segments:
        raise DomainError(
            f"allocation has {len(allocation)} powers for a plan of {plan.n_segments} segments"
        )
    dwell = np.asarray(plan.dwell_times)
    powers = np.asarray(allocation.powers_dbm)
    if allocation.mode is SnrModel.PAPER_LITERAL:
        return float(np.sum(dwell * powers))
    return float(np.sum(dwell * 10.0 ** ((powers - 30.0) / 10.0)))


def constraint_residual(
    plan: SegmentPlan,
    budget: LinkBudget,
    allocation: PowerAllocation,
    d_fixed: float,
) -> float:
    """Relative gap between the dwell-weighted data of an allocation and D_fixed."""
    dwell = np.asarray(plan.dwell_times)
    powers = np.asarray(allocation.powers_dbm)
    if allocation.mode is SnrModel.PAPER_LITERAL:
        a, c, g = coefficients(plan, budget, allocation.mode)
        delivered = float(np.sum(dwell * np.log2(1.0 + np.asarray(c) + g * powers)))
    else:
        gains = _channel_gains_per_watt(plan, budget)
        watts = 10.0 ** ((powers - 30.0) / 10.0)
        delivered = float(np.sum(dwell * np.log2(1.0 + gains * watts)))
    if d_fixed == 0.0:
        return delivered
    return (delivered - d_fixed) / d_fixed
