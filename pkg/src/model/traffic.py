"""Data delivered over the half-cell.

Data is the time integral of the unitless rate log2(1 + SNR), so it is
measured in rate-seconds. Bandwidth is never multiplied in.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from model.errors import DomainError, ModeMismatchError
from model.geometry import NetworkGeometry, SegmentPlan, distance_along_track
from model.link import LinkBudget, SnrModel, rate, snr
from model.units import Dbm
from utils.quadrature import CrossCheck, Integrand, adaptive_simpson, cross_check


class PowerAllocationLike(Protocol):
    powers_dbm: Tuple[Dbm, ...]
    mode: SnrModel


@dataclass(frozen=True)
class DataBudget:
    """Required half-cell data and its per-segment midpoint breakdown.

    The SNR mode it was computed in travels with it so it cannot be consumed
    by an allocation running in the other mode.
    """
    d_fixed: float
    mode: SnrModel
    per_segment: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.d_fixed < 0:
            raise DomainError(f"d_fixed must be >= 0, got {self.d_fixed}")
        if any(d < 0 for d in self.per_segment):
            raise DomainError("per-segment data must be >= 0")


def requirement_value(d_fixed: Union[float, DataBudget], mode: SnrModel) -> float:
    """Unwrap a data requirement, rejecting one computed in another SNR mode."""
    if isinstance(d_fixed, DataBudget):
        if d_fixed.mode is not mode:
            raise ModeMismatchError(
                f"D_fixed was computed in {d_fixed.mode.value} mode but is consumed in {mode.value} mode"
            )
        return d_fixed.d_fixed
    if d_fixed < 0:
        raise DomainError(f"d_fixed must be >= 0, got {d_fixed}")
    return float(d_fixed)


def _check_index(plan: SegmentPlan, i: int) -> None:
    if not 1 <= i <= plan.n_segments:
        raise DomainError(f"segment index {i} outside 1..{plan.n_segments}")


def data_segment_midpoint(
    geometry: NetworkGeometry,
    plan: SegmentPlan,
    budget: LinkBudget,
    model: SnrModel,
    ptx_dbm: Dbm,
    i: int,
) -> float:
    """Midpoint-rule data of segment ``i`` (1-based): rate at the midpoint times dwell time."""
    _check_index(plan, i)
    midpoint_snr = snr(budget, model, ptx_dbm, plan.midpoint_distances[i - 1])
    return float(rate(midpoint_snr)) * plan.dwell_times[i - 1]


def _rate_integrand(d0: float, half_length: float, budget: LinkBudget, model: SnrModel, ptx_dbm: Dbm) -> Integrand:
    def integrand(u: np.ndarray) -> np.ndarray:
        return rate(snr(budget, model, ptx_dbm, distance_along_track(d0, half_length, u)))

    return integrand


@lru_cache(maxsize=4096)
def spatial_rate_integral(
    d0: float,
    half_length: float,
    budget: LinkBudget,
    model: SnrModel,
    ptx_dbm: Dbm,
    u_start: float,
    u_end: float,
) -> float:
    """Integral of the rate over arc positions [u_start, u_end] (metres from the cell edge).

    Memoised. The arc integral does not involve the speed, so Monte Carlo
    trials at different estimated speeds share their D_fixed integrals.
    """
    return adaptive_simpson(_rate_integrand(d0, half_length, budget, model, ptx_dbm), u_start, u_end).value


def data_integral_constant_power(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    model: SnrModel,
    ptx_dbm: Dbm,
    u_start: float = 0.0,
    u_end: Optional[float] = None,
) -> float:
    """Exact-integral data under constant power, D_fixed when run over the whole half-cell.

    The integral over time t in [0, dl/(2v)] is evaluated in the arc variable
    u = v*t and divided by v, so D_fixed(v) * v does not depend on v.
    """
    u_end = geometry.half_length if u_end is None else u_end
    integral = spatial_rate_integral(
        geometry.d0, geometry.half_length, budget, model, ptx_dbm, u_start, u_end
    )
    return integral / geometry.v


def cross_check_data_integral(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    model: SnrModel,
    ptx_dbm: Dbm,
    points: int = 100_001,
) -> CrossCheck:
    """D_fixed from adaptive quadrature against a dense trapezoid rule over the half-cell."""
    integrand = _rate_integrand(geometry.d0, geometry.half_length, budget, model, ptx_dbm)
    return cross_check(
        lambda u: integrand(u) / geometry.v,
        0.0,
        geometry.half_length,
        data_integral_constant_power(geometry, budget, model, ptx_dbm),
        points=points,
    )


def required_data(
    geometry: NetworkGeometry,
    plan: SegmentPlan,
    budget: LinkBudget,
    model: SnrModel,
    ptx_dbm: Dbm,
) -> DataBudget:
    """D_fixed at constant reference power plus the midpoint estimate of each segment."""
    d_fixed = data_integral_constant_power(geometry, budget, model, ptx_dbm)
    per_segment = tuple(
        data_segment_midpoint(geometry, plan, budget, model, ptx_dbm, i)
        for i in range(1, plan.n_segments + 1)
    )
    return DataBudget(d_fixed=d_fixed, mode=model, per_segment=per_segment)


def data_total_midpoint(
    geometry: NetworkGeometry,
    plan: SegmentPlan,
    budget: LinkBudget,
    model: SnrModel,
    allocation: Union[Sequence[Dbm], "PowerAllocationLike"],
) -> float:
    """Sum of midpoint-rule data, segment i transmitted at the allocation's i-th power."""
    powers_dbm = getattr(allocation, "powers_dbm", allocation)
    allocation_mode = getattr(allocation, "mode", model)
    if allocation_mode is not model:
        raise ModeMismatchError(
            f"allocation was built in {allocation_mode.value} mode but evaluated in {model.value} mode"
        )
    if len(powers_dbm) != plan.n_segments:
        raise DomainError(
            f"allocation has {len(powers_dbm)} powers for a plan of {plan.n_segments} segments"
        )
    return float(sum(
        data_segment_midpoint(geometry, plan, budget, model, power, i)
        for i, power in enumerate(powers_dbm, start=1)
    ))
