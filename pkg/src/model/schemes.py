"""The power-control schemes compared at one operating point.

Every scheme at an operating point consumes the same D_fixed: the exact
data a constant transmitter at the reference power delivers over the
half-cell.
"""

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from model.allocation import (
    PowerAllocation,
    Scheme,
    SCHEME_ORDER,
    allocate_closed_form,
    allocate_oracle,
    energy_of,
)
from model.errors import RailPowerError
from model.geometry import NetworkGeometry, SegmentPlan, segment_plan
from model.limits import LimitForm, limit_energy_for_form
from model.link import LinkBudget, SnrModel
from model.traffic import (
    DataBudget,
    data_integral_constant_power,
    data_total_midpoint,
    requirement_value,
)
from model.units import Dbm, dbm_to_watts
from utils.logger import get_logger, log_with_context

logger = get_logger(__name__)

DEFAULT_SCHEMES: Tuple[Scheme, ...] = (Scheme.MCTP, Scheme.OTPA, Scheme.MTPA, Scheme.OTPA_INF)


@dataclass(frozen=True)
class OperatingPoint:
    dl: float
    v: float
    p_ref_dbm: Dbm
    n_segments: int


@dataclass(frozen=True)
class BeamInterval:
    """Arc interval [u_start, u_end] served at one power, in planned coordinates."""
    u_start: float
    u_end: float
    power_dbm: Dbm


@dataclass(frozen=True)
class SchemeResult:
    scheme: Scheme
    mode: SnrModel
    operating_point: OperatingPoint
    energy: float
    data: float
    energy_efficiency: float
    allocation: Optional[PowerAllocation] = None
    schedule: Tuple[BeamInterval, ...] = field(default_factory=tuple)
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    @classmethod
    def build(
        cls,
        scheme: Scheme,
        mode: SnrModel,
        point: OperatingPoint,
        energy: float,
        data: float,
        allocation: Optional[PowerAllocation] = None,
        schedule: Tuple[BeamInterval, ...] = (),
        warnings: Tuple[str, ...] = (),
    ) -> "SchemeResult":
        efficiency = data / energy if energy != 0.0 else math.nan
        return cls(
            scheme=scheme,
            mode=mode,
            operating_point=point,
            energy=energy,
            data=data,
            energy_efficiency=efficiency,
            allocation=allocation,
            schedule=tuple(schedule),
            warnings=tuple(warnings),
        )

    def full_cell(self) -> "SchemeResult":
        """Both half-cells; the cell is symmetric about broadside so EE is unchanged."""
        return SchemeResult.build(
            self.scheme,
            self.mode,
            self.operating_point,
            2.0 * self.energy,
            2.0 * self.data,
            allocation=self.allocation,
            schedule=self.schedule,
            warnings=self.warnings,
        )


@dataclass(frozen=True)
class SchemeOutcome:
    """A scheme's result, or the reason it could not be evaluated."""
    scheme: Scheme
    result: Optional[SchemeResult] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.result is not None


def constant_power_energy(mode: SnrModel, p_dbm: Dbm, duration: float) -> float:
    """Energy of transmitting ``p_dbm`` for ``duration`` seconds."""
    if mode is SnrModel.PAPER_LITERAL:
        return p_dbm * duration
    return dbm_to_watts(p_dbm) * duration


def reference_data(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    mode: SnrModel,
    p_ref: Dbm,
) -> DataBudget:
    """D_fixed: exact data of constant power ``p_ref`` over the half-cell."""
    return DataBudget(
        d_fixed=data_integral_constant_power(geometry, budget, mode, p_ref),
        mode=mode,
    )


def _point(geometry: NetworkGeometry, p_ref: Dbm, n_segments: int) -> OperatingPoint:
    return OperatingPoint(dl=geometry.dl, v=geometry.v, p_ref_dbm=p_ref, n_segments=n_segments)


def _beam_schedule(plan: SegmentPlan, powers: Sequence[Dbm], offset: float = 0.0) -> Tuple[BeamInterval, ...]:
    ends = np.cumsum(plan.widths) + offset
    starts = np.concatenate(([offset], ends[:-1]))
    return tuple(
        BeamInterval(float(s), float(e), Dbm(float(p))) for s, e, p in zip(starts, ends, powers)
    )


def scheme_mctp(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    mode: SnrModel,
    p_const: Dbm,
    d_fixed: Optional[Union[float, DataBudget]] = None,
) -> SchemeResult:
    """Maintain constant transmission power over the whole half-cell.

    ``d_fixed`` is only a shortcut for the data when it was already computed
    at ``p_const``.
    """
    if d_fixed is None:
        data = data_integral_constant_power(geometry, budget, mode, p_const)
    else:
        data = requirement_value(d_fixed, mode)
    energy = constant_power_energy(mode, p_const, geometry.traversal_time)
    return SchemeResult.build(
        Scheme.MCTP,
        mode,
        _point(geometry, p_const, geometry.n_segments),
        energy,
        data,
        schedule=(BeamInterval(0.0, geometry.half_length, p_const),),
    )


def scheme_otpa(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    mode: SnrModel,
    p_ref: Dbm,
    n_segments: Optional[int] = None,
    d_fixed: Optional[Union[float, DataBudget]] = None,
) -> SchemeResult:
    """Closed-form equal-data allocation over N beams."""
    n = geometry.n_segments if n_segments is None else n_segments
    geometry = geometry.with_segments(n)
    required = reference_data(geometry, budget, mode, p_ref) if d_fixed is None else d_fixed
    plan = segment_plan(geometry)
    allocation = allocate_closed_form(plan, budget, required, mode, scheme=Scheme.OTPA)
    return SchemeResult.build(
        Scheme.OTPA,
        mode,
        _point(geometry, p_ref, n),
        energy_of(plan, allocation),
        data_total_midpoint(geometry, plan, budget, mode, allocation),
        allocation=allocation,
        schedule=_beam_schedule(plan, allocation.powers_dbm),
        warnings=allocation.warnings,
    )


def scheme_mtpa(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    mode: SnrModel,
    p_const: Dbm,
    n_segments: Optional[int] = None,
    d_fixed: Optional[Union[float, DataBudget]] = None,
) -> SchemeResult:
    """Constant power over [0, dl/4], closed-form allocation over [dl/4, dl/2].

    The optimized part gets a fresh plan of N segments over its own range,
    which is the half-cell of a cell of length dl/2 with the same d0.
    """
    n = geometry.n_segments if n_segments is None else n_segments
    geometry = geometry.with_segments(n)
    required = requirement_value(
        reference_data(geometry, budget, mode, p_const) if d_fixed is None else d_fixed, mode
    )
    quarter = geometry.dl / 4.0

    first_data = data_integral_constant_power(geometry, budget, mode, p_const, 0.0, quarter)
    first_energy = constant_power_energy(mode, p_const, quarter / geometry.v)

    residual = required - first_data
    if residual < 0.0:
        log_with_context(
            logger,
            "debug",
            "First quarter over-delivers; residual requirement clamped to zero",
            first_quarter_data=first_data,
            d_fixed=required,
        )
        residual = 0.0

    second = NetworkGeometry(d0=geometry.d0, dl=geometry.dl / 2.0, n_segments=n, v=geometry.v)
    plan = segment_plan(second)
    allocation = allocate_closed_form(plan, budget, residual, mode, scheme=Scheme.MTPA)
    second_energy = energy_of(plan, allocation)
    second_data = data_total_midpoint(second, plan, budget, mode, allocation)

    schedule = (BeamInterval(0.0, quarter, p_const),) + _beam_schedule(
        plan, allocation.powers_dbm, offset=quarter
    )
    return SchemeResult.build(
        Scheme.MTPA,
        mode,
        _point(geometry, p_const, n),
        first_energy + second_energy,
        first_data + second_data,
        allocation=allocation,
        schedule=schedule,
        warnings=allocation.warnings,
    )


def scheme_otpa_inf(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    mode: SnrModel,
    p_ref: Dbm,
    d_fixed: Optional[Union[float, DataBudget]] = None,
    limit_form: LimitForm = LimitForm.EXACT,
) -> SchemeResult:
    """OTPA with infinitely many beams; the constraint is met exactly so data is D_fixed."""
    required = reference_data(geometry, budget, mode, p_ref) if d_fixed is None else d_fixed
    energy = limit_energy_for_form(geometry, budget, required, limit_form, mode)
    return SchemeResult.build(
        Scheme.OTPA_INF,
        mode,
        _point(geometry, p_ref, geometry.n_segments),
        energy,
        requirement_value(required, mode),
    )


def scheme_oracle(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    mode: SnrModel,
    p_ref: Dbm,
    n_segments: Optional[int] = None,
    d_fixed: Optional[Union[float, DataBudget]] = None,
) -> SchemeResult:
    """Water-filling optimum of the dwell-weighted program (physical mode)."""
    n = geometry.n_segments if n_segments is None else n_segments
    geometry = geometry.with_segments(n)
    required = reference_data(geometry, budget, mode, p_ref) if d_fixed is None else d_fixed
    plan = segment_plan(geometry)
    allocation = allocate_oracle(plan, budget, required, mode)
    return SchemeResult.build(
        Scheme.ORACLE,
        mode,
        _point(geometry, p_ref, n),
        energy_of(plan, allocation),
        data_total_midpoint(geometry, plan, budget, mode, allocation),
        allocation=allocation,
        schedule=_beam_schedule(plan, allocation.powers_dbm),
    )


def evaluate_scheme(
    scheme: Scheme,
    geometry: NetworkGeometry,
    budget: LinkBudget,
    mode: SnrModel,
    p_ref: Dbm,
    d_fixed: Union[float, DataBudget],
    limit_form: LimitForm = LimitForm.EXACT,
) -> SchemeResult:
    if scheme is Scheme.MCTP:
        return scheme_mctp(geometry, budget, mode, p_ref, d_fixed=d_fixed)
    if scheme is Scheme.OTPA:
        return scheme_otpa(geometry, budget, mode, p_ref, d_fixed=d_fixed)
    if scheme is Scheme.MTPA:
        return scheme_mtpa(geometry, budget, mode, p_ref, d_fixed=d_fixed)
    if scheme is Scheme.OTPA_INF:
        return scheme_otpa_inf(geometry, budget, mode, p_ref, d_fixed=d_fixed, limit_form=limit_form)
    return scheme_oracle(geometry, budget, mode, p_ref, d_fixed=d_fixed)


def ordered_schemes(schemes: Iterable[Scheme]) -> List[Scheme]:
    selected = set(schemes)
    return [s for s in SCHEME_ORDER if s in selected]


def evaluate_schemes(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    mode: SnrModel,
    p_ref: Dbm,
    schemes: Iterable[Scheme] = DEFAULT_SCHEMES,
    limit_form: LimitForm = LimitForm.EXACT,
) -> List[SchemeOutcome]:
    """Evaluate the selected schemes in the fixed scheme order, sharing one D_fixed.

    A scheme that fails yields an outcome carrying the error message; the
    remaining schemes are still evaluated.
    """
    order = ordered_schemes(schemes)
    try:
        required = reference_data(geometry, budget, mode, p_ref)
    except RailPowerError as e:
        log_with_context(logger, "warning", "D_fixed could not be computed", dl=geometry.dl, v=geometry.v, error=str(e))
        return [SchemeOutcome(scheme=s, error=f"{type(e).__name__}: {e}") for s in order]

    outcomes = []
    for scheme in order:
        try:
            result = evaluate_scheme(scheme, geometry, budget, mode, p_ref, required, limit_form)
            outcomes.append(SchemeOutcome(scheme=scheme, result=result))
        except RailPowerError as e:
            log_with_context(
                logger,
                "warning",
                "Scheme evaluation failed",
                scheme=scheme.value,
                dl=geometry.dl,
                v=geometry.v,
                n_segments=geometry.n_segments,
                error=str(e),
            )
            outcomes.append(SchemeOutcome(scheme=scheme, error=f"{type(e).__name__}: {e}"))
    return outcomes


def otpa_savings(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    mode: SnrModel,
    p_ref: Dbm,
    n_values: Sequence[int] = (2, 4, 8, 16, 32),
) -> List[Tuple[int, float]]:
    """Fraction of MCTP energy OTPA saves at each N, as (N, 1 - E_otpa / E_mctp)."""
    required = reference_data(geometry, budget, mode, p_ref)
    baseline = scheme_mctp(geometry, budget, mode, p_ref, d_fixed=required).energy
    savings = []
    for n in n_values:
        energy = scheme_otpa(geometry, budget, mode, p_ref, n_segments=n, d_fixed=required).energy
        savings.append((n, 1.0 - energy / baseline))
    return savings


def closest_saving(savings: Sequence[Tuple[int, float]], target: float = 0.677) -> Tuple[int, float]:
    return min(savings, key=lambda item: abs(item[1] - target))
