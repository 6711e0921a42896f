"""Text reports for the ``limit`` and ``allocate`` subcommands.

Both print a human-readable report and return the underlying rows so the
CLI can also write them as CSV.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List

import pandas as pd

from model.allocation import PowerAllocation, allocate_closed_form, allocate_oracle, constraint_residual
from model.errors import ConfigError, RailPowerError
from model.geometry import segment_plan
from model.limits import convergence_ladder, limit_energy, limit_energy_exact
from model.link import SnrModel
from model.schemes import reference_data
from model.traffic import cross_check_data_integral
from utils.logger import get_logger, log_with_context
from utils.run_config import RunConfig

logger = get_logger(__name__)

LIMIT_COLUMNS = ("dl", "v", "P_ref_dbm", "D_fixed", "N", "energy", "gap_to_exact", "gap_to_derived")
ALLOCATION_COLUMNS = (
    "P_ref_dbm",
    "allocator",
    "segment",
    "dwell_time",
    "midpoint_distance",
    "power_dbm",
    "constraint_residual",
)


@dataclass(frozen=True)
class Report:
    text: str
    rows: List[Dict[str, Any]]
    error_count: int = 0
    warnings: List[str] = field(default_factory=list)


def _table(rows: List[Dict[str, Any]], columns) -> str:
    frame = pd.DataFrame(rows, columns=list(columns))
    return frame.to_string(index=False, float_format=lambda x: f"{x:.6g}")


def run_limit_cmd(config: RunConfig, max_segments: int = 2048) -> Report:
    """Derived, exact and (optionally) printed infinite-segment energies with the E(N) ladder."""
    if config.mode is not SnrModel.PAPER_LITERAL:
        raise ConfigError("the limit report needs mode = paper-literal", key="mode")

    budget = config.link_budget()
    blocks: List[str] = []
    rows: List[Dict[str, Any]] = []
    warnings: List[str] = []
    errors = 0
    for var, value in config.sweep_points():
        for p_ref in config.p_ref:
            header = f"{var} = {value:.6g}, P_ref = {p_ref:g} dBm"
            try:
                geometry = config.geometry_at(var, value)
                header = f"dl = {geometry.dl:g} m, v = {geometry.v:.6g} m/s, P_ref = {p_ref:g} dBm"
                d_fixed = reference_data(geometry, budget, config.mode, p_ref)
                derived = limit_energy(geometry, budget, d_fixed)
                exact = limit_energy_exact(geometry, budget, d_fixed)
                ladder = convergence_ladder(geometry, budget, d_fixed, reference=exact, max_segments=max_segments)
                check = cross_check_data_integral(geometry, budget, config.mode, p_ref)
            except RailPowerError as e:
                log_with_context(
                    logger, "warning", "Limit evaluation failed",
                    sweep_var=var, value=value, p_ref_dbm=p_ref, error=str(e),
                )
                blocks.append(f"{header}\n  error: {type(e).__name__}: {e}")
                errors += 1
                continue

            lines = [
                header,
                f"  D_fixed                       {d_fixed.d_fixed:.10g}",
                f"  D_fixed trapezoid gap         {check.relative_gap:.3e}" + ("" if check.agrees else "  (disagrees)"),
                f"  E_inf derived (closed form)   {derived:.10g}",
                f"  E_inf exact limit             {exact:.10g}",
            ]
            if not check.agrees:
                warnings.append(f"{header}: D_fixed cross-check gap {check.relative_gap:.3e}")
            if config.eq40_as_printed:
                printed = limit_energy(geometry, budget, d_fixed, as_printed=True)
                lines.append(f"  E_inf printed form            {printed:.10g}")
                lines.append(f"  derived vs printed: printed / derived = {printed / derived:.6g}")

            point_rows = []
            for entry in ladder:
                point_rows.append({
                    "dl": geometry.dl,
                    "v": geometry.v,
                    "P_ref_dbm": p_ref,
                    "D_fixed": d_fixed.d_fixed,
                    "N": entry.n_segments,
                    "energy": entry.energy,
                    "gap_to_exact": entry.relative_gap,
                    "gap_to_derived": (entry.energy - derived) / abs(derived) if derived else float("nan"),
                })
            lines.append(_table(point_rows, ("N", "energy", "gap_to_exact", "gap_to_derived")))
            rows.extend(point_rows)
            blocks.append("\n".join(lines))
    return Report(text="\n\n".join(blocks) + "\n", rows=rows, error_count=errors, warnings=warnings)


def _allocation_rows(
    p_ref: float,
    name: str,
    plan,
    allocation: PowerAllocation,
    residual: float,
) -> List[Dict[str, Any]]:
    return [
        {
            "P_ref_dbm": p_ref,
            "allocator": name,
            "segment": i,
            "dwell_time": a,
            "midpoint_distance": d,
            "power_dbm": p,
            "constraint_residual": residual,
        }
        for i, (a, d, p) in enumerate(
            zip(plan.dwell_times, plan.midpoint_distances, allocation.powers_dbm), start=1
        )
    ]


def run_allocate_cmd(config: RunConfig) -> Report:
    """Per-segment powers at the configured operating point.

    The closed-form allocation is always shown; in physical mode the
    water-filling optimum is shown next to it.
    """
    budget = config.link_budget()
    geometry = config.geometry()
    plan = segment_plan(geometry)
    blocks: List[str] = []
    rows: List[Dict[str, Any]] = []
    errors = 0

    for p_ref in config.p_ref:
        header = (
            f"dl = {geometry.dl:g} m, v = {geometry.v:.6g} m/s, N = {geometry.n_segments}, "
            f"P_ref = {p_ref:g} dBm, mode = {config.mode.value}"
        )
        try:
            d_fixed = reference_data(geometry, budget, config.mode, p_ref)
            allocators = [("closed-form", allocate_closed_form(plan, budget, d_fixed, config.mode))]
            if config.mode is SnrModel.PHYSICAL:
                allocators.append(("oracle", allocate_oracle(plan, budget, d_fixed, config.mode)))
        except RailPowerError as e:
            log_with_context(logger, "warning", "Allocation failed", p_ref_dbm=p_ref, error=str(e))
            blocks.append(f"{header}\n  error: {type(e).__name__}: {e}")
            errors += 1
            continue

        lines = [header, f"  D_fixed = {d_fixed.d_fixed:.10g}"]
        for name, allocation in allocators:
            residual = constraint_residual(plan, budget, allocation, d_fixed.d_fixed)
            allocation_rows = _allocation_rows(p_ref, name, plan, allocation, residual)
            rows.extend(allocation_rows)
            flags = f", warnings: {', '.join(allocation.warnings)}" if allocation.warnings else ""
            lines.append(f"  {name}: constraint residual {residual:.3e}{flags}")
            lines.append(_table(allocation_rows, ("segment", "dwell_time", "midpoint_distance", "power_dbm")))
        blocks.append("\n".join(lines))
    return Report(text="\n\n".join(blocks) + "\n", rows=rows, error_count=errors)
