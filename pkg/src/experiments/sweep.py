import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from model.allocation import Scheme
from model.errors import RailPowerError
from model.geometry import NetworkGeometry
from model.schemes import SchemeOutcome, evaluate_schemes
from model.units import Dbm
from utils.logger import get_logger, log_performance_metric, log_with_context
from utils.run_config import RunConfig

logger = get_logger(__name__)

SWEEP_COLUMNS = (
    "sweep_var",
    "value",
    "scheme",
    "mode",
    "N",
    "P_ref_dbm",
    "energy",
    "data",
    "energy_efficiency",
    "warnings_count",
    "error",
)


@dataclass(frozen=True)
class SweepReport:
    rows: List[Dict[str, Any]]
    error_count: int


def segments_label(scheme: Scheme, n_segments: int) -> Any:
    return "inf" if scheme is Scheme.OTPA_INF else n_segments


def point_segments(config: RunConfig, var: str, value: float) -> int:
    return int(value) if var == "n_segments" else config.n_segments


def outcome_row(
    sweep_var: str,
    value: float,
    geometry: NetworkGeometry,
    config: RunConfig,
    p_ref: float,
    outcome: SchemeOutcome,
) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        "sweep_var": sweep_var,
        "value": value,
        "scheme": outcome.scheme.value,
        "mode": config.mode.value,
        "N": segments_label(outcome.scheme, geometry.n_segments),
        "P_ref_dbm": p_ref,
    }
    if outcome.ok:
        result = outcome.result
        row.update(
            energy=result.energy,
            data=result.data,
            energy_efficiency=result.energy_efficiency,
            warnings_count=len(result.warnings),
            error="",
        )
    else:
        row.update(warnings_count=0, error=outcome.error)
    return row


def failed_point_rows(
    var: str,
    value: float,
    config: RunConfig,
    p_ref: float,
    error: RailPowerError,
) -> List[Dict[str, Any]]:
    """One error row per requested scheme for a point whose geometry could not be built."""
    n_segments = point_segments(config, var, value)
    message = f"{type(error).__name__}: {error}"
    return [
        {
            "sweep_var": var,
            "value": value,
            "scheme": scheme.value,
            "mode": config.mode.value,
            "N": segments_label(scheme, n_segments),
            "P_ref_dbm": p_ref,
            "warnings_count": 0,
            "error": message,
        }
        for scheme in config.schemes
    ]


def run_sweep(config: RunConfig, workers: Optional[int] = None) -> SweepReport:
    """One row per (sweep point, reference power, scheme).

    Rows are ordered by sweep value, then reference power, then the fixed
    scheme order, whatever the number of workers. A point the model rejects
    still yields its rows, each carrying the error.
    """
    workers = config.workers if workers is None else workers
    budget = config.link_budget()
    tasks: List[Tuple[str, float, Dbm]] = [
        (var, value, p_ref)
        for var, value in config.sweep_points()
        for p_ref in config.p_ref
    ]
    start = time.time()

    def evaluate(task: Tuple[str, float, Dbm]) -> List[Dict[str, Any]]:
        var, value, p_ref = task
        try:
            geometry = config.geometry_at(var, value)
        except RailPowerError as e:
            log_with_context(logger, "warning", "Sweep point rejected", sweep_var=var, value=value, error=str(e))
            return failed_point_rows(var, value, config, p_ref, e)
        outcomes = evaluate_schemes(geometry, budget, config.mode, p_ref, config.schemes, config.limit_form)
        return [outcome_row(var, value, geometry, config, p_ref, outcome) for outcome in outcomes]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            grouped = list(executor.map(evaluate, tasks))
    else:
        grouped = [evaluate(task) for task in tasks]

    rows = [row for group in grouped for row in group]
    errors = sum(1 for row in rows if row["error"])
    log_performance_metric(
        logger,
        "run_sweep",
        (time.time() - start) * 1000,
        errors == 0,
        points=len(tasks),
        rows=len(rows),
        error_rows=errors,
        workers=workers,
    )
    return SweepReport(rows=rows, error_count=errors)
