from typing import Any, Dict, List, Optional

from model.errors import RailPowerError
from model.montecarlo import MonteCarloSummary, SchemeStatistics, run_montecarlo
from experiments.sweep import SweepReport, failed_point_rows, segments_label
from utils.logger import create_context_logger
from utils.run_config import RunConfig

MOMENT_FIELDS = ("mean", "std", "ci95_low", "ci95_high")

MONTECARLO_COLUMNS = (
    "sweep_var",
    "value",
    "scheme",
    "mode",
    "N",
    "P_ref_dbm",
    "sigma_v",
    "seed",
    "trials",
    "successful_trials",
    "failed_trials",
    "flagged_trials",
) + tuple(
    f"{metric}_{moment}"
    for metric in ("energy", "data", "energy_efficiency")
    for moment in MOMENT_FIELDS
) + ("error",)


def statistics_row(
    sweep_var: str,
    value: float,
    summary: MonteCarloSummary,
    stats: SchemeStatistics,
) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        "sweep_var": sweep_var,
        "value": value,
        "scheme": stats.scheme.value,
        "mode": summary.mode.value,
        "N": segments_label(stats.scheme, summary.geometry.n_segments),
        "P_ref_dbm": summary.p_ref_dbm,
        "sigma_v": summary.model.sigma_v,
        "seed": summary.model.seed,
        "trials": summary.model.trials,
        "successful_trials": stats.successful_trials,
        "failed_trials": stats.failed_trials,
        "flagged_trials": stats.flagged_trials,
        "error": "" if stats.successful_trials else (stats.first_error or "all trials failed"),
    }
    for metric in ("energy", "data", "energy_efficiency"):
        moments = getattr(stats, metric)
        for moment in MOMENT_FIELDS:
            row[f"{metric}_{moment}"] = getattr(moments, moment)
    return row


def run_montecarlo_cmd(config: RunConfig, workers: Optional[int] = None) -> SweepReport:
    """Aggregate rows per (sweep point, reference power, scheme); trials run on ``workers`` threads."""
    workers = config.workers if workers is None else workers
    budget = config.link_budget()
    rows: List[Dict[str, Any]] = []
    errors = 0
    for var, value in config.sweep_points():
        for p_ref in config.p_ref:
            log = create_context_logger(__name__, sweep_var=var, value=value, p_ref_dbm=p_ref)
            try:
                geometry = config.geometry_at(var, value)
                model = config.velocity_model(geometry.v)
            except RailPowerError as e:
                log.warning("Monte Carlo point rejected", error=str(e))
                failed = failed_point_rows(var, value, config, p_ref, e)
                rows.extend(failed)
                errors += len(failed)
                continue
            log.info("Running Monte Carlo point", sigma_v=model.sigma_v, trials=model.trials)
            summary = run_montecarlo(
                geometry, budget, config.mode, model, p_ref, config.schemes, config.limit_form, workers
            )
            for stats in summary.statistics:
                row = statistics_row(var, value, summary, stats)
                if row["error"]:
                    errors += 1
                rows.append(row)
    return SweepReport(rows=rows, error_count=errors)
