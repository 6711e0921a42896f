"""Scheme evaluation under Gaussian velocity-estimation error.

The system plans with the estimated speed v_hat (segment schedule, D_fixed
and powers) and experiences the true speed: beam i stays on from
t_{i-1} = b_{i-1}/v_hat to t_i = b_i/v_hat while the train is actually at
v*t. Energy is what the plan spends; data is what the true trajectory
collects.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from model.allocation import Scheme
from model.errors import ConvergenceError, DomainError, RailPowerError
from model.geometry import NetworkGeometry
from model.limits import LimitForm
from model.link import LinkBudget, SnrModel
from model.schemes import (
    DEFAULT_SCHEMES,
    SchemeOutcome,
    SchemeResult,
    evaluate_schemes,
    ordered_schemes,
)
from model.traffic import spatial_rate_integral
from model.units import Dbm
from utils.config import settings
from utils.logger import get_logger, log_performance_metric, log_with_context

logger = get_logger(__name__)

CI95_Z = 1.96


@dataclass(frozen=True)
class VelocityErrorModel:
    sigma_v: float
    seed: int
    trials: int

    def __post_init__(self):
        if not (self.sigma_v >= 0 and math.isfinite(self.sigma_v)):
            raise DomainError(f"sigma_v must be finite and >= 0, got {self.sigma_v}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    v_hat: float
    outcomes: Tuple[SchemeOutcome, ...] = field(default_factory=tuple)
    error: Optional[str] = None


@dataclass(frozen=True)
class Moments:
    mean: float
    std: float
    ci95_low: float
    ci95_high: float


@dataclass(frozen=True)
class SchemeStatistics:
    scheme: Scheme
    successful_trials: int
    failed_trials: int
    flagged_trials: int
    energy: Moments
    data: Moments
    energy_efficiency: Moments
    first_error: Optional[str] = None


@dataclass(frozen=True)
class MonteCarloSummary:
    model: VelocityErrorModel
    geometry: NetworkGeometry
    mode: SnrModel
    p_ref_dbm: Dbm
    statistics: Tuple[SchemeStatistics, ...]
    failed_trials: int

    def for_scheme(self, scheme: Scheme) -> SchemeStatistics:
        for stats in self.statistics:
            if stats.scheme is scheme:
                return stats
        raise KeyError(scheme.value)


def _trial_generator(model: VelocityErrorModel, trial: int) -> np.random.Generator:
    # one Philox stream per (seed, trial): key = trial in the high word, seed in the low word
    return np.random.Generator(np.random.Philox(key=(trial << 64) | model.seed))


def sample_velocity(
    model: VelocityErrorModel,
    v_true: float,
    trial: int,
    max_resamples: Optional[int] = None,
) -> float:
    """Estimated speed v_true + e, e ~ N(0, sigma_v^2), redrawn while it is not positive."""
    if not v_true > 0:
        raise DomainError(f"v_true must be positive, got {v_true}")
    if not 0 <= trial < 2 ** 64:
        raise DomainError(f"trial index must be a 64-bit unsigned integer, got {trial}")
    if model.sigma_v == 0.0:
        return v_true

    max_resamples = settings.velocity_max_resamples if max_resamples is None else max_resamples
    rng = _trial_generator(model, trial)
    for _ in range(max_resamples + 1):
        v_hat = v_true + float(rng.normal(0.0, model.sigma_v))
        if v_hat > 0.0:
            return v_hat
    raise ConvergenceError(
        f"no positive speed estimate after {max_resamples} resamples "
        f"(sigma_v={model.sigma_v} against v={v_true})"
    )


def sample_velocities(model: VelocityErrorModel, v_true: float) -> np.ndarray:
    return np.array([sample_velocity(model, v_true, trial) for trial in range(model.trials)])


def _realized(result: SchemeResult, geometry: NetworkGeometry, budget: LinkBudget, v_hat: float) -> SchemeResult:
    """Replace planned data with the data collected along the true trajectory.

    Each beam interval gets the difference between its exact integral along
    the true path and along the planned path; when v_hat equals the true
    speed every difference is exactly zero.
    """
    v_true = geometry.v
    stretch = v_true / v_hat
    correction = 0.0
    for beam in result.schedule:
        experienced = spatial_rate_integral(
            geometry.d0, geometry.half_length, budget, result.mode, beam.power_dbm,
            beam.u_start * stretch, beam.u_end * stretch,
        ) / v_true
        planned = spatial_rate_integral(
            geometry.d0, geometry.half_length, budget, result.mode, beam.power_dbm,
            beam.u_start, beam.u_end,
        ) / v_hat
        correction += experienced - planned
    return SchemeResult.build(
        result.scheme,
        result.mode,
        result.operating_point,
        result.energy,
        result.data + correction,
        allocation=result.allocation,
        schedule=result.schedule,
        warnings=result.warnings,
    )


def trial_evaluate(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    mode: SnrModel,
    p_ref: Dbm,
    v_hat: float,
    schemes: Iterable[Scheme] = DEFAULT_SCHEMES,
    limit_form: LimitForm = LimitForm.EXACT,
    trial_index: int = 0,
) -> TrialResult:
    """Plan every scheme at ``v_hat`` and realise it at ``geometry.v``."""
    if not v_hat > 0:
        raise DomainError(f"v_hat must be positive, got {v_hat}")
    planned = evaluate_schemes(geometry.with_speed(v_hat), budget, mode, p_ref, schemes, limit_form)
    outcomes = []
    for outcome in planned:
        if not outcome.ok:
            outcomes.append(outcome)
            continue
        try:
            outcomes.append(SchemeOutcome(outcome.scheme, _realized(outcome.result, geometry, budget, v_hat)))
        except RailPowerError as e:
            outcomes.append(SchemeOutcome(outcome.scheme, error=f"{type(e).__name__}: {e}"))
    return TrialResult(trial_index=trial_index, v_hat=v_hat, outcomes=tuple(outcomes))


def _moments(values: np.ndarray) -> Moments:
    n = values.size
    if n == 0:
        return Moments(math.nan, math.nan, math.nan, math.nan)
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if n > 1 else 0.0
    half_width = CI95_Z * std / math.sqrt(n)
    return Moments(mean, std, mean - half_width, mean + half_width)


def _scheme_statistics(scheme: Scheme, trials: List[TrialResult]) -> SchemeStatistics:
    results = []
    failed = 0
    first_error = None
    for trial in trials:
        outcome = next((o for o in trial.outcomes if o.scheme is scheme), None)
        if outcome is None or not outcome.ok:
            failed += 1
            first_error = first_error or (trial.error if outcome is None else outcome.error)
        else:
            results.append(outcome.result)
    return SchemeStatistics(
        scheme=scheme,
        successful_trials=len(results),
        failed_trials=failed,
        flagged_trials=sum(1 for r in results if r.warnings),
        energy=_moments(np.array([r.energy for r in results], dtype=float)),
        data=_moments(np.array([r.data for r in results], dtype=float)),
        energy_efficiency=_moments(np.array([r.energy_efficiency for r in results], dtype=float)),
        first_error=first_error,
    )


def run_montecarlo(
    geometry: NetworkGeometry,
    budget: LinkBudget,
    mode: SnrModel,
    model: VelocityErrorModel,
    p_ref: Dbm,
    schemes: Iterable[Scheme] = DEFAULT_SCHEMES,
    limit_form: LimitForm = LimitForm.EXACT,
    workers: Optional[int] = None,
) -> MonteCarloSummary:
    """Run ``model.trials`` independent trials and aggregate them per scheme.

    Trials are keyed by index, so the result does not depend on ``workers``.
    """
    order = ordered_schemes(schemes)
    workers = settings.workers if workers is None else workers
    start = time.time()

    def run_trial(trial: int) -> TrialResult:
        try:
            v_hat = sample_velocity(model, geometry.v, trial)
        except RailPowerError as e:
            return TrialResult(trial_index=trial, v_hat=math.nan, error=f"{type(e).__name__}: {e}")
        return trial_evaluate(geometry, budget, mode, p_ref, v_hat, order, limit_form, trial)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            trials = list(executor.map(run_trial, range(model.trials)))
    else:
        trials = [run_trial(trial) for trial in range(model.trials)]

    failed = sum(1 for t in trials if t.error is not None)
    if failed:
        log_with_context(
            logger,
            "warning",
            "Monte Carlo trials failed before evaluation",
            failed_trials=failed,
            trials=model.trials,
            sigma_v=model.sigma_v,
        )

    statistics = tuple(_scheme_statistics(scheme, trials) for scheme in order)
    flagged = {stats.scheme.value: stats.flagged_trials for stats in statistics if stats.flagged_trials}
    if flagged:
        log_with_context(
            logger,
            "warning",
            "Monte Carlo trials flagged",
            flagged_trials=flagged,
            trials=model.trials,
            p_ref=p_ref,
        )
    log_performance_metric(
        logger,
        "run_montecarlo",
        (time.time() - start) * 1000,
        failed == 0,
        trials=model.trials,
        workers=workers,
        dl=geometry.dl,
        v=geometry.v,
    )
    return MonteCarloSummary(
        model=model,
        geometry=geometry,
        mode=mode,
        p_ref_dbm=p_ref,
        statistics=statistics,
        failed_trials=failed,
    )
