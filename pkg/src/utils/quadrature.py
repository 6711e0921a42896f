"""Numerical integration used by the data and limit computations.

``adaptive_simpson`` refines all unconverged panels of a level at once, so
integrands are evaluated on numpy arrays instead of one point per call.
"""

from collections.abc import Callable
from dataclasses import dataclass
from typing import Optional

import numpy as np

from model.errors import ConvergenceError, DomainError
from utils.config import settings
from utils.logger import get_logger, log_with_context

logger = get_logger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]

INITIAL_PANELS = 16


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def _simpson(width: np.ndarray, f_lo: np.ndarray, f_mid: np.ndarray, f_hi: np.ndarray) -> np.ndarray:
    return width / 6.0 * (f_lo + 4.0 * f_mid + f_hi)


def adaptive_simpson(
    f: Integrand,
    a: float,
    b: float,
    rel_tol: Optional[float] = None,
    abs_tol: float = 1e-300,
    max_evals: Optional[int] = None,
) -> QuadratureResult:
    """Integrate ``f`` over [a, b] with adaptive Simpson's rule.

    A panel is accepted when the two-half Simpson estimate differs from the
    whole-panel estimate by at most 15 times its share of the tolerance;
    accepted panels get the Richardson correction. The tolerance share is
    proportional to panel width.

    Args:
        f: Vectorised integrand.
        a: Lower bound.
        b: Upper bound.
        rel_tol: Relative tolerance on the whole integral.
        abs_tol: Absolute floor on the tolerance (integrals near zero).
        max_evals: Integrand evaluation cap.

    Returns:
        QuadratureResult with the integral, error estimate and evaluation count.

    Raises:
        ConvergenceError: If the evaluation cap is reached.
    """
    rel_tol = settings.quadrature_rel_tol if rel_tol is None else rel_tol
    max_evals = settings.quadrature_max_evals if max_evals is None else max_evals

    if not (np.isfinite(a) and np.isfinite(b)):
        raise DomainError(f"integration bounds must be finite, got [{a}, {b}]")
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)
    if b < a:
        flipped = adaptive_simpson(f, b, a, rel_tol, abs_tol, max_evals)
        return QuadratureResult(-flipped.value, flipped.error_estimate, flipped.evaluations)

    span = b - a
    edges = np.linspace(a, b, INITIAL_PANELS + 1)
    lo = edges[:-1]
    hi = edges[1:]
    mid = 0.5 * (lo + hi)
    f_edges = np.asarray(f(edges), dtype=float)
    f_lo = f_edges[:-1]
    f_hi = f_edges[1:]
    f_mid = np.asarray(f(mid), dtype=float)
    whole = _simpson(hi - lo, f_lo, f_mid, f_hi)
    evaluations = edges.size + mid.size

    total = 0.0
    error = 0.0
    while lo.size:
        left_q = 0.5 * (lo + mid)
        right_q = 0.5 * (mid + hi)
        f_lq = np.asarray(f(left_q), dtype=float)
        f_rq = np.asarray(f(right_q), dtype=float)
        evaluations += 2 * lo.size

        left = _simpson(mid - lo, f_lo, f_lq, f_mid)
        right = _simpson(hi - mid, f_mid, f_rq, f_hi)
        delta = left + right - whole

        scale = abs(total + float(np.sum(left + right)))
        tolerance = max(rel_tol * scale, abs_tol) * (hi - lo) / span
        done = np.abs(delta) <= 15.0 * tolerance

        if not np.all(np.isfinite(delta)):
            raise DomainError("integrand produced a non-finite value")

        total += float(np.sum(left[done] + right[done] + delta[done] / 15.0))
        error += float(np.sum(np.abs(delta[done]))) / 15.0

        pending = ~done
        if not np.any(pending):
            break
        if evaluations >= max_evals:
            raise ConvergenceError(
                f"adaptive Simpson did not reach rel_tol={rel_tol} within {max_evals} evaluations "
                f"({int(np.count_nonzero(pending))} panels unconverged)"
            )

        lo, mid_p, hi = lo[pending], mid[pending], hi[pending]
        f_lo_p, f_mid_p, f_hi_p = f_lo[pending], f_mid[pending], f_hi[pending]
        f_lq_p, f_rq_p = f_lq[pending], f_rq[pending]
        left_p, right_p = left[pending], right[pending]

        lo = np.concatenate([lo, mid_p])
        hi = np.concatenate([mid_p, hi])
        mid = 0.5 * (lo + hi)
        f_lo = np.concatenate([f_lo_p, f_mid_p])
        f_hi = np.concatenate([f_mid_p, f_hi_p])
        f_mid = np.concatenate([f_lq_p, f_rq_p])
        whole = np.concatenate([left_p, right_p])

    return QuadratureResult(total, error, evaluations)


def trapezoid_cross_check(f: Integrand, a: float, b: float, points: int = 1_000_000) -> float:
    """Composite trapezoid rule on a uniform grid, used to certify quadrature results."""
    grid = np.linspace(a, b, points)
    return float(np.trapezoid(f(grid), grid))


@dataclass(frozen=True)
class CrossCheck:
    quadrature: float
    trapezoid: float
    relative_gap: float
    agrees: bool


def cross_check(
    f: Integrand,
    a: float,
    b: float,
    value: float,
    rel_tol: float = 1e-6,
    points: int = 100_001,
) -> CrossCheck:
    """Compare a quadrature ``value`` for f over [a, b] with the trapezoid rule.

    A relative gap above ``rel_tol`` is logged at WARNING and reported with
    ``agrees=False``; it is never raised.
    """
    reference = trapezoid_cross_check(f, a, b, points)
    scale = max(abs(value), abs(reference))
    gap = abs(value - reference) / scale if scale > 0 else 0.0
    agrees = gap <= rel_tol
    if not agrees:
        log_with_context(
            logger,
            "warning",
            "Quadrature cross-check disagrees",
            a=a,
            b=b,
            quadrature=value,
            trapezoid=reference,
            relative_gap=gap,
        )
    return CrossCheck(value, reference, gap, agrees)
