import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from model.errors import DomainError
from model.units import Meters, Radians, Seconds


@dataclass(frozen=True)
class NetworkGeometry:
    """Scenario under study: one BS beside a straight track.

    Only the half-cell between the cell edge and the broadside point is
    modelled; it is covered by ``n_segments`` beams.
    """
    d0: float
    dl: float
    n_segments: int
    v: float

    def __post_init__(self):
        if not (self.d0 > 0 and math.isfinite(self.d0)):
            raise DomainError(f"d0 must be positive and finite, got {self.d0}")
        if not (self.dl > 0 and math.isfinite(self.dl)):
            raise DomainError(f"dl must be positive and finite, got {self.dl}")
        if not (self.v > 0 and math.isfinite(self.v)):
            raise DomainError(f"v must be positive and finite, got {self.v}")
        if isinstance(self.n_segments, bool) or int(self.n_segments) != self.n_segments or self.n_segments < 1:
            raise DomainError(f"n_segments must be a positive integer, got {self.n_segments}")

    @property
    def half_length(self) -> Meters:
        return Meters(self.dl / 2.0)

    @property
    def traversal_time(self) -> Seconds:
        return Seconds(self.dl / (2.0 * self.v))

    def with_speed(self, v: float) -> "NetworkGeometry":
        return replace(self, v=v)

    def with_segments(self, n_segments: int) -> "NetworkGeometry":
        return replace(self, n_segments=n_segments)


@dataclass(frozen=True)
class SegmentPlan:
    """Per-segment decomposition of the half-cell, segment 1 at the cell edge."""
    widths: Tuple[float, ...]
    midpoint_distances: Tuple[float, ...]
    dwell_times: Tuple[float, ...]
    beam_angle: float

    def __post_init__(self):
        n = len(self.widths)
        if n == 0:
            raise DomainError("a segment plan needs at least one segment")
        if len(self.midpoint_distances) != n or len(self.dwell_times) != n:
            raise DomainError("widths, midpoint_distances and dwell_times must have equal length")
        if any(w <= 0 for w in self.widths) or any(d <= 0 for d in self.midpoint_distances):
            raise DomainError("segment widths and midpoint distances must be positive")

    @property
    def n_segments(self) -> int:
        return len(self.widths)

    @property
    def boundaries(self) -> Tuple[float, ...]:
        """Arc positions of the segment ends, measured from the cell edge."""
        return tuple(float(x) for x in np.cumsum(self.widths))

    def switch_times(self, v: float) -> Tuple[float, ...]:
        """Beam switching instants for a train predicted to move at ``v``."""
        return tuple(b / v for b in self.boundaries)


def beam_angle(geometry: NetworkGeometry) -> Radians:
    return Radians(math.atan(geometry.dl / (2.0 * geometry.d0)) / geometry.n_segments)


def plan_from_angle(
    d0: float,
    half_length: float,
    n_segments: int,
    theta: float,
    v: float,
) -> SegmentPlan:
    if n_segments < 1:
        raise DomainError(f"n_segments must be >= 1, got {n_segments}")
    if not theta > 0 or n_segments * theta >= math.pi / 2:
        raise DomainError(
            f"beam angle {theta} rad with N={n_segments} does not fit in a quarter turn"
        )

    index = np.arange(1, n_segments + 1)
    widths = d0 * (np.tan((n_segments + 1 - index) * theta) - np.tan((n_segments - index) * theta))
    before = np.concatenate(([0.0], np.cumsum(widths)[:-1]))
    offsets = half_length - before - widths / 2.0
    midpoints = np.sqrt(offsets ** 2 + d0 ** 2)
    dwell = widths / v

    return SegmentPlan(
        widths=tuple(float(w) for w in widths),
        midpoint_distances=tuple(float(m) for m in midpoints),
        dwell_times=tuple(float(a) for a in dwell),
        beam_angle=float(theta),
    )


def segment_plan(geometry: NetworkGeometry) -> SegmentPlan:
    return plan_from_angle(
        geometry.d0,
        geometry.half_length,
        geometry.n_segments,
        beam_angle(geometry),
        geometry.v,
    )


def position_at(v: float, t: float, x0: float = 0.0, t0: float = 0.0) -> Meters:
    return Meters(v * (t - t0) + x0)


def distance_at_time(geometry: NetworkGeometry, t: float) -> Meters:
    """BS-to-train distance, the train entering the half-cell at the cell edge at t = 0."""
    along = geometry.half_length - position_at(geometry.v, t)
    return Meters(math.sqrt(geometry.d0 ** 2 + along ** 2))


def distance_along_track(d0: float, half_length: float, u: np.ndarray) -> np.ndarray:
    """Vectorised BS distance at arc position ``u`` measured from the cell edge."""
    return np.sqrt(d0 ** 2 + (half_length - u) ** 2)

