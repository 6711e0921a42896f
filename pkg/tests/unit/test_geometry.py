import math

import numpy as np
import pytest

from model.errors import DomainError
from model.geometry import (
    NetworkGeometry,
    SegmentPlan,
    beam_angle,
    distance_along_track,
    distance_at_time,
    plan_from_angle,
    position_at,
    segment_plan,
)
from tests.conftest import TABLE1_SPEED, make_geometry


class TestNetworkGeometry:
    def test_derived_lengths(self, geometry):
        assert geometry.half_length == 60.0
        assert geometry.traversal_time == pytest.approx(0.72, rel=1e-12)

    @pytest.mark.parametrize("kwargs", [
        {"d0": 0.0},
        {"d0": -5.0},
        {"dl": 0.0},
        {"v": 0.0},
        {"v": math.inf},
        {"n_segments": 0},
        {"n_segments": 2.5},
        {"n_segments": True},
    ])
    def test_rejects_invalid_values(self, kwargs):
        params = {"d0": 20.0, "dl": 120.0, "n_segments": 2, "v": 80.0}
        params.update(kwargs)
        with pytest.raises(DomainError):
            NetworkGeometry(**params)

    def test_with_helpers_keep_other_fields(self, geometry):
        faster = geometry.with_speed(100.0)
        assert faster.v == 100.0 and faster.dl == geometry.dl
        finer = geometry.with_segments(16)
        assert finer.n_segments == 16 and finer.v == geometry.v


class TestSegmentPlan:
    def test_beam_angle(self, geometry):
        assert beam_angle(geometry) == pytest.approx(0.624522886, abs=1e-9)

    def test_two_segment_fixture(self, plan):
        assert plan.widths == pytest.approx([45.584816, 14.415184], abs=1e-6)
        assert plan.midpoint_distances == pytest.approx([42.242217, 21.259101], abs=1e-6)
        assert plan.dwell_times[0] == pytest.approx(45.584816 / TABLE1_SPEED, rel=1e-7)

    def test_single_segment_covers_half_cell(self):
        plan = segment_plan(make_geometry(dl=120.0, n_segments=1))
        assert plan.widths[0] == pytest.approx(60.0, rel=1e-12)
        assert plan.midpoint_distances[0] == pytest.approx(math.hypot(20.0, 30.0), rel=1e-12)

    def test_widths_sum_and_decrease_on_random_geometries(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            d0 = rng.uniform(1.0, 100.0)
            dl = rng.uniform(1.0, 2000.0)
            n = int(rng.integers(1, 65))
            plan = segment_plan(NetworkGeometry(d0=d0, dl=dl, n_segments=n, v=50.0))
            assert sum(plan.widths) == pytest.approx(dl / 2.0, rel=1e-9)
            assert all(a > b for a, b in zip(plan.widths, plan.widths[1:]))
            assert sum(plan.dwell_times) == pytest.approx(dl / 100.0, rel=1e-9)

    def test_midpoints_approach_broadside(self):
        plan = segment_plan(make_geometry(n_segments=8))
        assert all(a > b for a, b in zip(plan.midpoint_distances, plan.midpoint_distances[1:]))
        assert plan.midpoint_distances[-1] > 20.0

    def test_switch_times_end_at_traversal(self, geometry, plan):
        times = plan.switch_times(geometry.v)
        assert times[-1] == pytest.approx(geometry.traversal_time, rel=1e-12)
        assert plan.boundaries[0] == pytest.approx(plan.widths[0])

    def test_plan_from_angle_rejects_quarter_turn(self):
        with pytest.raises(DomainError):
            plan_from_angle(20.0, 60.0, 2, math.pi / 4, 80.0)

    def test_plan_rejects_mismatched_lengths(self):
        with pytest.raises(DomainError):
            SegmentPlan(widths=(1.0, 2.0), midpoint_distances=(3.0,), dwell_times=(0.1, 0.1), beam_angle=0.1)


class TestTrajectory:
    def test_position_is_linear(self):
        assert position_at(10.0, 2.0) == 20.0
        assert position_at(10.0, 3.0, x0=5.0, t0=1.0) == 25.0

    def test_distance_at_edge_and_broadside(self, geometry):
        assert distance_at_time(geometry, 0.0) == pytest.approx(math.hypot(20.0, 60.0))
        assert distance_at_time(geometry, geometry.traversal_time) == pytest.approx(20.0, abs=1e-9)

    def test_distance_along_track_is_vectorised(self):
        u = np.array([0.0, 60.0])
        assert distance_along_track(20.0, 60.0, u) == pytest.approx([math.hypot(20.0, 60.0), 20.0])

    def test_fine_plan_tracks_true_distance(self):
        geometry = make_geometry(dl=120.0, n_segments=1000)
        plan = segment_plan(geometry)
        times = np.linspace(0.0, geometry.traversal_time, 10_000, endpoint=False)
        index = np.searchsorted(plan.switch_times(geometry.v), times, side="right")
        stepped = np.asarray(plan.midpoint_distances)[np.minimum(index, plan.n_segments - 1)]
        exact = np.array([distance_at_time(geometry, t) for t in times])
        assert np.max(np.abs(stepped - exact)) < 0.5

    def test_distance_symmetric_about_broadside(self, geometry):
        broadside = geometry.dl / (2.0 * geometry.v)
        for s in np.linspace(0.0, broadside, 25):
            assert distance_at_time(geometry, broadside - s) == pytest.approx(
                distance_at_time(geometry, broadside + s), rel=1e-12
            )
