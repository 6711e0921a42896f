import math

import numpy as np
import pytest

from model.allocation import (
    NEGATIVE_POWER_WARNING,
    PowerAllocation,
    Scheme,
    allocate_closed_form,
    allocate_oracle,
    coefficients,
    constraint_residual,
    energy_of,
)
from model.errors import DegenerateInputError, DomainError, ModeMismatchError
from model.geometry import SegmentPlan, segment_plan
from model.link import SnrModel
from model.traffic import DataBudget, data_integral_constant_power, data_total_midpoint
from tests.conftest import make_geometry

LITERAL = SnrModel.PAPER_LITERAL
PHYSICAL = SnrModel.PHYSICAL


def random_instances(count: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        geometry = make_geometry(
            dl=float(rng.uniform(60.0, 200.0)),
            n_segments=int(rng.integers(1, 33)),
            v=float(rng.uniform(30.0, 120.0)),
        )
        yield geometry, float(rng.choice([40.0, 50.0]))


class TestCoefficients:
    def test_fixture(self, budget, plan):
        a, c, g = coefficients(plan, budget, LITERAL)
        assert g == pytest.approx(-0.01339487, abs=1e-8)
        assert c[0] == pytest.approx(1.054173, abs=1e-6)
        assert a == plan.dwell_times

    def test_physical_mode_is_rejected(self, budget, plan):
        with pytest.raises(ModeMismatchError):
            coefficients(plan, budget, PHYSICAL)

    def test_zero_noise_is_degenerate(self, zero_noise_budget, plan):
        with pytest.raises(DegenerateInputError):
            coefficients(plan, zero_noise_budget, LITERAL)


class TestClosedForm:
    def test_single_segment_pins_the_constraint(self, budget, mode):
        geometry = make_geometry(n_segments=1)
        plan = segment_plan(geometry)
        d_fixed = data_integral_constant_power(geometry, budget, mode, 40.0)
        allocation = allocate_closed_form(plan, budget, d_fixed, mode)
        delivered = data_total_midpoint(geometry, plan, budget, mode, allocation)
        assert delivered == pytest.approx(d_fixed, rel=1e-9)

    def test_constraint_identity_on_random_grid(self, budget, mode):
        for geometry, p_ref in random_instances(100, seed=11):
            plan = segment_plan(geometry)
            d_fixed = data_integral_constant_power(geometry, budget, mode, p_ref)
            allocation = allocate_closed_form(plan, budget, d_fixed, mode)
            assert abs(constraint_residual(plan, budget, allocation, d_fixed)) < 1e-9

    def test_every_segment_gets_equal_data(self, budget, geometry, plan, mode):
        allocation = allocate_closed_form(plan, budget, 0.4, mode)
        delivered = data_total_midpoint(geometry, plan, budget, mode, allocation)
        assert delivered == pytest.approx(0.4, rel=1e-9)

    def test_zero_requirement_in_physical_mode_is_silence(self, budget, plan):
        allocation = allocate_closed_form(plan, budget, 0.0, PHYSICAL)
        assert all(p == -math.inf for p in allocation.powers_dbm)
        assert energy_of(plan, allocation) == 0.0

    def test_negative_powers_are_flagged_not_clamped(self, budget, plan, mocker):
        log = mocker.patch("model.allocation.log_with_context")
        allocation = allocate_closed_form(plan, budget, 5.0, LITERAL)
        assert allocation.warnings == (NEGATIVE_POWER_WARNING,)
        assert min(allocation.powers_dbm) < 0.0
        assert abs(constraint_residual(plan, budget, allocation, 5.0)) < 1e-9
        log.assert_called_once()
        assert log.call_args.args[1] == "warning"

    def test_mode_of_data_budget_must_match(self, budget, plan):
        with pytest.raises(ModeMismatchError):
            allocate_closed_form(plan, budget, DataBudget(0.4, PHYSICAL), LITERAL)


class TestOracle:
    def test_matches_closed_form_with_one_segment(self, budget):
        geometry = make_geometry(n_segments=1)
        plan = segment_plan(geometry)
        d_fixed = data_integral_constant_power(geometry, budget, PHYSICAL, 40.0)
        oracle = allocate_oracle(plan, budget, d_fixed, PHYSICAL)
        closed = allocate_closed_form(plan, budget, d_fixed, PHYSICAL)
        assert energy_of(plan, oracle) == pytest.approx(energy_of(plan, closed), rel=1e-9)

    def test_never_worse_than_closed_form(self, budget):
        for geometry, p_ref in random_instances(100, seed=5):
            plan = segment_plan(geometry)
            d_fixed = data_integral_constant_power(geometry, budget, PHYSICAL, p_ref)
            oracle = allocate_oracle(plan, budget, d_fixed, PHYSICAL)
            closed = allocate_closed_form(plan, budget, d_fixed, PHYSICAL)
            assert energy_of(plan, oracle) <= energy_of(plan, closed) * (1.0 + 1e-9)
            assert constraint_residual(plan, budget, oracle, d_fixed) >= -1e-9

    def test_table1_eight_segments(self, budget):
        geometry = make_geometry(dl=120.0, n_segments=8)
        plan = segment_plan(geometry)
        d_fixed = data_integral_constant_power(geometry, budget, PHYSICAL, 40.0)
        oracle = allocate_oracle(plan, budget, d_fixed, PHYSICAL)
        closed = allocate_closed_form(plan, budget, d_fixed, PHYSICAL)
        assert energy_of(plan, oracle) <= energy_of(plan, closed)
        assert oracle.scheme is Scheme.ORACLE

    def test_symmetric_plan_gets_equal_powers(self, budget):
        plan = SegmentPlan(
            widths=(10.0, 10.0, 10.0),
            midpoint_distances=(30.0, 30.0, 30.0),
            dwell_times=(0.1, 0.1, 0.1),
            beam_angle=0.1,
        )
        oracle = allocate_oracle(plan, budget, 1.5, PHYSICAL)
        assert oracle.powers_dbm == pytest.approx([oracle.powers_dbm[0]] * 3, rel=1e-9)

    def test_zero_requirement(self, budget, plan):
        oracle = allocate_oracle(plan, budget, 0.0, PHYSICAL)
        assert energy_of(plan, oracle) == 0.0

    def test_literal_mode_is_rejected(self, budget, plan):
        with pytest.raises(ModeMismatchError):
            allocate_oracle(plan, budget, 0.4, LITERAL)


class TestEnergy:
    def test_uniform_literal_power(self, plan):
        allocation = PowerAllocation(powers_dbm=(40.0, 40.0), scheme=Scheme.MCTP, mode=LITERAL)
        assert energy_of(plan, allocation) == pytest.approx(28.8, rel=1e-12)

    def test_uniform_physical_power(self, plan):
        allocation = PowerAllocation(powers_dbm=(50.0, 50.0), scheme=Scheme.MCTP, mode=PHYSICAL)
        assert energy_of(plan, allocation) == pytest.approx(72.0, rel=1e-12)
        assert allocation.powers_watts == pytest.approx((100.0, 100.0))

    def test_length_mismatch(self, plan):
        allocation = PowerAllocation(powers_dbm=(40.0,), scheme=Scheme.MCTP, mode=LITERAL)
        with pytest.raises(DomainError):
            energy_of(plan, allocation)
