from typing import Tuple, get_type_hints

import pytest

from model.allocation import PowerAllocation
from model.errors import DomainError, ModeMismatchError
from model.geometry import segment_plan
from model.link import SnrModel
from model.traffic import (
    DataBudget,
    cross_check_data_integral,
    data_integral_constant_power,
    data_segment_midpoint,
    data_total_midpoint,
    required_data,
    requirement_value,
)
from model.units import Dbm, Watts
from tests.conftest import make_geometry

LITERAL = SnrModel.PAPER_LITERAL


class TestMidpointData:
    @pytest.mark.parametrize("i, expected", [(1, 0.329595), (2, 0.090739)])
    def test_segment_fixture(self, budget, geometry, plan, i, expected):
        assert data_segment_midpoint(geometry, plan, budget, LITERAL, 40.0, i) == pytest.approx(expected, abs=2e-6)

    @pytest.mark.parametrize("i", [0, 3])
    def test_segment_index_is_one_based(self, budget, geometry, plan, i):
        with pytest.raises(DomainError):
            data_segment_midpoint(geometry, plan, budget, LITERAL, 40.0, i)

    def test_total_is_sum_of_segments(self, budget, geometry, plan):
        total = data_total_midpoint(geometry, plan, budget, LITERAL, [40.0, 40.0])
        assert total == pytest.approx(0.329595 + 0.090739, abs=4e-6)

    def test_total_rejects_wrong_length(self, budget, geometry, plan):
        with pytest.raises(DomainError):
            data_total_midpoint(geometry, plan, budget, LITERAL, [40.0])


class TestExactData:
    @pytest.mark.parametrize("dl, expected", [
        (60.0, 0.196434),
        (120.0, 0.418968),
        (200.0, 0.742322),
    ])
    def test_d_fixed_fixture(self, budget, dl, expected):
        d_fixed = data_integral_constant_power(make_geometry(dl=dl), budget, LITERAL, 40.0)
        assert d_fixed == pytest.approx(expected, rel=1e-5)

    def test_d_fixed_times_speed_is_speed_invariant(self, budget, mode):
        products = [
            data_integral_constant_power(make_geometry(v=v), budget, mode, 40.0) * v
            for v in (20.0, 55.5, 83.3, 120.0)
        ]
        assert products == pytest.approx([products[0]] * 4, rel=1e-12)

    def test_windows_add_up(self, budget, geometry, mode):
        whole = data_integral_constant_power(geometry, budget, mode, 40.0)
        first = data_integral_constant_power(geometry, budget, mode, 40.0, 0.0, 30.0)
        second = data_integral_constant_power(geometry, budget, mode, 40.0, 30.0, 60.0)
        assert first + second == pytest.approx(whole, rel=1e-8)

    @pytest.mark.parametrize("dl", [60.0, 120.0, 200.0])
    def test_midpoint_rule_converges_to_exact(self, budget, mode, dl):
        geometry = make_geometry(dl=dl, n_segments=64)
        plan = segment_plan(geometry)
        exact = data_integral_constant_power(geometry, budget, mode, 40.0)
        midpoint = data_total_midpoint(geometry, plan, budget, mode, [40.0] * 64)
        assert abs(midpoint - exact) / exact < 1e-3

    @pytest.mark.parametrize("dl", [60.0, 200.0])
    def test_trapezoid_agrees_with_adaptive_quadrature(self, budget, mode, dl, mocker):
        log = mocker.patch("utils.quadrature.log_with_context")
        geometry = make_geometry(dl=dl)
        check = cross_check_data_integral(geometry, budget, mode, 40.0)
        assert check.agrees
        assert check.quadrature == data_integral_constant_power(geometry, budget, mode, 40.0)
        assert check.relative_gap < 1e-6
        log.assert_not_called()


class TestDataBudget:
    def test_required_data_is_tagged_with_mode(self, budget, geometry, plan, mode):
        required = required_data(geometry, plan, budget, mode, 40.0)
        assert required.mode is mode
        assert len(required.per_segment) == 2
        assert requirement_value(required, mode) == required.d_fixed

    def test_mode_mismatch_is_rejected(self):
        literal = DataBudget(d_fixed=0.4, mode=LITERAL)
        with pytest.raises(ModeMismatchError):
            requirement_value(literal, SnrModel.PHYSICAL)

    def test_negative_requirements_are_rejected(self):
        with pytest.raises(DomainError):
            DataBudget(d_fixed=-0.1, mode=LITERAL)
        with pytest.raises(DomainError):
            requirement_value(-0.1, LITERAL)


class TestUnitTypes:
    @pytest.mark.parametrize("function", [data_segment_midpoint, data_integral_constant_power, required_data])
    def test_transmit_power_is_dbm(self, function):
        assert get_type_hints(function)["ptx_dbm"] is Dbm

    def test_allocation_powers(self):
        hints = get_type_hints(PowerAllocation)
        assert hints["powers_dbm"] == Tuple[Dbm, ...]
        assert get_type_hints(PowerAllocation.powers_watts.fget)["return"] == Tuple[Watts, ...]
