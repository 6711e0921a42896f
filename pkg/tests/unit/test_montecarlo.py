import dataclasses
import math

import pytest

from model.allocation import NEGATIVE_POWER_WARNING, Scheme
from model.errors import ConvergenceError, DomainError
from model.link import SnrModel
from model.montecarlo import (
    VelocityErrorModel,
    run_montecarlo,
    sample_velocities,
    sample_velocity,
    trial_evaluate,
)
from model.schemes import evaluate_schemes
from tests.conftest import TABLE1_SPEED, make_geometry

LITERAL = SnrModel.PAPER_LITERAL
FOUR = (Scheme.MCTP, Scheme.OTPA, Scheme.MTPA, Scheme.OTPA_INF)


class TestVelocityModel:
    @pytest.mark.parametrize("kwargs", [
        {"sigma_v": -1.0},
        {"sigma_v": math.nan},
        {"trials": 0},
        {"seed": -1},
        {"seed": 2 ** 64},
    ])
    def test_validation(self, kwargs):
        params = {"sigma_v": 1.0, "seed": 1, "trials": 10}
        params.update(kwargs)
        with pytest.raises(DomainError):
            VelocityErrorModel(**params)


class TestSampling:
    def test_zero_sigma_returns_true_speed(self):
        model = VelocityErrorModel(sigma_v=0.0, seed=3, trials=5)
        assert all(v == TABLE1_SPEED for v in sample_velocities(model, TABLE1_SPEED))

    def test_draws_are_keyed_by_seed_and_trial(self):
        model = VelocityErrorModel(sigma_v=1.0, seed=42, trials=1)
        assert sample_velocity(model, 80.0, 7) == sample_velocity(model, 80.0, 7)
        assert sample_velocity(model, 80.0, 7) != sample_velocity(model, 80.0, 8)
        other_seed = VelocityErrorModel(sigma_v=1.0, seed=43, trials=1)
        assert sample_velocity(model, 80.0, 7) != sample_velocity(other_seed, 80.0, 7)

    def test_gaussian_moments(self):
        sigma = 0.01 * TABLE1_SPEED
        model = VelocityErrorModel(sigma_v=sigma, seed=2024, trials=100_000)
        draws = sample_velocities(model, TABLE1_SPEED)
        assert abs(draws.mean() - TABLE1_SPEED) < 3.0 * sigma / math.sqrt(draws.size)
        assert draws.std(ddof=1) == pytest.approx(sigma, rel=0.02)

    def test_resampling_gives_up(self, mocker):
        generator = mocker.Mock()
        generator.normal.return_value = -1e9
        mocker.patch("model.montecarlo._trial_generator", return_value=generator)
        model = VelocityErrorModel(sigma_v=1.0, seed=0, trials=1)
        with pytest.raises(ConvergenceError):
            sample_velocity(model, 80.0, 0, max_resamples=64)
        assert generator.normal.call_count == 65

    def test_resampling_keeps_first_positive_draw(self, mocker):
        generator = mocker.Mock()
        generator.normal.side_effect = [-1e9, -1e9, 2.0]
        mocker.patch("model.montecarlo._trial_generator", return_value=generator)
        model = VelocityErrorModel(sigma_v=1.0, seed=0, trials=1)
        assert sample_velocity(model, 80.0, 0) == 82.0


class TestTrialEvaluate:
    def test_exact_speed_reproduces_deterministic_results(self, budget):
        geometry = make_geometry(dl=120.0, n_segments=8)
        trial = trial_evaluate(geometry, budget, LITERAL, 40.0, geometry.v, FOUR)
        deterministic = evaluate_schemes(geometry, budget, LITERAL, 40.0, FOUR)
        for realized, expected in zip(trial.outcomes, deterministic):
            assert realized.result.energy == expected.result.energy
            assert realized.result.data == expected.result.data

    @pytest.mark.parametrize("v_hat", [0.9 * TABLE1_SPEED, 1.1 * TABLE1_SPEED])
    def test_misestimated_speed_changes_collected_data(self, budget, v_hat):
        geometry = make_geometry(dl=120.0, n_segments=4)
        planned = evaluate_schemes(geometry.with_speed(v_hat), budget, LITERAL, 40.0, FOUR)
        trial = trial_evaluate(geometry, budget, LITERAL, 40.0, v_hat, FOUR)
        for realized, plan in zip(trial.outcomes, planned):
            assert realized.result.energy == plan.result.energy
            if realized.scheme is not Scheme.OTPA_INF:
                assert realized.result.data != plan.result.data

    def test_rejects_non_positive_estimate(self, budget, geometry):
        with pytest.raises(DomainError):
            trial_evaluate(geometry, budget, LITERAL, 40.0, 0.0)


class TestRunMontecarlo:
    def test_single_exact_trial_collapses(self, budget):
        geometry = make_geometry(dl=100.0, n_segments=8)
        model = VelocityErrorModel(sigma_v=0.0, seed=1, trials=1)
        summary = run_montecarlo(geometry, budget, LITERAL, model, 40.0, FOUR)
        for stats, outcome in zip(summary.statistics, evaluate_schemes(geometry, budget, LITERAL, 40.0, FOUR)):
            assert stats.energy.mean == outcome.result.energy
            assert stats.data.mean == outcome.result.data
            assert stats.energy.std == 0.0
            assert stats.successful_trials == 1

    def test_repeatable_and_independent_of_workers(self, budget):
        geometry = make_geometry(dl=120.0, n_segments=4)
        model = VelocityErrorModel(sigma_v=0.01 * geometry.v, seed=99, trials=12)
        first = run_montecarlo(geometry, budget, LITERAL, model, 40.0, FOUR, workers=1)
        again = run_montecarlo(geometry, budget, LITERAL, model, 40.0, FOUR, workers=1)
        threaded = run_montecarlo(geometry, budget, LITERAL, model, 40.0, FOUR, workers=4)
        assert first.statistics == again.statistics == threaded.statistics

    def test_wider_error_spreads_energy(self, budget):
        geometry = make_geometry(dl=120.0, n_segments=4)
        narrow = run_montecarlo(geometry, budget, LITERAL,
                                VelocityErrorModel(0.01 * geometry.v, seed=5, trials=20), 40.0, FOUR)
        wide = run_montecarlo(geometry, budget, LITERAL,
                              VelocityErrorModel(0.1 * geometry.v, seed=5, trials=20), 40.0, FOUR)
        for scheme in FOUR:
            assert wide.for_scheme(scheme).energy.std > narrow.for_scheme(scheme).energy.std

    @pytest.mark.parametrize("dl", [100.0, 120.0, 140.0])
    def test_mean_energy_keeps_deterministic_ordering(self, budget, mocker, dl):
        # realised data never enters the energy statistics
        mocker.patch("model.montecarlo._realized", side_effect=lambda result, *args: result)
        geometry = make_geometry(dl=dl, n_segments=8)
        deterministic = {o.scheme: o.result.energy for o in evaluate_schemes(geometry, budget, LITERAL, 40.0, FOUR)}
        model = VelocityErrorModel(0.01 * geometry.v, seed=11, trials=10_000)
        summary = run_montecarlo(geometry, budget, LITERAL, model, 40.0, FOUR, workers=4)
        mean = {s: summary.for_scheme(s).energy.mean for s in FOUR}
        assert all(summary.for_scheme(s).successful_trials == 10_000 for s in FOUR)
        assert sorted(FOUR, key=mean.get) == sorted(FOUR, key=deterministic.get)
        assert mean[Scheme.OTPA_INF] <= mean[Scheme.OTPA]

    def test_confidence_interval_brackets_mean(self, budget):
        geometry = make_geometry(dl=120.0, n_segments=4)
        model = VelocityErrorModel(0.05 * geometry.v, seed=8, trials=10)
        stats = run_montecarlo(geometry, budget, LITERAL, model, 40.0, FOUR).for_scheme(Scheme.OTPA)
        half_width = 1.96 * stats.energy.std / math.sqrt(10)
        assert stats.energy.ci95_low == pytest.approx(stats.energy.mean - half_width)
        assert stats.energy.ci95_high == pytest.approx(stats.energy.mean + half_width)

    def test_failed_trials_are_counted(self, budget, mocker):
        real = sample_velocity

        def flaky(model, v_true, trial, max_resamples=None):
            if trial == 1:
                raise ConvergenceError("no positive speed estimate")
            return real(model, v_true, trial, max_resamples)

        mocker.patch("model.montecarlo.sample_velocity", side_effect=flaky)
        geometry = make_geometry(dl=120.0, n_segments=2)
        model = VelocityErrorModel(0.01 * geometry.v, seed=3, trials=3)
        summary = run_montecarlo(geometry, budget, LITERAL, model, 40.0, FOUR)
        assert summary.failed_trials == 1
        stats = summary.for_scheme(Scheme.OTPA)
        assert stats.successful_trials == 2
        assert stats.failed_trials == 1
        assert "ConvergenceError" in stats.first_error

    def test_flagged_trials_are_logged(self, budget, mocker):
        def negative(result, *args):
            return dataclasses.replace(result, warnings=(NEGATIVE_POWER_WARNING,)) if result.scheme is Scheme.OTPA else result

        mocker.patch("model.montecarlo._realized", side_effect=negative)
        log = mocker.patch("model.montecarlo.log_with_context")
        geometry = make_geometry(dl=120.0, n_segments=2)
        model = VelocityErrorModel(0.01 * geometry.v, seed=4, trials=3)
        summary = run_montecarlo(geometry, budget, LITERAL, model, 40.0, FOUR)
        assert summary.for_scheme(Scheme.OTPA).flagged_trials == 3
        assert summary.for_scheme(Scheme.MCTP).flagged_trials == 0
        flagged = [c for c in log.call_args_list if c.args[2] == "Monte Carlo trials flagged"]
        assert len(flagged) == 1
        assert flagged[0].args[1] == "warning"
        counts = flagged[0].kwargs["flagged_trials"]
        assert counts["OTPA"] == 3
        assert "MCTP" not in counts

    def test_flag_warning_matches_counts(self, budget, mocker):
        log = mocker.patch("model.montecarlo.log_with_context")
        geometry = make_geometry(dl=120.0, n_segments=2)
        summary = run_montecarlo(geometry, budget, LITERAL, VelocityErrorModel(0.0, seed=4, trials=2), 40.0, FOUR)
        flagged = [c for c in log.call_args_list if c.args[2] == "Monte Carlo trials flagged"]
        assert len(flagged) == int(any(s.flagged_trials for s in summary.statistics))
