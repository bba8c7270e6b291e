import numpy as np
import pytest

from empchaos.driver import (
    EVOLVE,
    HOLD,
    RESAMPLE,
    EmpiricalConfig,
    StageTimings,
    alternating_schedule,
    always_resample,
    run_empirical_chaos,
    run_schedule,
)
from empchaos.pde_core import SpatialGrid, TimeWindow, wave_exact_mean_square


class TestSchedules:
    def test_always_resample(self):
        assert [always_resample(i) for i in range(4)] == [RESAMPLE] * 4

    def test_alternating(self):
        assert [alternating_schedule(i) for i in range(4)] == [
            RESAMPLE, EVOLVE, RESAMPLE, EVOLVE]


class TestStageTimings:
    def test_add_accumulates(self):
        timings = StageTimings()
        timings.add("svd", 0.5)
        timings.add("svd", 0.25)
        assert timings.svd == pytest.approx(0.75)

    def test_total_sums_all_stages(self):
        timings = StageTimings(sampling=1.0, svd=2.0, change_of_basis=3.0,
                               rhs_assembly=4.0, propagation=5.0,
                               basis_evolution=6.0)
        assert timings.total == pytest.approx(21.0)
        assert set(timings.as_dict()) == {
            "sampling", "svd", "change_of_basis", "rhs_assembly",
            "propagation", "basis_evolution"}


class TestConfigValidation:
    def test_rejects_nonpositive_window(self, wave, small_grid, rule_120):
        with pytest.raises(ValueError):
            EmpiricalConfig(problem=wave, grid=small_grid, rule=rule_120,
                            window_length=0.0)

    def test_rejects_empty_horizon(self, wave, small_grid, rule_120):
        with pytest.raises(ValueError):
            EmpiricalConfig(problem=wave, grid=small_grid, rule=rule_120,
                            t_final=0.0, t_start=0.0)

    def test_rejects_single_output(self, wave, small_grid, rule_120):
        with pytest.raises(ValueError):
            EmpiricalConfig(problem=wave, grid=small_grid, rule=rule_120,
                            outputs_per_window=1)

    def test_unknown_schedule_action_raises(self, wave, small_grid, rule_120):
        config = EmpiricalConfig(problem=wave, grid=small_grid, rule=rule_120,
                                 t_final=2.0, schedule=lambda i: "shuffle")
        with pytest.raises(ValueError):
            run_schedule(config)


class TestRunEmpiricalChaos:
    def test_archive_covers_horizon_contiguously(self, wave, rule_120):
        grid = SpatialGrid(64)
        config = EmpiricalConfig(problem=wave, grid=grid, rule=rule_120,
                                 window_length=1.0, t_final=3.5)
        archive, timings = run_empirical_chaos(config)
        windows = [record.window for record in archive.records]
        assert windows[0].start == pytest.approx(0.0)
        assert windows[-1].end == pytest.approx(3.5)
        for prev, nxt in zip(windows, windows[1:]):
            assert nxt.start == pytest.approx(prev.end)

    def test_accurate_against_exact_statistic(self, wave, rule_120):
        grid = SpatialGrid(128)
        config = EmpiricalConfig(problem=wave, grid=grid, rule=rule_120,
                                 window_length=1.0, t_final=5.0)
        archive, _ = run_empirical_chaos(config)
        times, values = archive.statistic_series(0)
        exact = wave_exact_mean_square(times)
        assert np.max(np.abs(values - exact)) < 1e-3

    def test_timings_cover_resample_stages(self, wave, rule_120):
        grid = SpatialGrid(64)
        config = EmpiricalConfig(problem=wave, grid=grid, rule=rule_120,
                                 window_length=1.0, t_final=2.0)
        _, timings = run_empirical_chaos(config)
        for stage in ("sampling", "svd", "change_of_basis", "rhs_assembly",
                      "propagation"):
            assert getattr(timings, stage) > 0.0
        assert timings.basis_evolution == 0.0

    def test_basis_cap_enforced(self, wave, rule_120):
        grid = SpatialGrid(64)
        config = EmpiricalConfig(problem=wave, grid=grid, rule=rule_120,
                                 window_length=1.0, t_final=2.0, basis_cap=2)
        archive, _ = run_empirical_chaos(config)
        assert np.all(archive.basis_counts() <= 2)

    def test_reaction_problem_runs(self, advection_reaction, rule_300):
        grid = SpatialGrid(64)
        config = EmpiricalConfig(problem=advection_reaction, grid=grid,
                                 rule=rule_300, window_length=2.0, t_final=4.0,
                                 outputs_per_window=6)
        archive, _ = run_empirical_chaos(config)
        times, values = archive.statistic_series(0)
        assert times[0] == pytest.approx(0.0)
        assert values[0] == pytest.approx(6.25, abs=1e-8)
        assert np.all(np.isfinite(values))


class TestRunSchedule:
    def test_hold_keeps_basis_between_windows(self, wave, rule_120):
        grid = SpatialGrid(64)
        config = EmpiricalConfig(problem=wave, grid=grid, rule=rule_120,
                                 window_length=1.0, t_final=2.0,
                                 schedule=lambda i: HOLD if i else RESAMPLE)
        archive, timings = run_schedule(config)
        first, second = archive.records[0], archive.records[1]
        assert second.basis is first.basis
        assert timings.sampling > 0.0

    def test_evolve_records_substeps(self, wave, rule_120):
        grid = SpatialGrid(64)
        config = EmpiricalConfig(problem=wave, grid=grid, rule=rule_120,
                                 window_length=1.0, t_final=2.0,
                                 evolve_substep=0.25,
                                 schedule=alternating_schedule)
        archive, timings = run_schedule(config)
        # one full resample window plus four evolve sub-windows
        assert len(archive.records) == 5
        assert timings.basis_evolution > 0.0
        assert archive.records[-1].window.end == pytest.approx(2.0)

    def test_evolve_rejected_for_reaction(self, advection_reaction, rule_300):
        grid = SpatialGrid(64)
        config = EmpiricalConfig(problem=advection_reaction, grid=grid,
                                 rule=rule_300, window_length=1.0, t_final=2.0,
                                 schedule=alternating_schedule)
        with pytest.raises(ValueError):
            run_schedule(config)
