import numpy as np
import pytest

from empchaos.montecarlo import McConfig, McResult, mc_statistics
from empchaos.pde_core import (
    PdeProblem,
    SpatialGrid,
    TimeWindow,
    solve_fixed_xi,
    wave_exact_mean_square,
)


class TestMcConfigValidation:
    def test_rejects_zero_samples(self, wave, small_grid):
        with pytest.raises(ValueError):
            McConfig(problem=wave, grid=small_grid, window=TimeWindow(0.0, 1.0),
                     sample_count=0)

    def test_rejects_bad_chunk_size(self, wave, small_grid):
        with pytest.raises(ValueError):
            McConfig(problem=wave, grid=small_grid, window=TimeWindow(0.0, 1.0),
                     chunk_size=0)

    def test_rejects_xi_length_mismatch(self, wave, small_grid):
        config = McConfig(problem=wave, grid=small_grid,
                          window=TimeWindow(0.0, 1.0), sample_count=3,
                          xi_values=np.array([0.0, 0.5]))
        with pytest.raises(ValueError):
            mc_statistics(config)


class TestStatistics:
    def test_single_forced_sample_equals_trajectory(self, wave, small_grid):
        window = TimeWindow.with_uniform_outputs(0.0, 1.0, 5)
        config = McConfig(problem=wave, grid=small_grid, window=window,
                          sample_count=1, xi_values=np.array([0.0]), step=1e-2)
        result = mc_statistics(config)
        direct = solve_fixed_xi(wave, 0.0, np.cos(small_grid.points), window,
                                small_grid, step=1e-2)
        np.testing.assert_array_equal(result.mean, direct)
        np.testing.assert_array_equal(result.mean_square, direct**2)
        np.testing.assert_allclose(result.stderr_mean, 0.0, atol=1e-14)

    def test_deterministic_ic_mean_square(self, advection_reaction, small_grid):
        window = TimeWindow.with_uniform_outputs(0.0, 0.5, 2)
        config = McConfig(problem=advection_reaction, grid=small_grid,
                          window=window, sample_count=37, seed=5)
        result = mc_statistics(config)
        assert result.mean_square[0, 0] == pytest.approx(6.25, abs=1e-12)

    def test_wave_statistics_within_standard_errors(self, wave):
        grid = SpatialGrid(64)
        window = TimeWindow.with_uniform_outputs(0.0, 5.0, 11)
        config = McConfig(problem=wave, grid=grid, window=window,
                          sample_count=4000, seed=11)
        result = mc_statistics(config)
        times, values, stderr = result.series(0)
        exact = wave_exact_mean_square(times)
        # skip t=0 where the statistic is deterministic and stderr is 0
        sigmas = np.abs(values[1:] - exact[1:]) / stderr[1:]
        assert np.max(sigmas) <= 4.0


class TestReproducibility:
    def test_identical_seeds_bit_identical(self, wave, small_grid):
        window = TimeWindow.with_uniform_outputs(0.0, 1.0, 3)
        config = McConfig(problem=wave, grid=small_grid, window=window,
                          sample_count=200, seed=42)
        a = mc_statistics(config)
        b = mc_statistics(config)
        np.testing.assert_array_equal(a.mean, b.mean)
        np.testing.assert_array_equal(a.mean_square, b.mean_square)
        np.testing.assert_array_equal(a.stderr_mean_square, b.stderr_mean_square)

    def test_chunking_does_not_change_results(self, wave, small_grid):
        window = TimeWindow.with_uniform_outputs(0.0, 1.0, 3)
        base = dict(problem=wave, grid=small_grid, window=window,
                    sample_count=100, seed=7, step=1e-2)
        small_chunks = mc_statistics(McConfig(chunk_size=7, **base))
        one_chunk = mc_statistics(McConfig(chunk_size=100, **base))
        np.testing.assert_allclose(small_chunks.mean, one_chunk.mean, atol=1e-13)
        np.testing.assert_allclose(small_chunks.mean_square, one_chunk.mean_square,
                                   atol=1e-13)

    def test_different_seeds_differ(self, wave, small_grid):
        window = TimeWindow.with_uniform_outputs(0.0, 1.0, 3)
        a = mc_statistics(McConfig(problem=wave, grid=small_grid, window=window,
                                   sample_count=50, seed=1))
        b = mc_statistics(McConfig(problem=wave, grid=small_grid, window=window,
                                   sample_count=50, seed=2))
        assert not np.array_equal(a.mean, b.mean)


class TestStandardErrorScaling:
    def test_stderr_shrinks_as_root_n(self, wave):
        grid = SpatialGrid(32)
        window = TimeWindow.with_uniform_outputs(0.0, 2.0, 3)
        small = mc_statistics(McConfig(problem=wave, grid=grid, window=window,
                                       sample_count=1000, seed=3))
        large = mc_statistics(McConfig(problem=wave, grid=grid, window=window,
                                       sample_count=4000, seed=3))
        ratio = small.stderr_mean_square[-1, 0] / large.stderr_mean_square[-1, 0]
        assert ratio == pytest.approx(2.0, rel=0.2)


class TestDivergenceHandling:
    def test_all_diverged_raises_after_warning(self, small_grid):
        # cubic growth blows up quickly for every sample
        blower = PdeProblem(kind="AdvectionReaction",
                            initial_condition=lambda x: np.cos(x) + 1.5,
                            reaction_coefficient=1.0, reaction_exponent=3.0)
        window = TimeWindow(0.0, 5.0)
        config = McConfig(problem=blower, grid=small_grid, window=window,
                          sample_count=4, seed=0, step=1e-2)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.warns(RuntimeWarning), pytest.raises(RuntimeError):
                mc_statistics(config)

    def test_series_accessor_validates_statistic(self, wave, small_grid):
        window = TimeWindow.with_uniform_outputs(0.0, 1.0, 3)
        result = mc_statistics(McConfig(problem=wave, grid=small_grid,
                                        window=window, sample_count=10, seed=0))
        with pytest.raises(ValueError):
            result.series(0, "variance")
