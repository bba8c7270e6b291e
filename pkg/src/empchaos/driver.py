"""Windowed empirical chaos expansion driver.

Runs the sample / POD / change-of-basis / propagate loop over successive time
windows, optionally replacing the sampling step on selected windows by the
matrix-exponential basis evolution, and records per-stage wall-clock timings.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import basis_evolution
from .galerkin import (
    ExpansionArchive,
    WindowRecord,
    assemble_matrices,
    change_basis,
    project_node_values,
    propagate_window,
)
from .pde_core import PdeProblem, SpatialGrid, TimeWindow, default_step, solve_ensemble
from .pod import assemble_trajectory_matrix, truncate_pod
from .random_space import QuadratureRule

__all__ = [
    "RESAMPLE",
    "EVOLVE",
    "HOLD",
    "StageTimings",
    "EmpiricalConfig",
    "always_resample",
    "alternating_schedule",
    "run_empirical_chaos",
    "run_schedule",
]

RESAMPLE = "resample"
EVOLVE = "evolve"
HOLD = "hold"


@dataclass
class StageTimings:
    """Wall-clock seconds per pipeline stage."""

    sampling: float = 0.0
    svd: float = 0.0
    change_of_basis: float = 0.0
    rhs_assembly: float = 0.0
    propagation: float = 0.0
    basis_evolution: float = 0.0

    def add(self, stage: str, seconds: float) -> None:
        setattr(self, stage, getattr(self, stage) + seconds)

    def as_dict(self) -> dict:
        return {
            "sampling": self.sampling,
            "svd": self.svd,
            "change_of_basis": self.change_of_basis,
            "rhs_assembly": self.rhs_assembly,
            "propagation": self.propagation,
            "basis_evolution": self.basis_evolution,
        }

    @property
    def total(self) -> float:
        return sum(self.as_dict().values())


def always_resample(index: int) -> str:
    return RESAMPLE


def alternating_schedule(index: int) -> str:
    """Resample on even window indices (0-based), evolve in between."""
    return RESAMPLE if index % 2 == 0 else EVOLVE


@dataclass(frozen=True)
class EmpiricalConfig:
    """Parameters of one windowed empirical chaos run."""

    problem: PdeProblem
    grid: SpatialGrid
    rule: QuadratureRule
    window_length: float = 1.0
    t_final: float = 10.0
    t_start: float = 0.0
    threshold: float = 1e-4
    basis_cap: int | None = None
    step: float | None = None
    outputs_per_window: int = 11
    evolve_substep: float = 0.1
    schedule: Callable[[int], str] = field(default=always_resample)

    def __post_init__(self):
        if self.window_length <= 0:
            raise ValueError("window_length must be positive")
        if self.t_final <= self.t_start:
            raise ValueError("t_final must exceed t_start")
        if self.outputs_per_window < 2:
            raise ValueError("need at least 2 outputs per window")


def _snap_step(cadence: float, step: float) -> float:
    """Largest step <= requested that divides the output cadence exactly."""
    return cadence / int(np.ceil(cadence / step - 1e-12))


def _window_plan(config: EmpiricalConfig) -> list[TimeWindow]:
    windows = []
    t = config.t_start
    while t < config.t_final - 1e-12:
        end = min(t + config.window_length, config.t_final)
        windows.append(TimeWindow.with_uniform_outputs(t, end, config.outputs_per_window))
        t = end
    return windows


def run_empirical_chaos(config: EmpiricalConfig) -> tuple[ExpansionArchive, StageTimings]:
    """Plain empirical chaos expansion: resample the basis on every window."""
    return run_schedule(replace(config, schedule=always_resample))


def run_schedule(config: EmpiricalConfig) -> tuple[ExpansionArchive, StageTimings]:
    """Empirical chaos with a per-window schedule.

    Window 0 always resamples. On ``resample`` windows, trajectories are
    sampled and the basis recomputed by POD; on ``evolve`` windows the
    previous basis is advanced by the matrix-exponential operator in
    sub-steps; on ``hold`` windows the basis is carried over unchanged.
    """
    timings = StageTimings()
    archive = ExpansionArchive()
    grid, rule, problem = config.grid, config.rule, config.problem

    max_speed = float(np.max(np.abs(rule.nodes)))
    base_step = config.step if config.step is not None else default_step(grid, max_speed)
    windows = _window_plan(config)

    basis = None
    matrices = None
    current_field = None
    u_nodes = None  # solution values at the quadrature nodes, (K, M)

    for index, window in enumerate(windows):
        cadence = window.length / (config.outputs_per_window - 1)
        step = _snap_step(cadence, base_step)
        action = config.schedule(index) if index > 0 else RESAMPLE
        if action not in (RESAMPLE, EVOLVE, HOLD):
            raise ValueError(f"schedule returned unknown action {action!r}")

        if action == RESAMPLE:
            if u_nodes is None:
                u0 = np.asarray(problem.initial_condition(grid.points), dtype=float)
                u_nodes = np.broadcast_to(u0, (len(rule), grid.point_count)).copy()
            tic = time.perf_counter()
            trajectories = solve_ensemble(problem, rule.nodes, u_nodes, window, grid, step)
            timings.add("sampling", time.perf_counter() - tic)

            tic = time.perf_counter()
            t_matrix = assemble_trajectory_matrix(trajectories.transpose(1, 0, 2))
            new_basis = truncate_pod(t_matrix, config.threshold, rule, window,
                                     cap=config.basis_cap)
            timings.add("svd", time.perf_counter() - tic)

            tic = time.perf_counter()
            new_matrices = assemble_matrices(new_basis)
            timings.add("rhs_assembly", time.perf_counter() - tic)

            tic = time.perf_counter()
            if current_field is None:
                # deterministic initial data: all node trajectories share u0
                current_field = project_node_values(u_nodes, new_basis, new_matrices,
                                                    time_stamp=window.start)
            else:
                current_field = change_basis(current_field, basis, new_basis, new_matrices)
            timings.add("change_of_basis", time.perf_counter() - tic)

            basis, matrices = new_basis, new_matrices

            tic = time.perf_counter()
            trajectory = propagate_window(problem, current_field, basis, window, grid,
                                          step, matrices)
            timings.add("propagation", time.perf_counter() - tic)
            archive.append(WindowRecord(window=window, basis=basis,
                                        trajectory=trajectory, matrices=matrices))
            current_field = trajectory.final
            u_nodes = basis.reconstruct(current_field.coefficients)
            continue

        if basis is None:
            raise ValueError("the first window must resample")

        if action == HOLD:
            tic = time.perf_counter()
            trajectory = propagate_window(problem, current_field, basis, window, grid,
                                          step, matrices)
            timings.add("propagation", time.perf_counter() - tic)
            archive.append(WindowRecord(window=window, basis=basis,
                                        trajectory=trajectory, matrices=matrices))
            current_field = trajectory.final
            u_nodes = basis.reconstruct(current_field.coefficients)
            continue

        # evolve: advance the basis in sub-steps, re-projecting coefficients
        # after each exponential application
        if problem.has_reaction:
            raise ValueError("basis evolution is only implemented for the wave operator")
        t = window.start
        while t < window.end - 1e-12:
            sub_end = min(t + config.evolve_substep, window.end)
            sub_window = TimeWindow.with_uniform_outputs(t, sub_end, 2)
            sub_step = _snap_step(sub_window.length, base_step)

            tic = time.perf_counter()
            pair = basis_evolution.spatial_pair(current_field, grid)
            new_basis = basis_evolution.evolve_basis(basis, pair, sub_window.length)
            timings.add("basis_evolution", time.perf_counter() - tic)

            tic = time.perf_counter()
            new_matrices = assemble_matrices(new_basis)
            timings.add("rhs_assembly", time.perf_counter() - tic)

            tic = time.perf_counter()
            current_field = change_basis(current_field, basis, new_basis, new_matrices)
            timings.add("change_of_basis", time.perf_counter() - tic)
            basis, matrices = new_basis, new_matrices

            tic = time.perf_counter()
            trajectory = propagate_window(problem, current_field, basis, sub_window,
                                          grid, sub_step, matrices)
            timings.add("propagation", time.perf_counter() - tic)
            archive.append(WindowRecord(window=sub_window, basis=basis,
                                        trajectory=trajectory, matrices=matrices))
            current_field = trajectory.final
            t = sub_end
        u_nodes = basis.reconstruct(current_field.coefficients)

    return archive, timings
