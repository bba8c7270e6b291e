"""Trajectory matrix assembly and SVD-based basis extraction.

Sampled trajectories at fixed random-variable values become columns of a tall
matrix; the leading right singular vectors span the empirical basis for one
time window.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .pde_core import TimeWindow
from .random_space import QuadratureRule

__all__ = [
    "TrajectoryMatrix",
    "BasisSet",
    "assemble_trajectory_matrix",
    "truncate_pod",
    "projection_residual",
]

_basis_counter = itertools.count()


@dataclass(frozen=True)
class TrajectoryMatrix:
    """Spacetime-samples-by-trajectories matrix.

    Row order is x-major then t (row = i * time_count + j for grid point i and
    output time j); column l holds the trajectory at sample l.
    """

    entries: np.ndarray
    grid_size: int
    time_count: int

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2:
            raise ValueError("entries must be a 2-d array")
        if entries.shape[0] != self.grid_size * self.time_count:
            raise ValueError("row count must equal grid_size * time_count")
        if not np.all(np.isfinite(entries)):
            raise ValueError("trajectory matrix contains non-finite entries")

    @property
    def sample_count(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class BasisSet:
    """Stochastic basis functions stored as value tables at quadrature nodes.

    Column i of ``values`` is the i-th basis function evaluated at the rule's
    nodes. Fresh POD bases have Euclidean-orthonormal columns; evolved bases
    do not.
    """

    values: np.ndarray
    rule: QuadratureRule
    window: TimeWindow
    singular_values: np.ndarray = field(default_factory=lambda: np.array([]))
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        sv = np.asarray(self.singular_values, dtype=float)
        sv.setflags(write=False)
        object.__setattr__(self, "singular_values", sv)
        if values.ndim != 2 or values.shape[0] != len(self.rule):
            raise ValueError("values must be (node count, basis count)")
        if values.shape[1] < 1:
            raise ValueError("need at least one basis function")
        if not self.label:
            object.__setattr__(self, "label", f"basis-{next(_basis_counter)}")

    @property
    def size(self) -> int:
        return self.values.shape[1]

    def reconstruct(self, coefficients: np.ndarray) -> np.ndarray:
        """Node values of sum_i c_i * Psi_i; coefficients may be (N_b,) or (N_b, M)."""
        return self.values @ coefficients


def assemble_trajectory_matrix(solutions) -> TrajectoryMatrix:
    """Stack per-sample trajectories into the trajectory matrix.

    ``solutions`` is a sequence of K arrays of shape (time_count, grid_size),
    or equivalently one array of shape (K, time_count, grid_size).
    """
    stacked = np.asarray(solutions, dtype=float)
    if stacked.ndim != 3:
        raise ValueError("expected K trajectories of shape (time_count, grid_size)")
    k, n_t, m = stacked.shape
    entries = stacked.transpose(2, 1, 0).reshape(m * n_t, k)
    return TrajectoryMatrix(entries=entries, grid_size=m, time_count=n_t)


def truncate_pod(
    matrix: TrajectoryMatrix,
    threshold: float,
    rule: QuadratureRule,
    window: TimeWindow,
    cap: int | None = None,
) -> BasisSet:
    """Extract the leading right singular vectors as an empirical basis.

    Keeps every direction whose scaled singular value sigma_i / sigma_1 is at
    least ``threshold`` (at least one), optionally capped.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    if matrix.sample_count != len(rule):
        raise ValueError("trajectory column count must equal quadrature node count")
    _, sigma, vt = np.linalg.svd(matrix.entries, full_matrices=False)
    if sigma[0] == 0.0:
        raise ValueError("degenerate input: trajectory matrix is zero")
    n_keep = max(1, int(np.count_nonzero(sigma / sigma[0] >= threshold)))
    if cap is not None:
        n_keep = min(n_keep, max(1, cap))
    return BasisSet(
        values=vt[:n_keep].T.copy(),
        rule=rule,
        window=window,
        singular_values=sigma,
    )


def projection_residual(matrix: TrajectoryMatrix, basis: BasisSet) -> float:
    """Frobenius norm of T - T*P with P the Euclidean projector onto the basis.

    For a basis produced by ``truncate_pod`` this equals
    sqrt(sum of squared discarded singular values).
    """
    if basis.values.shape[0] != matrix.sample_count:
        raise ValueError("basis node count does not match trajectory columns")
    t = matrix.entries
    projected = (t @ basis.values) @ basis.values.T
    return float(np.linalg.norm(t - projected))
