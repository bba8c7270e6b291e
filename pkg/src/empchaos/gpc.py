"""Generalized polynomial chaos reference solver with normalized Legendre bases.

This path assumes exact orthonormality (mass = identity) and serves as the
benchmark the empirical expansion is compared against.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .pde_core import PdeProblem, SpatialGrid, TimeWindow, integrate_ode, spatial_derivative
from .random_space import (
    QuadratureRule,
    chebyshev_nodes,
    expectation,
    gauss_legendre_rule,
    legendre_table,
    trapezoid_rule,
)

__all__ = [
    "DEFAULT_NODE_COUNT",
    "ORDER_CAP",
    "GpcSystem",
    "default_rule",
    "legendre_advection_matrix",
    "solve_gpc",
    "mean_square_series",
    "mean_series",
    "project_exact_wave",
]

DEFAULT_NODE_COUNT = 300
ORDER_CAP = 60
STABLE_ORDER = 40


def default_rule(node_count: int = DEFAULT_NODE_COUNT) -> QuadratureRule:
    """Composite trapezoid rule on Chebyshev nodes over [-1, 1]."""
    return trapezoid_rule(chebyshev_nodes(node_count))


def legendre_advection_matrix(order: int, rule: QuadratureRule | None = None) -> np.ndarray:
    """Advection coupling A[j, i] = E[xi * L_j * L_i] for the first ``order``
    normalized Legendre polynomials; tridiagonal with zero diagonal.

    By default the entries are exact to roundoff: a Gauss-Legendre rule of
    ``order + 1`` nodes integrates the degree-(2*order - 1) integrands
    exactly, matching a symbolic precomputation.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if rule is None:
        rule = gauss_legendre_rule(order + 1)
    table = legendre_table(order, rule.nodes)
    a = table.T @ ((rule.weights * rule.nodes)[:, None] * table)
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class GpcSystem:
    """Truncated gPC system: coefficient trajectory plus its coupling matrix."""

    order: int
    advection: np.ndarray
    rule: QuadratureRule
    times: tuple
    coefficients: np.ndarray  # (n_times, order, M)

    def coefficients_at(self, t: float) -> np.ndarray:
        idx = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        return self.coefficients[idx]


def solve_gpc(
    problem: PdeProblem,
    order: int,
    grid: SpatialGrid,
    window: TimeWindow,
    step: float,
    rule: QuadratureRule | None = None,
    order_cap: int = ORDER_CAP,
) -> GpcSystem:
    """RK4 on the truncated gPC system with a deterministic initial condition.

    The nonlinear reaction term is projected by quadrature at every rhs call.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if order > order_cap:
        raise ValueError(f"order {order} exceeds the cap {order_cap}")
    if order > STABLE_ORDER:
        warnings.warn(
            f"gPC order {order} is above {STABLE_ORDER}; the Galerkin system may be unstable",
            RuntimeWarning,
            stacklevel=2,
        )
    if rule is None:
        rule = default_rule()
    # exact coupling matrix (the quadrature rule only serves the nonlinearity)
    advection = legendre_advection_matrix(order)
    table = legendre_table(order, rule.nodes) if problem.has_reaction else None
    w = rule.weights

    if problem.has_reaction:
        def rhs(t, coeffs):
            out = advection @ spatial_derivative(coeffs, grid)
            u_nodes = table @ coeffs
            out += table.T @ (w[:, None] * problem.reaction(u_nodes))
            return out
    else:
        def rhs(t, coeffs):
            return advection @ spatial_derivative(coeffs, grid)

    initial = np.zeros((order, grid.point_count))
    initial[0] = problem.initial_condition(grid.points)
    states = integrate_ode(rhs, initial, window, step)
    return GpcSystem(order=order, advection=advection, rule=rule,
                     times=window.output_times, coefficients=states)


def mean_square_series(system: GpcSystem, x_index: int = 0) -> np.ndarray:
    """E[u^2] over time at one grid point: sum of squared coefficients."""
    return np.sum(system.coefficients[:, :, x_index] ** 2, axis=1)


def mean_series(system: GpcSystem, x_index: int = 0) -> np.ndarray:
    """E[u] over time at one grid point: the constant-mode coefficient."""
    return system.coefficients[:, 0, x_index]


def project_exact_wave(order: int, t: float, rule: QuadratureRule | None = None) -> float:
    """Mean square expectation at x = 0 of the exact wave solution projected
    onto the first ``order`` normalized Legendre polynomials."""
    if order < 1:
        raise ValueError("order must be at least 1")
    if rule is None:
        rule = default_rule()
    table = legendre_table(order, rule.nodes)
    exact = np.cos(rule.nodes * t)
    coeffs = np.array([expectation(exact * table[:, i], rule) for i in range(order)])
    return float(np.sum(coeffs**2))
