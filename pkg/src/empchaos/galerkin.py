"""Stochastic Galerkin systems for general (non-orthogonal) basis sets.

Assembles mass/advection matrices by quadrature, projects functions and
initial conditions, converts coefficients between bases, propagates the
implicit coefficient ODE with RK4, and evaluates solution statistics from the
archive of solved windows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .pde_core import PdeProblem, SpatialGrid, TimeWindow, integrate_ode, spatial_derivative
from .pod import BasisSet
from .random_space import QuadratureRule, RandomInterval

__all__ = [
    "IllConditionedBasis",
    "GalerkinMatrices",
    "CoefficientField",
    "CoefficientTrajectory",
    "WindowRecord",
    "ExpansionArchive",
    "assemble_matrices",
    "project_function",
    "project_node_values",
    "project_initial_condition",
    "change_basis",
    "galerkin_rhs",
    "propagate_window",
    "mean_square_expectation",
    "mean",
]

CONDITION_LIMIT = 1e12


class IllConditionedBasis(RuntimeError):
    """Raised when a mass matrix is too ill-conditioned to solve against."""


@dataclass(frozen=True)
class GalerkinMatrices:
    """Mass and advection matrices of a basis, with a reusable factorization.

    mass[j, i] = E[Psi_i * Psi_j], advection[j, i] = E[xi * Psi_i * Psi_j].
    The mass factorization is computed once and reused in every solve.
    """

    mass: np.ndarray
    advection: np.ndarray
    condition_number: float
    _factor: tuple = field(repr=False, default=None)
    _factor_kind: str = field(repr=False, default="cholesky")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._factor_kind == "cholesky":
            return scipy.linalg.cho_solve(self._factor, rhs)
        return scipy.linalg.lu_solve(self._factor, rhs)

    @property
    def size(self) -> int:
        return self.mass.shape[0]


def assemble_matrices(basis: BasisSet, condition_limit: float = CONDITION_LIMIT) -> GalerkinMatrices:
    """Quadrature assembly of the Gram (mass) and advection matrices."""
    v = basis.values
    w = basis.rule.weights
    xi = basis.rule.nodes
    mass = v.T @ (w[:, None] * v)
    advection = v.T @ ((w * xi)[:, None] * v)
    # the integrands are symmetric in (i, j); symmetrize away roundoff
    mass = 0.5 * (mass + mass.T)
    advection = 0.5 * (advection + advection.T)
    cond = float(np.linalg.cond(mass))
    if not np.isfinite(cond) or cond > condition_limit:
        raise IllConditionedBasis(f"mass matrix condition number {cond:.3e}")
    try:
        factor = scipy.linalg.cho_factor(mass)
        kind = "cholesky"
    except scipy.linalg.LinAlgError:
        # POD bases give positive definite mass; fall back for indefinite input
        factor = scipy.linalg.lu_factor(mass)
        kind = "lu"
    return GalerkinMatrices(
        mass=mass,
        advection=advection,
        condition_number=cond,
        _factor=factor,
        _factor_kind=kind,
    )


@dataclass(frozen=True)
class CoefficientField:
    """Galerkin coefficients for one basis: coefficients[i, x] = u_hat^i(x)."""

    coefficients: np.ndarray
    time_stamp: float
    basis_id: str

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)
        if coeffs.ndim != 2:
            raise ValueError("coefficients must be (basis count, grid size)")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients contain non-finite entries")


def _coefficients_of(field_or_array) -> np.ndarray:
    if isinstance(field_or_array, CoefficientField):
        return field_or_array.coefficients
    return np.asarray(field_or_array, dtype=float)


def project_function(values_at_nodes: np.ndarray, basis: BasisSet,
                     matrices: GalerkinMatrices | None = None) -> np.ndarray:
    """Least-squares-in-measure projection: solve mass * c = E[u * Psi_j]."""
    values = np.asarray(values_at_nodes, dtype=float)
    if values.shape[0] != len(basis.rule):
        raise ValueError("values must be given at the basis's quadrature nodes")
    if matrices is None:
        matrices = assemble_matrices(basis)
    rhs = basis.values.T @ (basis.rule.weights[:, None] * values if values.ndim > 1
                            else basis.rule.weights * values)
    return matrices.solve(rhs)


def project_node_values(values: np.ndarray, basis: BasisSet,
                        matrices: GalerkinMatrices | None = None,
                        time_stamp: float = 0.0) -> CoefficientField:
    """Project per-node solution values u(x, xi_l), shape (K, M), onto the basis."""
    coeffs = project_function(values, basis, matrices)
    return CoefficientField(coefficients=coeffs, time_stamp=time_stamp, basis_id=basis.label)


def project_initial_condition(problem: PdeProblem, basis: BasisSet, grid: SpatialGrid,
                              matrices: GalerkinMatrices | None = None,
                              time_stamp: float = 0.0) -> CoefficientField:
    """Project a deterministic (constant-in-xi) initial condition onto the basis."""
    u0 = np.asarray(problem.initial_condition(grid.points), dtype=float)
    if matrices is None:
        matrices = assemble_matrices(basis)
    g = basis.values.T @ basis.rule.weights  # E[Psi_j]
    coeffs = np.outer(matrices.solve(g), u0)
    return CoefficientField(coefficients=coeffs, time_stamp=time_stamp, basis_id=basis.label)


def change_basis(field: CoefficientField, old_basis: BasisSet, new_basis: BasisSet,
                 new_matrices: GalerkinMatrices | None = None) -> CoefficientField:
    """Re-express coefficients in a new basis sharing the same quadrature rule."""
    if not old_basis.rule.same_nodes(new_basis.rule):
        raise ValueError("bases must share the quadrature rule")
    if field.basis_id != old_basis.label:
        raise ValueError("coefficient field is not expressed in old_basis")
    if new_matrices is None:
        new_matrices = assemble_matrices(new_basis)
    w = new_basis.rule.weights
    cross = new_basis.values.T @ (w[:, None] * old_basis.values)  # X[j, i] = E[Psi_old^i Psi_new^j]
    b = cross @ field.coefficients
    coeffs = new_matrices.solve(b)
    return CoefficientField(coefficients=coeffs, time_stamp=field.time_stamp,
                            basis_id=new_basis.label)


def galerkin_rhs(problem: PdeProblem, field, basis: BasisSet,
                 matrices: GalerkinMatrices, grid: SpatialGrid) -> np.ndarray:
    """Time derivative of the coefficients: mass-solve of A*u_x (+ projected
    reaction for the advection-reaction problem)."""
    coeffs = _coefficients_of(field)
    rhs = matrices.advection @ spatial_derivative(coeffs, grid)
    if problem.has_reaction:
        # reconstruct u at every quadrature node and project the nonlinearity
        u_nodes = basis.values @ coeffs
        reaction = problem.reaction(u_nodes)
        rhs = rhs + basis.values.T @ (basis.rule.weights[:, None] * reaction)
    return matrices.solve(rhs)


@dataclass(frozen=True)
class CoefficientTrajectory:
    """Coefficient snapshots at the output times of one window."""

    times: tuple
    coefficients: np.ndarray  # (n_times, N_b, M)
    basis_id: str

    def field_at(self, index: int) -> CoefficientField:
        return CoefficientField(coefficients=self.coefficients[index],
                                time_stamp=self.times[index], basis_id=self.basis_id)

    @property
    def final(self) -> CoefficientField:
        return self.field_at(len(self.times) - 1)


def propagate_window(problem: PdeProblem, field: CoefficientField, basis: BasisSet,
                     window: TimeWindow, grid: SpatialGrid, step: float,
                     matrices: GalerkinMatrices | None = None) -> CoefficientTrajectory:
    """RK4 on the mass-solved Galerkin system over one window."""
    if field.basis_id != basis.label:
        raise ValueError("coefficient field is not expressed in the given basis")
    if matrices is None:
        matrices = assemble_matrices(basis)

    # precompute the mass-solved operators once per window; each rhs call is
    # then plain matrix arithmetic (identical math to galerkin_rhs)
    solved_advection = matrices.solve(matrices.advection)
    if problem.has_reaction:
        v = basis.values
        solved_projector = matrices.solve((basis.rule.weights[:, None] * v).T)

        def rhs(t, coeffs):
            out = solved_advection @ spatial_derivative(coeffs, grid)
            out += solved_projector @ problem.reaction(v @ coeffs)
            return out
    else:
        def rhs(t, coeffs):
            return solved_advection @ spatial_derivative(coeffs, grid)

    states = integrate_ode(rhs, field.coefficients, window, step)
    return CoefficientTrajectory(times=window.output_times, coefficients=states,
                                 basis_id=basis.label)


@dataclass
class WindowRecord:
    """Everything solved for one time window."""

    window: TimeWindow
    basis: BasisSet
    trajectory: CoefficientTrajectory
    matrices: GalerkinMatrices | None = None

    def ensure_matrices(self) -> GalerkinMatrices:
        if self.matrices is None:
            self.matrices = assemble_matrices(self.basis)
        return self.matrices


@dataclass
class ExpansionArchive:
    """Ordered windows covering [t0, t_current], each with its own basis."""

    records: list = field(default_factory=list)

    def append(self, record: WindowRecord) -> None:
        if self.records:
            prev = self.records[-1].window
            if abs(prev.end - record.window.start) > 1e-9 * max(1.0, abs(prev.end)):
                raise ValueError("windows must be contiguous")
        self.records.append(record)

    @property
    def t_start(self) -> float:
        return self.records[0].window.start

    @property
    def t_end(self) -> float:
        return self.records[-1].window.end

    def locate(self, t: float) -> tuple[WindowRecord, int]:
        """Window containing t and the index of the nearest stored output time."""
        if not self.records:
            raise ValueError("archive is empty")
        eps = 1e-9 * max(1.0, abs(t))
        if t < self.t_start - eps or t > self.t_end + eps:
            raise ValueError(f"time {t} outside archive range [{self.t_start}, {self.t_end}]")
        for record in self.records:
            if t <= record.window.end + eps:
                times = np.asarray(record.trajectory.times)
                return record, int(np.argmin(np.abs(times - t)))
        return self.records[-1], len(self.records[-1].trajectory.times) - 1

    def coefficients_at(self, t: float) -> tuple[WindowRecord, np.ndarray]:
        record, idx = self.locate(t)
        return record, record.trajectory.coefficients[idx]

    def mean_square_expectation(self, x_index: int, t: float) -> float:
        record, coeffs = self.coefficients_at(t)
        u_hat = coeffs[:, x_index]
        return float(u_hat @ record.ensure_matrices().mass @ u_hat)

    def mean(self, x_index: int, t: float) -> float:
        record, coeffs = self.coefficients_at(t)
        g = record.basis.values.T @ record.basis.rule.weights
        return float(g @ coeffs[:, x_index])

    def reconstruct_at_nodes(self, t: float) -> np.ndarray:
        """Solution values u(x, xi_l) at the stored time nearest t, shape (K, M)."""
        record, coeffs = self.coefficients_at(t)
        return record.basis.reconstruct(coeffs)

    def all_output_times(self) -> np.ndarray:
        """Stored output times across windows, deduplicated at the seams."""
        times: list[float] = []
        for record in self.records:
            for t in record.trajectory.times:
                if not times or t > times[-1] + 1e-12:
                    times.append(float(t))
        return np.array(times)

    def statistic_series(self, x_index: int, statistic: str = "mean_square"):
        """Time series (times, values) of a statistic at one grid point."""
        fn = {"mean_square": self.mean_square_expectation, "mean": self.mean}[statistic]
        times = self.all_output_times()
        values = np.array([fn(x_index, t) for t in times])
        return times, values

    def basis_counts(self) -> np.ndarray:
        return np.array([record.basis.size for record in self.records])

    def to_json(self) -> str:
        rule = self.records[0].basis.rule
        payload = {
            "rule": {
                "nodes": rule.nodes.tolist(),
                "weights": rule.weights.tolist(),
                "interval": [rule.interval.lower, rule.interval.upper],
            },
            "windows": [
                {
                    "t_start": record.window.start,
                    "t_end": record.window.end,
                    "basis_values": record.basis.values.tolist(),
                    "singular_values": record.basis.singular_values.tolist(),
                    "times": list(record.trajectory.times),
                    "coefficients": record.trajectory.coefficients.tolist(),
                }
                for record in self.records
            ],
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "ExpansionArchive":
        payload = json.loads(text)
        interval = RandomInterval(*payload["rule"]["interval"])
        rule = QuadratureRule(
            nodes=np.array(payload["rule"]["nodes"]),
            weights=np.array(payload["rule"]["weights"]),
            interval=interval,
        )
        archive = cls()
        for item in payload["windows"]:
            window = TimeWindow(item["t_start"], item["t_end"], tuple(item["times"]))
            basis = BasisSet(
                values=np.array(item["basis_values"]),
                rule=rule,
                window=window,
                singular_values=np.array(item["singular_values"]),
            )
            trajectory = CoefficientTrajectory(
                times=tuple(item["times"]),
                coefficients=np.array(item["coefficients"]),
                basis_id=basis.label,
            )
            archive.append(WindowRecord(window=window, basis=basis, trajectory=trajectory))
        return archive


def mean_square_expectation(archive: ExpansionArchive, x_index: int, t: float) -> float:
    """E[u(x, t, .)^2] evaluated as u_hat^T * mass * u_hat at the grid point."""
    return archive.mean_square_expectation(x_index, t)


def mean(archive: ExpansionArchive, x_index: int, t: float) -> float:
    """E[u(x, t, .)] via the basis expectations E[Psi_i]."""
    return archive.mean(x_index, t)
