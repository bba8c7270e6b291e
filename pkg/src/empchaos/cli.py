"""Configuration-driven experiment runner.

Exposes every solver behind one command-line interface, writes plot-ready CSV
and JSON artifacts, times the pipeline stages, runs wall-clock scaling studies
over a set of final times, and compares statistic time series between runs.

Exit codes: 0 success, 1 validation error, 2 solver divergence, 3 comparison
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, driver, gpc, montecarlo, pde_core, random_space
from .galerkin import IllConditionedBasis
from .pde_core import IntegrationDiverged

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "run_experiment",
    "run_scaling_study",
    "compare_series",
    "write_series",
    "write_scaling_artifacts",
    "main",
]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DIVERGED = 2
EXIT_COMPARISON = 3

_PROBLEMS = {
    "wave": pde_core.wave_problem,
    "advection-reaction": pde_core.advection_reaction_problem,
}
_SOLVERS = ("empirical", "empirical-evolve", "gpc", "mc", "exact")
_SCHEDULES = {
    "always-resample": driver.always_resample,
    "alternating": driver.alternating_schedule,
}
# node count and window length default per problem when left unset
_DEFAULT_NODES = {"wave": 120, "advection-reaction": 300}
_DEFAULT_WINDOW = {"wave": 1.0, "advection-reaction": 2.0}


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the bad field."""


@dataclass
class ExperimentConfig:
    """One experiment: problem, solver, discretization, and output location."""

    problem: str = "wave"
    solver: str = "empirical"
    grid_size: int = 256
    node_count: int | None = None
    order: int = 10
    order_cap: int = gpc.ORDER_CAP
    window_length: float | None = None
    threshold: float = 1e-4
    basis_cap: int | None = None
    schedule: str = "alternating"
    t_final: float = 10.0
    t_start: float = 0.0
    step: float | None = None
    seed: int = 0
    sample_count: int = 10_000
    outputs_per_window: int = 11
    x_index: int = 0
    output_dir: str = "results"

    def validate(self) -> None:
        if self.problem not in _PROBLEMS:
            raise ConfigError(f"problem: unknown value {self.problem!r}, "
                              f"expected one of {sorted(_PROBLEMS)}")
        if self.solver not in _SOLVERS:
            raise ConfigError(f"solver: unknown value {self.solver!r}, "
                              f"expected one of {list(_SOLVERS)}")
        if self.schedule not in _SCHEDULES:
            raise ConfigError(f"schedule: unknown value {self.schedule!r}, "
                              f"expected one of {sorted(_SCHEDULES)}")
        if self.grid_size < 3:
            raise ConfigError("grid_size: must be at least 3")
        if self.node_count is not None and self.node_count < 2:
            raise ConfigError("node_count: must be at least 2")
        if self.order < 1:
            raise ConfigError("order: must be at least 1")
        if self.window_length is not None and self.window_length <= 0:
            raise ConfigError("window_length: must be positive")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("threshold: must lie in (0, 1)")
        if self.basis_cap is not None and self.basis_cap < 1:
            raise ConfigError("basis_cap: must be at least 1")
        if self.t_final <= self.t_start:
            raise ConfigError("t_final: must exceed t_start")
        if self.step is not None and self.step <= 0:
            raise ConfigError("step: must be positive")
        if self.sample_count < 1:
            raise ConfigError("sample_count: must be at least 1")
        if self.outputs_per_window < 2:
            raise ConfigError("outputs_per_window: must be at least 2")
        if self.x_index < 0 or self.x_index >= self.grid_size:
            raise ConfigError("x_index: must lie in [0, grid_size)")
        if self.solver == "exact" and self.problem != "wave":
            raise ConfigError("solver: exact statistics are only available for "
                              "the wave problem")
        if self.solver == "empirical-evolve" and self.problem != "wave":
            raise ConfigError("solver: basis evolution is only available for "
                              "the wave problem")

    @property
    def resolved_node_count(self) -> int:
        return self.node_count if self.node_count is not None else _DEFAULT_NODES[self.problem]

    @property
    def resolved_window_length(self) -> float:
        if self.window_length is not None:
            return self.window_length
        return _DEFAULT_WINDOW[self.problem]

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path) as handle:
            try:
                payload = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path}: invalid JSON ({exc})") from exc
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f"config file {path}: unknown fields {unknown}")
        return cls(**payload)


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config from an optional JSON file with flag values overriding fields."""
    config = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    for field_obj in dataclasses.fields(ExperimentConfig):
        value = getattr(args, field_obj.name, None)
        if value is not None:
            setattr(config, field_obj.name, value)
    config.validate()
    return config


def _format(value: float) -> str:
    return f"{value:.17g}"


def _write_text(path: str, text: str) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def write_series(path: str, times, values, stderr=None) -> None:
    if stderr is None:
        lines = ["t,value"]
        lines += [f"{_format(t)},{_format(v)}" for t, v in zip(times, values)]
    else:
        lines = ["t,value,stderr"]
        lines += [f"{_format(t)},{_format(v)},{_format(s)}"
                  for t, v, s in zip(times, values, stderr)]
    _write_text(path, "\n".join(lines) + "\n")


def _read_series(path: str):
    """Parse a statistic CSV; returns (times, values) ignoring any stderr column."""
    with open(path) as handle:
        header = handle.readline().strip()
        if not header.startswith("t,value"):
            raise ConfigError(f"{path}: expected header 't,value[,stderr]', got {header!r}")
        rows = [line.split(",") for line in handle if line.strip()]
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    times = np.array([float(r[0]) for r in rows])
    values = np.array([float(r[1]) for r in rows])
    return times, values


def _output_times(config: ExperimentConfig) -> np.ndarray:
    """The output-time grid the windowed solver would produce (deduplicated)."""
    cadence_count = config.outputs_per_window
    length = config.resolved_window_length
    times = [config.t_start]
    t = config.t_start
    while t < config.t_final - 1e-12:
        end = min(t + length, config.t_final)
        times.extend(np.linspace(t, end, cadence_count)[1:])
        t = end
    return np.asarray(times)


def _empirical_artifacts(config: ExperimentConfig, archive, out: str) -> list[str]:
    files = []
    times, ms = archive.statistic_series(config.x_index, "mean_square")
    write_series(os.path.join(out, "mean_square.csv"), times, ms)
    files.append("mean_square.csv")
    _, mean = archive.statistic_series(config.x_index, "mean")
    write_series(os.path.join(out, "mean.csv"), times, mean)
    files.append("mean.csv")

    count_lines = ["window,t_start,t_end,basis_count"]
    for index, record in enumerate(archive.records):
        count_lines.append(f"{index},{_format(record.window.start)},"
                           f"{_format(record.window.end)},{record.basis.size}")
        if record.basis.singular_values.size:
            sigma = record.basis.singular_values
            sv_lines = ["index,sigma,sigma_scaled"]
            sv_lines += [f"{i},{_format(s)},{_format(s / sigma[0])}"
                         for i, s in enumerate(sigma)]
            name = f"singular_values_window_{index:04d}.csv"
            _write_text(os.path.join(out, name), "\n".join(sv_lines) + "\n")
            files.append(name)
    _write_text(os.path.join(out, "basis_counts.csv"), "\n".join(count_lines) + "\n")
    files.append("basis_counts.csv")

    _write_text(os.path.join(out, "archive.json"), archive.to_json())
    files.append("archive.json")
    return files


def _solve(config: ExperimentConfig, out: str) -> tuple[list[str], dict]:
    """Run the configured solver, write its artifacts, return (files, timings)."""
    problem = _PROBLEMS[config.problem]()
    grid = pde_core.SpatialGrid(config.grid_size)
    times = _output_times(config)

    if config.solver == "exact":
        tic = time.perf_counter()
        x = grid.points[config.x_index]
        ms = pde_core.wave_exact_mean_square(times, x)
        mean = pde_core.wave_exact_mean(times, x)
        write_series(os.path.join(out, "mean_square.csv"), times, ms)
        write_series(os.path.join(out, "mean.csv"), times, mean)
        seconds = time.perf_counter() - tic
        return ["mean_square.csv", "mean.csv"], {"evaluation": seconds}

    if config.solver == "gpc":
        window = pde_core.TimeWindow(config.t_start, config.t_final, tuple(times))
        rule = gpc.default_rule(config.resolved_node_count)
        step = config.step if config.step is not None else pde_core.default_step(grid)
        tic = time.perf_counter()
        system = gpc.solve_gpc(problem, config.order, grid, window, step, rule,
                               order_cap=config.order_cap)
        propagation = time.perf_counter() - tic
        tic = time.perf_counter()
        write_series(os.path.join(out, "mean_square.csv"), times,
                      gpc.mean_square_series(system, config.x_index))
        write_series(os.path.join(out, "mean.csv"), times,
                      gpc.mean_series(system, config.x_index))
        export = time.perf_counter() - tic
        return (["mean_square.csv", "mean.csv"],
                {"propagation": propagation, "export": export})

    if config.solver == "mc":
        window = pde_core.TimeWindow(config.t_start, config.t_final, tuple(times))
        mc_config = montecarlo.McConfig(
            problem=problem, grid=grid, window=window,
            sample_count=config.sample_count, seed=config.seed, step=config.step,
        )
        tic = time.perf_counter()
        result = montecarlo.mc_statistics(mc_config)
        seconds = time.perf_counter() - tic
        tic = time.perf_counter()
        t, ms, ms_err = result.series(config.x_index, "mean_square")
        write_series(os.path.join(out, "mean_square.csv"), t, ms, ms_err)
        t, mean, mean_err = result.series(config.x_index, "mean")
        write_series(os.path.join(out, "mean.csv"), t, mean, mean_err)
        export = time.perf_counter() - tic
        return ["mean_square.csv", "mean.csv"], {"sampling": seconds, "export": export}

    # empirical and empirical-evolve
    rule = random_space.trapezoid_rule(
        random_space.chebyshev_nodes(config.resolved_node_count))
    schedule = (driver.always_resample if config.solver == "empirical"
                else _SCHEDULES[config.schedule])
    emp_config = driver.EmpiricalConfig(
        problem=problem, grid=grid, rule=rule,
        window_length=config.resolved_window_length,
        t_final=config.t_final, t_start=config.t_start,
        threshold=config.threshold, basis_cap=config.basis_cap,
        step=config.step, outputs_per_window=config.outputs_per_window,
        schedule=schedule,
    )
    archive, timings = driver.run_schedule(emp_config)
    stage_seconds = timings.as_dict()
    tic = time.perf_counter()
    files = _empirical_artifacts(config, archive, out)
    stage_seconds["export"] = time.perf_counter() - tic
    return files, stage_seconds


def run_experiment(config: ExperimentConfig) -> int:
    """Run one configured solve and write the result bundle to output_dir."""
    config.validate()
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    manifest = {
        "version": __version__,
        "config": dataclasses.asdict(config),
        "status": "ok",
        "files": [],
        "stage_seconds": {},
        "total_seconds": 0.0,
    }
    tic = time.perf_counter()
    try:
        files, stage_seconds = _solve(config, out)
    except (IntegrationDiverged, IllConditionedBasis) as exc:
        manifest["status"] = "solver-error"
        manifest["error"] = str(exc)
        manifest["total_seconds"] = time.perf_counter() - tic
        _write_text(os.path.join(out, "manifest.json"),
                    json.dumps(manifest, indent=2) + "\n")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    manifest["total_seconds"] = time.perf_counter() - tic
    manifest["files"] = files
    manifest["stage_seconds"] = stage_seconds
    _write_text(os.path.join(out, "manifest.json"),
                json.dumps(manifest, indent=2) + "\n")
    return EXIT_OK


def compare_series(path_a: str, path_b: str, tolerance: float) -> dict:
    """Max-abs and RMS deviation over the overlapping time range of two CSVs.

    Series B is linearly interpolated onto A's time points inside the overlap.
    """
    times_a, values_a = _read_series(path_a)
    times_b, values_b = _read_series(path_b)
    lo = max(times_a.min(), times_b.min())
    hi = min(times_a.max(), times_b.max())
    if lo > hi:
        raise ConfigError("series have disjoint time ranges")
    inside = (times_a >= lo - 1e-12) & (times_a <= hi + 1e-12)
    t = times_a[inside]
    a = values_a[inside]
    b = np.interp(t, times_b, values_b)
    deviation = np.abs(a - b)
    max_abs = float(deviation.max())
    return {
        "series_a": path_a,
        "series_b": path_b,
        "t_overlap": [float(lo), float(hi)],
        "points": int(t.size),
        "max_abs": max_abs,
        "rms": float(np.sqrt(np.mean(deviation**2))),
        "tolerance": float(tolerance),
        "passed": bool(max_abs <= tolerance),
    }


def _fit_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line fit; returns (slope, intercept, r_squared)."""
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    residual = np.sum((y - predicted) ** 2)
    total = np.sum((y - np.mean(y)) ** 2)
    r_squared = 1.0 - residual / total if total > 0 else 1.0
    return float(slope), float(intercept), float(r_squared)


def run_scaling_study(config: ExperimentConfig, horizons, with_gpc: bool = True,
                      order_factor: float = 1.1) -> dict:
    """Wall-clock scaling of the empirical solver (and optionally gPC) vs t_final.

    The gPC order grows proportionally to the horizon so both methods track a
    comparable accuracy target as the integration time increases.
    """
    horizons = sorted(float(t) for t in horizons)
    if len(horizons) < 3:
        raise ConfigError("horizons: need at least 3 values for a scaling fit")
    if any(t <= config.t_start for t in horizons):
        raise ConfigError("horizons: every value must exceed t_start")
    config.validate()

    problem = _PROBLEMS[config.problem]()
    grid = pde_core.SpatialGrid(config.grid_size)
    rule = random_space.trapezoid_rule(
        random_space.chebyshev_nodes(config.resolved_node_count))
    step = config.step if config.step is not None else pde_core.default_step(grid)

    rows = []
    for t_final in horizons:
        emp_config = driver.EmpiricalConfig(
            problem=problem, grid=grid, rule=rule,
            window_length=config.resolved_window_length,
            t_final=t_final, t_start=config.t_start,
            threshold=config.threshold, basis_cap=config.basis_cap,
            step=step, outputs_per_window=config.outputs_per_window,
        )
        tic = time.perf_counter()
        archive, _ = driver.run_empirical_chaos(emp_config)
        emp_seconds = time.perf_counter() - tic
        row = {
            "t_final": t_final,
            "empirical_seconds": emp_seconds,
            "max_basis_count": int(max(archive.basis_counts())),
        }
        if with_gpc:
            order = max(1, int(np.ceil(order_factor * t_final)))
            window = pde_core.TimeWindow(config.t_start, t_final)
            tic = time.perf_counter()
            gpc.solve_gpc(problem, order, grid, window, step, rule,
                          order_cap=max(config.order_cap, order))
            row["gpc_seconds"] = time.perf_counter() - tic
            row["gpc_order"] = order
        rows.append(row)

    t = np.array([row["t_final"] for row in rows])
    emp = np.array([row["empirical_seconds"] for row in rows])
    slope, intercept, r_squared = _fit_line(t, emp)
    report = {
        "rows": rows,
        "empirical_fit": {"slope": slope, "intercept": intercept,
                          "r_squared": r_squared},
    }
    if with_gpc:
        g = np.array([row["gpc_seconds"] for row in rows])
        exponent, _, gpc_r2 = _fit_line(np.log(t), np.log(g))
        gaps = g - emp
        report["gpc_fit"] = {"exponent": exponent, "r_squared": gpc_r2}
        report["crossover_exists"] = bool(np.min(gaps) < 0 < np.max(gaps))
    return report


def write_scaling_artifacts(report: dict, out: str) -> None:
    os.makedirs(out, exist_ok=True)
    rows = report["rows"]
    with_gpc = "gpc_seconds" in rows[0]
    header = "t_final,empirical_seconds,max_basis_count"
    if with_gpc:
        header += ",gpc_seconds,gpc_order"
    lines = [header]
    for row in rows:
        line = (f"{_format(row['t_final'])},{_format(row['empirical_seconds'])},"
                f"{row['max_basis_count']}")
        if with_gpc:
            line += f",{_format(row['gpc_seconds'])},{row['gpc_order']}"
        lines.append(line)
    _write_text(os.path.join(out, "scaling.csv"), "\n".join(lines) + "\n")
    _write_text(os.path.join(out, "scaling_report.json"),
                json.dumps(report, indent=2) + "\n")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--problem", choices=sorted(_PROBLEMS))
    parser.add_argument("--solver", choices=list(_SOLVERS))
    parser.add_argument("--grid-size", dest="grid_size", type=int)
    parser.add_argument("--node-count", dest="node_count", type=int)
    parser.add_argument("--order", type=int)
    parser.add_argument("--order-cap", dest="order_cap", type=int)
    parser.add_argument("--window-length", dest="window_length", type=float)
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--basis-cap", dest="basis_cap", type=int)
    parser.add_argument("--schedule", choices=sorted(_SCHEDULES))
    parser.add_argument("--t-final", dest="t_final", type=float)
    parser.add_argument("--t-start", dest="t_start", type=float)
    parser.add_argument("--step", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--sample-count", dest="sample_count", type=int)
    parser.add_argument("--outputs-per-window", dest="outputs_per_window", type=int)
    parser.add_argument("--x-index", dest="x_index", type=int)
    parser.add_argument("--output-dir", dest="output_dir")


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors share the validation exit code."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="empchaos",
        description="Empirical chaos expansion experiment runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run one solver and export artifacts")
    _add_config_flags(run_parser)

    exact_parser = sub.add_parser(
        "exact", help="export the closed-form wave statistics")
    _add_config_flags(exact_parser)

    scaling = sub.add_parser(
        "scaling-study", help="wall-clock scaling over several final times")
    _add_config_flags(scaling)
    scaling.add_argument("--horizons", type=float, nargs="+", required=True,
                         help="final integration times (at least 3)")
    scaling.add_argument("--no-gpc", action="store_true",
                         help="skip the gPC baseline timings")
    scaling.add_argument("--order-factor", type=float, default=1.1,
                         help="gPC order per unit of horizon (default 1.1)")

    cmp_parser = sub.add_parser("compare", help="compare two statistic CSVs")
    cmp_parser.add_argument("series_a")
    cmp_parser.add_argument("series_b")
    cmp_parser.add_argument("--tolerance", type=float, default=1e-2)
    cmp_parser.add_argument("--report", help="optional path for the JSON report")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.command == "compare":
            report = compare_series(args.series_a, args.series_b, args.tolerance)
            text = json.dumps(report, indent=2)
            print(text)
            if args.report:
                _write_text(args.report, text + "\n")
            return EXIT_OK if report["passed"] else EXIT_COMPARISON

        if args.command == "scaling-study":
            config = _build_config(args)
            report = run_scaling_study(config, args.horizons,
                                       with_gpc=not args.no_gpc,
                                       order_factor=args.order_factor)
            write_scaling_artifacts(report, config.output_dir)
            print(json.dumps({k: v for k, v in report.items() if k != "rows"},
                             indent=2))
            return EXIT_OK

        if args.command == "exact":
            args.solver = "exact"
        config = _build_config(args)
        return run_experiment(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
