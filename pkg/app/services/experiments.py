"""Experiment orchestration: MSE sweeps, rate sweeps and training optimization.

All parallelism lives here. Every task draws from random streams keyed by the experiment
seed, so tables do not depend on the number of workers or on scheduling order.
"""

import logging
import os
import time
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

from joblib import Parallel, delayed

from app.core.estimation import analytic_lmmse_mse, monte_carlo_mse
from app.core.exceptions import ConfigValidationError
from app.core.rates import block_rate
from app.models.config import ExperimentConfig, SweepVariable
from app.models.results import ResultTable
from app.models.scenario import EstimatorKind, Hypothesis, InputKind, Scenario
from app.services.training_optimizer import optimize_training

# Configure logging
logger = logging.getLogger(__name__)

MSE_VARIABLES = {
    SweepVariable.P_F,
    SweepVariable.P_D,
    SweepVariable.M,
    SweepVariable.SIGMA_RATIO,
}
RATE_VARIABLES = {
    SweepVariable.M,
    SweepVariable.MU0,
    SweepVariable.MU1,
    SweepVariable.SNR_IDLE_DB,
    SweepVariable.P_D,
    SweepVariable.P_F,
}
OPTIMIZE_VARIABLES = {
    SweepVariable.SNR_IDLE_DB,
    SweepVariable.P_D,
    SweepVariable.P_F,
    SweepVariable.SIGMA_RATIO,
}

SERIES_COLUMN = "series_value"

T = TypeVar("T")
R = TypeVar("R")


def default_workers() -> int:
    raw = os.getenv("COGPILOT_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning(f"Ignoring invalid COGPILOT_WORKERS value '{raw}'")
        return 1


Mapper = Callable[[Callable[[T], R], Iterable[T]], List[R]]


def make_mapper(workers: Optional[int] = None) -> Mapper:
    """Order-preserving map over a joblib process pool; plain map for a single worker."""
    n_jobs = workers if workers is not None else default_workers()

    def mapper(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        items = list(items)
        if n_jobs <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        return Parallel(n_jobs=n_jobs)(delayed(fn)(item) for item in items)

    return mapper


@dataclass(frozen=True)
class SweepPoint:
    series_value: Optional[float]
    sweep_value: float
    config: ExperimentConfig


def _sweep_points(config: ExperimentConfig, allowed: set) -> List[SweepPoint]:
    if config.sweep is None:
        raise ConfigValidationError("A sweep is required for this experiment", key="sweep")
    if config.sweep.variable not in allowed:
        names = ", ".join(sorted(v.value for v in allowed))
        raise ConfigValidationError(
            f"Sweep variable '{config.sweep.variable.value}' is not supported here "
            f"(expected one of: {names})",
            key="sweep.variable",
        )
    series_values: Sequence[Optional[float]] = (
        config.series.values if config.series is not None else [None]
    )
    points = []
    for series_value in series_values:
        base = config
        if series_value is not None and config.series is not None:
            base = config.with_parameter(config.series.name.value, series_value)
        for value in config.sweep.values():
            swept = base.with_parameter(config.sweep.variable.value, value)
            points.append(SweepPoint(series_value, value, swept))
    return points


def _columns(config: ExperimentConfig, *names: str) -> List[str]:
    leading = [SERIES_COLUMN] if config.series is not None else []
    variable = [config.sweep.variable.value] if config.sweep is not None else []
    return leading + variable + list(names)


def _leading(config: ExperimentConfig, point: SweepPoint) -> List:
    cells: List = [point.series_value] if config.series is not None else []
    if config.sweep is not None:
        cells.append(point.sweep_value)
    return cells


@dataclass(frozen=True)
class MseTask:
    scenario: Scenario
    kind: EstimatorKind
    trials: int
    seed: int
    decision: Optional[Hypothesis]


def evaluate_mse(task: MseTask) -> Tuple[float, float]:
    return monte_carlo_mse(task.scenario, task.kind, task.trials, task.seed, task.decision)


def run_mse_sweep(config: ExperimentConfig, workers: Optional[int] = None) -> ResultTable:
    """One row per sweep value per estimator, with the analytic L-MMSE MSE alongside."""
    points = _sweep_points(config, MSE_VARIABLES)
    decision = Hypothesis.IDLE if config.sensed_idle_only else None
    started = time.perf_counter()
    logger.info(f"Starting MSE sweep '{config.name}' with {len(points)} points")

    scenarios = [point.config.scenario() for point in points]
    tasks = [
        MseTask(scenario, kind, config.trials, config.seed, decision)
        for scenario in scenarios
        for kind in config.estimators
    ]
    results = make_mapper(workers)(evaluate_mse, tasks)

    table = ResultTable(
        columns=_columns(config, "estimator", "mse", "std_error", "lmmse_analytic_mse"),
        title=config.name,
    )
    cursor = iter(results)
    for point, scenario in zip(points, scenarios):
        analytic = analytic_lmmse_mse(scenario, decision)
        for kind in config.estimators:
            mse, std_error = next(cursor)
            logger.debug(f"{point.sweep_value} {kind.value}: {mse:.6g} ± {std_error:.2g}")
            table.rows.append(_leading(config, point) + [kind.value, mse, std_error, analytic])

    logger.info(
        f"MSE sweep '{config.name}' finished in {time.perf_counter() - started:.1f}s "
        f"({len(table.rows)} rows)"
    )
    return table


@dataclass(frozen=True)
class RateTask:
    scenario: Scenario
    input_kind: InputKind
    outer_samples: int
    inner_samples: int
    seed: int
    kind: EstimatorKind


def evaluate_rate(task: RateTask) -> Tuple[float, float]:
    point = block_rate(
        task.scenario,
        task.input_kind,
        task.outer_samples,
        task.inner_samples,
        task.seed,
        task.kind,
    )
    return point.rate, point.std_error


def run_rate_sweep(config: ExperimentConfig, workers: Optional[int] = None) -> ResultTable:
    """One row per sweep value per input kind."""
    points = _sweep_points(config, RATE_VARIABLES)
    started = time.perf_counter()
    logger.info(f"Starting rate sweep '{config.name}' with {len(points)} points")

    tasks = [
        RateTask(
            point.config.scenario(),
            input_kind,
            config.trials,
            config.inner_samples,
            config.seed,
            config.rate_estimator,
        )
        for point in points
        for input_kind in config.inputs
    ]
    results = make_mapper(workers)(evaluate_rate, tasks)

    table = ResultTable(columns=_columns(config, "input", "rate", "std_error"), title=config.name)
    cursor = iter(results)
    for point in points:
        for input_kind in config.inputs:
            rate, std_error = next(cursor)
            table.rows.append(_leading(config, point) + [input_kind.value, rate, std_error])

    logger.info(
        f"Rate sweep '{config.name}' finished in {time.perf_counter() - started:.1f}s "
        f"({len(table.rows)} rows)"
    )
    return table


def run_optimize(config: ExperimentConfig, workers: Optional[int] = None) -> ResultTable:
    """Optimum (M*, μ0*, μ1*) per input kind, followed by the rate surface it was taken from.

    With a sweep, one optimization is run per sweep value.
    """
    if config.sweep is not None:
        points = _sweep_points(config, OPTIMIZE_VARIABLES)
    else:
        points = [SweepPoint(None, 0.0, config)]
    mapper = make_mapper(workers)
    started = time.perf_counter()
    logger.info(f"Starting optimization '{config.name}' over {len(points)} configuration(s)")

    table = ResultTable(
        columns=_columns(config, "input", "record", "m", "mu0", "mu1", "rate", "std_error"),
        title=config.name,
    )
    for point in points:
        template = point.config.scenario()
        for input_kind in config.inputs:
            optimum = optimize_training(
                template,
                config.grid,
                input_kind,
                config.trials,
                config.inner_samples,
                config.seed,
                config.rate_estimator,
                joint=config.grid.joint,
                mapper=mapper,
            )
            leading = _leading(config, point) + [input_kind.value]
            table.rows.append(
                leading
                + [
                    "optimum",
                    optimum.m_star,
                    optimum.mu0_star,
                    optimum.mu1_star,
                    optimum.rate,
                    optimum.std_error,
                ]
            )
            for surface_point in optimum.rate_surface.points():
                table.rows.append(
                    leading
                    + [
                        "surface",
                        surface_point.m,
                        surface_point.mu_idle,
                        surface_point.mu_busy,
                        surface_point.rate,
                        surface_point.std_error,
                    ]
                )

    logger.info(
        f"Optimization '{config.name}' finished in {time.perf_counter() - started:.1f}s"
    )
    return table
