import logging
import time
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np

from app.core.rates import DEFAULT_INNER_SAMPLES, DEFAULT_OUTER_SAMPLES, decision_rate_term
from app.models.config import GridSpec
from app.models.results import Optimum, RateSurface
from app.models.scenario import EstimatorKind, Hypothesis, InputKind, Scenario

# Configure logging
logger = logging.getLogger(__name__)

Mapper = Callable[..., Iterable[Tuple[float, float]]]


@dataclass(frozen=True)
class TermTask:
    """One evaluation of Pr{Ĥj}(1/M)Σ_k E[I_k,j]; picklable so a process pool can run it."""

    scenario: Scenario
    decision: Hypothesis
    input_kind: InputKind
    outer_samples: int
    inner_samples: int
    seed: int
    kind: EstimatorKind


def evaluate_term(task: TermTask) -> Tuple[float, float]:
    return decision_rate_term(
        task.scenario,
        task.decision,
        task.input_kind,
        task.outer_samples,
        task.inner_samples,
        task.seed,
        task.kind,
    )


def _configure(template: Scenario, m: int, mu0: float, mu1: float) -> Scenario:
    return template.with_frame(m=m).with_energy(mu_idle=mu0, mu_busy=mu1)


def optimize_training(
    template: Scenario,
    grid: GridSpec,
    input_kind: InputKind,
    outer_samples: int = DEFAULT_OUTER_SAMPLES,
    inner_samples: int = DEFAULT_INNER_SAMPLES,
    seed: int = 0,
    kind: EstimatorKind = EstimatorKind.MMSE,
    joint: bool = False,
    mapper: Optional[Mapper] = None,
) -> Optimum:
    """Grid search for the (M, μ0, μ1) maximizing the block rate.

    The objective is a sum of one term per sensing decision, each depending on its own μ_j,
    so by default the idle term is swept over μ0 and the busy term over μ1 separately and the
    surface is assembled from the two. ``joint=True`` evaluates every (μ0, μ1) pair instead.
    Every grid point uses the same seed, so comparisons share random numbers.
    """
    mapper = mapper or map
    m_values = grid.m_grid()
    mu0_values = grid.mu0_grid()
    mu1_values = grid.mu1_grid()
    shape = (len(m_values), len(mu0_values), len(mu1_values))
    started = time.perf_counter()
    logger.info(
        f"Optimizing training ({input_kind.value}, {'joint' if joint else 'separable'}) "
        f"over {shape[0]}x{shape[1]}x{shape[2]} grid points"
    )

    def task(scenario: Scenario, decision: Hypothesis) -> TermTask:
        return TermTask(
            scenario, decision, input_kind, outer_samples, inner_samples, seed, kind
        )

    rates = np.zeros(shape)
    variances = np.zeros(shape)
    if joint:
        tasks: List[TermTask] = []
        for m in m_values:
            for mu0 in mu0_values:
                for mu1 in mu1_values:
                    scenario = _configure(template, m, mu0, mu1)
                    tasks.append(task(scenario, Hypothesis.IDLE))
                    tasks.append(task(scenario, Hypothesis.BUSY))
        results = list(mapper(evaluate_term, tasks))
        for flat in range(rates.size):
            (idle, idle_se), (busy, busy_se) = results[2 * flat], results[2 * flat + 1]
            index = np.unravel_index(flat, shape)
            rates[index] = idle + busy
            variances[index] = idle_se**2 + busy_se**2
    else:
        idle_tasks = [
            task(_configure(template, m, mu0, mu1_values[0]), Hypothesis.IDLE)
            for m in m_values
            for mu0 in mu0_values
        ]
        busy_tasks = [
            task(_configure(template, m, mu0_values[0], mu1), Hypothesis.BUSY)
            for m in m_values
            for mu1 in mu1_values
        ]
        results = list(mapper(evaluate_term, idle_tasks + busy_tasks))
        idle = np.array(results[: len(idle_tasks)]).reshape(shape[0], shape[1], 2)
        busy = np.array(results[len(idle_tasks) :]).reshape(shape[0], shape[2], 2)
        rates = idle[:, :, None, 0] + busy[:, None, :, 0]
        variances = idle[:, :, None, 1] ** 2 + busy[:, None, :, 1] ** 2

    surface = RateSurface(
        m_values=np.asarray(m_values),
        mu0_values=np.asarray(mu0_values),
        mu1_values=np.asarray(mu1_values),
        rates=rates,
        std_errors=np.sqrt(variances),
    )
    a, b, c = surface.argmax()
    best = surface.point(a, b, c)
    logger.info(
        f"Optimum M*={best.m}, mu0*={best.mu_idle:.2f}, mu1*={best.mu_busy:.2f}: "
        f"{best.rate:.4f} bits/symbol ({time.perf_counter() - started:.1f}s)"
    )
    return Optimum(
        m_star=best.m,
        mu0_star=best.mu_idle,
        mu1_star=best.mu_busy,
        rate=best.rate,
        std_error=best.std_error,
        rate_surface=surface,
    )
