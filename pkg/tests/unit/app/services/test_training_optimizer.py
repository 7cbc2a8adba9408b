import pickle
from typing import Tuple

import numpy as np
import pytest

from app.models.config import GridSpec
from app.models.results import Optimum
from app.models.scenario import (
    EstimatorKind,
    FramePlan,
    Hypothesis,
    InputKind,
    Scenario,
    SensingModel,
)
from app.services.training_optimizer import TermTask, evaluate_term, optimize_training


@pytest.fixture
def template():
    return Scenario(frame=FramePlan(m=4, l_blocks=4))


@pytest.fixture
def small_grid():
    return GridSpec(m_values=[4, 6], mu0_values=[0.1, 0.3], mu1_values=[0.1, 0.5])


def _recording_mapper(calls):
    def mapper(fn, tasks):
        tasks = list(tasks)
        calls.append(tasks)
        return [fn(task) for task in tasks]

    return mapper


def _synthetic_term(task: TermTask) -> Tuple[float, float]:
    """Idle term peaks at mu0=0.3, busy term at mu1=0.5; both prefer small M."""
    m = task.scenario.frame.m
    if task.decision is Hypothesis.IDLE:
        return 1.0 - abs(task.scenario.energy.mu_idle - 0.3) - 0.01 * m, 0.01
    return 1.0 - abs(task.scenario.energy.mu_busy - 0.5) - 0.01 * m, 0.02


class TestTermTask:
    """Tests for the unit of work handed to workers."""

    def test_picklable(self, template):
        """Tasks cross process boundaries."""
        task = TermTask(
            template, Hypothesis.IDLE, InputKind.GAUSSIAN, 16, 4, 0, EstimatorKind.MMSE
        )
        assert pickle.loads(pickle.dumps(task)) == task

    def test_evaluate_term(self, template, mocker):
        """evaluate_term forwards every field to decision_rate_term."""
        term = mocker.patch(
            "app.services.training_optimizer.decision_rate_term", return_value=(0.4, 0.01)
        )
        task = TermTask(
            template, Hypothesis.BUSY, InputKind.BPSK, 16, 4, 9, EstimatorKind.LMMSE
        )
        assert evaluate_term(task) == (0.4, 0.01)
        term.assert_called_once_with(
            template, Hypothesis.BUSY, InputKind.BPSK, 16, 4, 9, EstimatorKind.LMMSE
        )


class TestOptimizeTraining:
    """Tests for the (M, μ0, μ1) grid search."""

    def test_finds_synthetic_optimum(self, template, small_grid, mocker):
        """The argmax combines the best μ0 and μ1 at the smallest M."""
        mocker.patch("app.services.training_optimizer.evaluate_term", _synthetic_term)
        optimum = optimize_training(template, small_grid, InputKind.GAUSSIAN)
        assert isinstance(optimum, Optimum)
        assert (optimum.m_star, optimum.mu0_star, optimum.mu1_star) == (4, 0.3, 0.5)
        assert optimum.rate == pytest.approx(2.0 - 0.08)
        assert optimum.std_error == pytest.approx(np.hypot(0.01, 0.02))
        assert optimum.rate_surface.shape == (2, 2, 2)

    def test_separable_task_count(self, template, small_grid):
        """Separable search evaluates each decision's term once per (M, μ_j)."""
        calls = []
        optimize_training(
            template, small_grid, InputKind.GAUSSIAN, 16, mapper=_recording_mapper(calls)
        )
        tasks = calls[0]
        assert len(tasks) == 2 * 2 + 2 * 2
        assert all(isinstance(task, TermTask) for task in tasks)
        assert {task.decision for task in tasks[:4]} == {Hypothesis.IDLE}
        assert {task.decision for task in tasks[4:]} == {Hypothesis.BUSY}

    def test_joint_matches_separable(self, template, small_grid):
        """Each term depends only on its own μ_j, so both searches agree exactly."""
        separable = optimize_training(template, small_grid, InputKind.GAUSSIAN, 32, seed=4)
        joint = optimize_training(
            template, small_grid, InputKind.GAUSSIAN, 32, seed=4, joint=True
        )
        assert np.allclose(separable.rate_surface.rates, joint.rate_surface.rates, atol=1e-12)
        assert (separable.m_star, separable.mu0_star, separable.mu1_star) == (
            joint.m_star,
            joint.mu0_star,
            joint.mu1_star,
        )

    def test_joint_task_count(self, template, small_grid):
        """Joint search evaluates both terms at every grid point."""
        calls = []
        optimize_training(
            template,
            small_grid,
            InputKind.GAUSSIAN,
            16,
            joint=True,
            mapper=_recording_mapper(calls),
        )
        assert len(calls[0]) == 2 * 2 * 2 * 2

    def test_ties_prefer_smaller_values(self, template, small_grid):
        """A flat surface returns the first grid point."""

        def flat(fn, tasks):
            return [(0.25, 0.0) for _ in tasks]

        optimum = optimize_training(template, small_grid, InputKind.BPSK, mapper=flat)
        assert (optimum.m_star, optimum.mu0_star, optimum.mu1_star) == (4, 0.1, 0.1)
        assert optimum.rate == pytest.approx(0.5)

    def test_never_busy_reports_first_mu1(self):
        """With Pr{Ĥ1} = 0 the rate ignores μ1 and μ1* is the first grid value."""
        template = Scenario(
            sensing=SensingModel(p_d=1.0, p_f=0.0, prior_busy=0.0),
            frame=FramePlan(m=4, l_blocks=4),
        )
        grid = GridSpec(m_values=[4], mu0_values=[0.1, 0.3], mu1_values=[0.2, 0.5, 0.8])
        optimum = optimize_training(template, grid, InputKind.GAUSSIAN, 64, seed=2)
        assert optimum.mu1_star == 0.2
        rates = optimum.rate_surface.rates
        assert np.all(rates == rates[:, :, :1])
        assert optimum.rate > 0.0

    def test_surface_coordinates(self, template, small_grid, mocker):
        """Surface axes are the sorted grid values."""
        mocker.patch("app.services.training_optimizer.evaluate_term", _synthetic_term)
        surface = optimize_training(template, small_grid, InputKind.GAUSSIAN).rate_surface
        assert list(surface.m_values) == [4, 6]
        assert list(surface.mu0_values) == [0.1, 0.3]
        assert list(surface.mu1_values) == [0.1, 0.5]
        # M=6, mu0=0.1, mu1=0.1: idle 1 - 0.2 - 0.06, busy 1 - 0.4 - 0.06
        assert surface.rates[1, 0, 0] == pytest.approx(0.74 + 0.54)
