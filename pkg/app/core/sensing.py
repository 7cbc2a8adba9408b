"""Sampling of true primary-user states and sensing decisions, one draw per frame."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.core.model import hypothesis_posterior
from app.models.scenario import Hypothesis, SensingModel


@dataclass(frozen=True)
class FrameState:
    true_state: Hypothesis
    decision: Hypothesis


def draw_frame_states(
    s: SensingModel, rng: np.random.Generator, size: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized frame draws.

    Returns boolean arrays (busy_truth, busy_decision). Two uniforms per frame are consumed
    in a fixed order, so sweeps over p_d / p_f with the same stream stay coupled.
    """
    uniforms = rng.random((2, size))
    busy_truth = uniforms[0] < s.prior_busy
    threshold = np.where(busy_truth, s.p_d, s.p_f)
    busy_decision = uniforms[1] < threshold
    return busy_truth, busy_decision


def draw_frame_state(s: SensingModel, rng: np.random.Generator) -> FrameState:
    busy_truth, busy_decision = draw_frame_states(s, rng, 1)
    return FrameState(
        true_state=Hypothesis.BUSY if busy_truth[0] else Hypothesis.IDLE,
        decision=Hypothesis.BUSY if busy_decision[0] else Hypothesis.IDLE,
    )


def draw_states_given_decision(
    s: SensingModel, decision: Hypothesis, rng: np.random.Generator, size: int
) -> np.ndarray:
    """True states (True = busy) drawn from Pr{H_i | Ĥ_j} for a fixed decision."""
    _, posterior_busy = hypothesis_posterior(s, decision)
    return rng.random(size) < posterior_busy
