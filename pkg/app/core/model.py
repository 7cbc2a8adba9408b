"""Probability and energy bookkeeping shared by the estimation and rate modules."""

import math
from typing import Optional, Tuple

from app.core.exceptions import DegenerateDecisionError
from app.models.scenario import (
    EnergyPolicy,
    FramePlan,
    Hypothesis,
    NoiseParams,
    SensingModel,
)


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    if value <= 0.0:
        return -math.inf
    return 10.0 * math.log10(value)


def joint_probability(s: SensingModel, true_state: Hypothesis, decision: Hypothesis) -> float:
    """Pr{H_i} Pr{Ĥ_j | H_i}."""
    prior = s.prior_busy if true_state is Hypothesis.BUSY else s.prior_idle
    p_busy_decision = s.prob_busy_decision_given(true_state)
    likelihood = p_busy_decision if decision is Hypothesis.BUSY else 1.0 - p_busy_decision
    return prior * likelihood


def sensing_marginals(s: SensingModel) -> Tuple[float, float]:
    """Return (Pr{Ĥ0}, Pr{Ĥ1}) by total probability over the true state."""
    idle = s.prior_idle * (1.0 - s.p_f) + s.prior_busy * (1.0 - s.p_d)
    busy = s.prior_idle * s.p_f + s.prior_busy * s.p_d
    return idle, busy


def decision_probability(s: SensingModel, decision: Hypothesis) -> float:
    return sensing_marginals(s)[decision.index]


def hypothesis_posterior(s: SensingModel, decision: Hypothesis) -> Tuple[float, float]:
    """Return (Pr{H0 | Ĥj}, Pr{H1 | Ĥj}) from Bayes' rule, without conditioning on pilots."""
    marginal = decision_probability(s, decision)
    if marginal <= 0.0:
        raise DegenerateDecisionError(
            f"Sensing decision '{decision.value}' has zero probability "
            f"(p_d={s.p_d}, p_f={s.p_f}, prior_busy={s.prior_busy})"
        )
    busy = joint_probability(s, Hypothesis.BUSY, decision) / marginal
    busy = min(max(busy, 0.0), 1.0)
    return 1.0 - busy, busy


def noise_variance(n: NoiseParams, true_state: Hypothesis) -> float:
    """σ_w,i²: noise only when idle, noise plus primary interference when busy."""
    if true_state is Hypothesis.BUSY:
        return n.sigma_n2 + n.sigma_s2
    return n.sigma_n2


def effective_noise_variance(n: NoiseParams, posterior_busy: float) -> float:
    """Posterior-averaged disturbance σ_n² + Pr{H1|Ĥj}σ_s² seen by the linear estimator."""
    return n.sigma_n2 + posterior_busy * n.sigma_s2


def block_energy(e: EnergyPolicy, f: FramePlan, n: NoiseParams, decision: Hypothesis) -> float:
    """Total energy M·P̄_j/B available in one block of M symbols."""
    return f.m * e.snr(decision) * n.sigma_n2


def pilot_energy(e: EnergyPolicy, f: FramePlan, n: NoiseParams, decision: Hypothesis) -> float:
    """E_t,j = μ_j M P̄_j / B, unless the policy pins the pilot energy directly."""
    fixed = e.fixed_pilot_energy(decision)
    if fixed is not None:
        return fixed
    return e.mu(decision) * block_energy(e, f, n, decision)


def data_energy(e: EnergyPolicy, f: FramePlan, n: NoiseParams, decision: Hypothesis) -> float:
    """E_d,j = (1-μ_j) M P̄_j / (B(M-1)), the remaining block energy split over data symbols."""
    return (1.0 - e.mu(decision)) * block_energy(e, f, n, decision) / (f.m - 1)


def energy_policy_from_db(
    snr_idle_db: float,
    snr_busy_db: Optional[float],
    n: NoiseParams,
    mu_idle: float = 0.1,
    mu_busy: float = 0.1,
    pilot_energy_idle: Optional[float] = None,
    pilot_energy_busy: Optional[float] = None,
) -> EnergyPolicy:
    """Build an EnergyPolicy from SNR0 = P̄0/(Bσ_n²) and SNR1 = P̄1/(B(σ_n²+σ_s²)) in dB.

    ``snr_busy_db=None`` means the busy-sensed channel is left silent (P̄1 = 0).
    """
    snr_busy = 0.0
    if snr_busy_db is not None:
        busy_disturbance = n.sigma_n2 + n.sigma_s2
        snr_busy = db_to_linear(snr_busy_db) * busy_disturbance / n.sigma_n2
    return EnergyPolicy(
        snr_idle=db_to_linear(snr_idle_db),
        snr_busy=snr_busy,
        mu_idle=mu_idle,
        mu_busy=mu_busy,
        pilot_energy_idle=pilot_energy_idle,
        pilot_energy_busy=pilot_energy_busy,
    )
