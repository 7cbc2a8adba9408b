"""MMSE and L-MMSE estimation of a block of fading coefficients from past pilots.

The estimated vector r_l holds the K pilot-time coefficients (oldest first) followed by the
M-1 data-symbol coefficients of the current block. Observations are ordered most recent
pilot first, so row m of the pilot matrix has its nonzero entry in column K-1-m.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import softmax

from app.core.exceptions import DegenerateDecisionError, SingularSystemError
from app.core.fading import CovarianceMatrix, block_covariance, generate_trajectory
from app.core.model import (
    decision_probability,
    effective_noise_variance,
    hypothesis_posterior,
    joint_probability,
    noise_variance,
    pilot_energy,
)
from app.core.sensing import draw_frame_states, draw_states_given_decision
from app.core.streams import (
    STREAM_MSE,
    STREAM_ORTHOGONALITY,
    batch_sizes,
    complex_normal,
    substream,
)
from app.models.scenario import EstimatorKind, FramePlan, Hypothesis, Scenario

# Configure logging
logger = logging.getLogger(__name__)

HYPOTHESES = (Hypothesis.IDLE, Hypothesis.BUSY)


@dataclass(frozen=True)
class PilotMatrix:
    entries: np.ndarray
    pilot_energy: float


@dataclass(frozen=True)
class TrainingObservation:
    y: np.ndarray
    pilot_times: Tuple[int, ...]
    decision: Hypothesis
    pilot_energy: float


@dataclass(frozen=True)
class ChannelEstimate:
    r_hat: np.ndarray
    err_var: np.ndarray
    decision: Hypothesis


@dataclass(frozen=True)
class _HypothesisSystem:
    """Observation statistics of Y given one true hypothesis."""

    gain: np.ndarray
    factor: Tuple[np.ndarray, bool]
    log_det: float


@dataclass(frozen=True)
class DecisionModel:
    """Everything the estimators need for one sensing decision, computed once."""

    decision: Hypothesis
    posterior: Tuple[float, float]
    pilots: PilotMatrix
    lmmse_gain: np.ndarray
    systems: Tuple[_HypothesisSystem, _HypothesisSystem]
    error_covariance: np.ndarray
    hypothesis_error_covariances: Tuple[np.ndarray, np.ndarray]

    @property
    def err_var(self) -> np.ndarray:
        return np.real(np.diag(self.error_covariance)).clip(min=0.0)


def build_pilot_matrix(f: FramePlan, pilot_energy: float) -> PilotMatrix:
    if pilot_energy < 0:
        raise ValueError(f"pilot_energy must be non-negative, got {pilot_energy}")
    k = f.k_pilots
    entries = np.zeros((k, f.block_length))
    amplitude = math.sqrt(pilot_energy)
    for row in range(k):
        entries[row, k - 1 - row] = amplitude
    return PilotMatrix(entries=entries, pilot_energy=pilot_energy)


def _cholesky(matrix: np.ndarray) -> Tuple[np.ndarray, bool]:
    try:
        return cho_factor(matrix, lower=True)
    except LinAlgError as e:
        raise SingularSystemError(f"Observation covariance is not positive definite: {e}") from e


def _observation_covariance(
    cov: CovarianceMatrix, q: PilotMatrix, sigma_w2: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Return (Λ_r Q†, Q Λ_r Q† + σ_w² I)."""
    cross = cov.entries @ q.entries.conj().T
    observed = q.entries @ cross + sigma_w2 * np.eye(q.entries.shape[0])
    return cross, observed


def _gain(cross: np.ndarray, factor: Tuple[np.ndarray, bool]) -> np.ndarray:
    # A = cross · C⁻¹ with C Hermitian, so A† = C⁻¹ cross†
    return cho_solve(factor, cross.conj().T).conj().T


def conditional_linear_estimator(
    cov: CovarianceMatrix, q: PilotMatrix, sigma_w2: float
) -> np.ndarray:
    """A_i = Λ_r Q† (Q Λ_r Q† + σ_w,i² I)⁻¹, the conditional mean gain under one hypothesis."""
    cross, observed = _observation_covariance(cov, q, sigma_w2)
    return _gain(cross, _cholesky(observed))


def _log_det(factor: Tuple[np.ndarray, bool]) -> float:
    return float(2.0 * np.sum(np.log(np.abs(np.diag(factor[0])))))


def _error_covariance(
    cov: CovarianceMatrix, q: PilotMatrix, gain: np.ndarray, sigma_w2: float
) -> np.ndarray:
    """Error covariance of a linear estimator ``gain`` when the disturbance variance is σ_w²."""
    cross, observed = _observation_covariance(cov, q, sigma_w2)
    projected = gain @ cross.conj().T
    error = cov.entries - projected - projected.conj().T + gain @ observed @ gain.conj().T
    return (error + error.conj().T) / 2.0


def _decision_model(
    scenario: Scenario, cov: CovarianceMatrix, decision: Hypothesis, energy: float
) -> DecisionModel:
    posterior = hypothesis_posterior(scenario.sensing, decision)
    pilots = build_pilot_matrix(scenario.frame, energy)

    sigma_eff = effective_noise_variance(scenario.noise, posterior[1])
    cross, mixed = _observation_covariance(cov, pilots, sigma_eff)
    lmmse_gain = _gain(cross, _cholesky(mixed))

    systems = []
    errors = []
    for true_state in HYPOTHESES:
        sigma_w2 = noise_variance(scenario.noise, true_state)
        cross, observed = _observation_covariance(cov, pilots, sigma_w2)
        factor = _cholesky(observed)
        systems.append(_HypothesisSystem(_gain(cross, factor), factor, _log_det(factor)))
        errors.append(_error_covariance(cov, pilots, lmmse_gain, sigma_w2))

    mixture = posterior[0] * errors[0] + posterior[1] * errors[1]
    return DecisionModel(
        decision=decision,
        posterior=posterior,
        pilots=pilots,
        lmmse_gain=lmmse_gain,
        systems=(systems[0], systems[1]),
        error_covariance=mixture,
        hypothesis_error_covariances=(errors[0], errors[1]),
    )


def lmmse_error_covariance(
    scenario: Scenario, cov: CovarianceMatrix, q: PilotMatrix, decision: Hypothesis
) -> Tuple[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
    """Error covariance of the L-MMSE estimator for decision Ĥ_j.

    Returns the posterior mixture Σ_i Pr{H_i|Ĥ_j} Λ_err,i and the per-hypothesis matrices.
    """
    model = _decision_model(scenario, cov, decision, q.pilot_energy)
    return model.error_covariance, model.hypothesis_error_covariances


def _mixture_weights(model: DecisionModel, y: np.ndarray) -> np.ndarray:
    """Pr{H_i | Ĥ_j, Y} for each row of y, computed from log densities."""
    k = y.shape[1]
    log_terms = np.empty((y.shape[0], 2))
    with np.errstate(divide="ignore"):
        log_priors = np.log(np.asarray(model.posterior))
    for i, system in enumerate(model.systems):
        whitened = cho_solve(system.factor, y.T).T
        quadratic = np.real(np.sum(y.conj() * whitened, axis=1))
        log_density = -k * math.log(math.pi) - system.log_det - quadratic
        log_terms[:, i] = log_priors[i] + log_density
    return softmax(log_terms, axis=1)


def _apply(model: DecisionModel, y: np.ndarray, kind: EstimatorKind) -> np.ndarray:
    if kind is EstimatorKind.LMMSE:
        return y @ model.lmmse_gain.T
    weights = _mixture_weights(model, y)
    estimate = np.zeros((y.shape[0], model.lmmse_gain.shape[0]), dtype=complex)
    for i, system in enumerate(model.systems):
        estimate += weights[:, i : i + 1] * (y @ system.gain.T)
    return estimate


def _as_rows(y: np.ndarray) -> np.ndarray:
    return np.atleast_2d(np.asarray(y, dtype=complex))


def estimate_lmmse(
    obs: TrainingObservation, scenario: Scenario, cov: CovarianceMatrix
) -> ChannelEstimate:
    """r̂ = Λ_r Q† [Q Λ_r Q† + (σ_n² + Pr{H1|Ĥj}σ_s²) I]⁻¹ Y."""
    model = _decision_model(scenario, cov, obs.decision, obs.pilot_energy)
    r_hat = _apply(model, _as_rows(obs.y), EstimatorKind.LMMSE)[0]
    return ChannelEstimate(r_hat=r_hat, err_var=model.err_var, decision=obs.decision)


def estimate_mmse(
    obs: TrainingObservation,
    scenario: Scenario,
    cov: CovarianceMatrix,
    err_var_trials: int = 8192,
    seed: int = 0,
) -> ChannelEstimate:
    """Conditional mean Σ_i Pr{H_i|Ĥ_j,Y} A_i Y.

    The per-symbol error variance has no closed form; it is estimated by Monte Carlo.
    """
    model = _decision_model(scenario, cov, obs.decision, obs.pilot_energy)
    r_hat = _apply(model, _as_rows(obs.y), EstimatorKind.MMSE)[0]
    err_var = monte_carlo_error_variance(
        scenario, EstimatorKind.MMSE, obs.decision, err_var_trials, seed
    )
    return ChannelEstimate(r_hat=r_hat, err_var=err_var, decision=obs.decision)


class ChannelEstimator:
    """Per-scenario estimator with all matrices precomputed and shared read-only."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.covariance = block_covariance(scenario.fading, scenario.frame.symbol_times())
        self.models: Dict[Hypothesis, DecisionModel] = {}
        for decision in HYPOTHESES:
            if decision_probability(scenario.sensing, decision) <= 0.0:
                logger.debug(f"Skipping decision '{decision.value}': zero probability")
                continue
            energy = pilot_energy(scenario.energy, scenario.frame, scenario.noise, decision)
            self.models[decision] = _decision_model(scenario, self.covariance, decision, energy)
        self._mmse_err_var: Dict[Hypothesis, np.ndarray] = {}

    def model(self, decision: Hypothesis) -> DecisionModel:
        if decision not in self.models:
            raise DegenerateDecisionError(
                f"Sensing decision '{decision.value}' has zero probability in this scenario"
            )
        return self.models[decision]

    def err_var(self, decision: Hypothesis) -> np.ndarray:
        """Analytic L-MMSE per-symbol error variances σ²_r̃,j,k."""
        return self.model(decision).err_var

    def estimate_batch(
        self, y: np.ndarray, decision: Hypothesis, kind: EstimatorKind
    ) -> np.ndarray:
        return _apply(self.model(decision), _as_rows(y), kind)

    def estimate(self, obs: TrainingObservation, kind: EstimatorKind) -> ChannelEstimate:
        r_hat = self.estimate_batch(obs.y, obs.decision, kind)[0]
        if kind is EstimatorKind.LMMSE:
            err_var = self.err_var(obs.decision)
        else:
            if obs.decision not in self._mmse_err_var:
                self._mmse_err_var[obs.decision] = monte_carlo_error_variance(
                    self.scenario, kind, obs.decision, 8192, 0, estimator=self
                )
            err_var = self._mmse_err_var[obs.decision]
        return ChannelEstimate(r_hat=r_hat, err_var=err_var, decision=obs.decision)


@dataclass
class SimulatedBatch:
    """One batch of simulated training: true coefficients, observations and estimates."""

    r: np.ndarray
    y: np.ndarray
    r_hat: np.ndarray
    busy_truth: np.ndarray
    busy_decision: np.ndarray


def simulate_batch(
    estimator: ChannelEstimator,
    kind: EstimatorKind,
    rng: np.random.Generator,
    size: int,
    decision: Optional[Hypothesis] = None,
) -> SimulatedBatch:
    """Draw frame states, fading and pilot noise, then estimate r_l for every trial.

    With ``decision`` set, the true state is drawn from Pr{H_i | Ĥ_j} and every trial carries
    that decision.
    """
    scenario = estimator.scenario
    frame = scenario.frame
    if decision is None:
        busy_truth, busy_decision = draw_frame_states(scenario.sensing, rng, size)
    else:
        busy_truth = draw_states_given_decision(scenario.sensing, decision, rng, size)
        busy_decision = np.full(size, decision is Hypothesis.BUSY)

    trajectory = generate_trajectory(
        scenario.fading, frame.k_pilots * frame.m, rng, n_paths=size
    )
    offset = (frame.k_pilots - 1) * frame.m
    r = trajectory.at([t + offset for t in frame.symbol_times()])

    variances = np.where(
        busy_truth,
        noise_variance(scenario.noise, Hypothesis.BUSY),
        noise_variance(scenario.noise, Hypothesis.IDLE),
    )
    w = complex_normal(rng, variances[:, None], (size, frame.k_pilots))

    y = np.zeros((size, frame.k_pilots), dtype=complex)
    r_hat = np.zeros_like(r)
    for candidate in HYPOTHESES:
        mask = busy_decision == (candidate is Hypothesis.BUSY)
        if not mask.any():
            continue
        model = estimator.model(candidate)
        y[mask] = r[mask] @ model.pilots.entries.T + w[mask]
        r_hat[mask] = _apply(model, y[mask], kind)
    return SimulatedBatch(r=r, y=y, r_hat=r_hat, busy_truth=busy_truth, busy_decision=busy_decision)


def _current_block(frame: FramePlan, values: np.ndarray) -> np.ndarray:
    """The pilot-time coefficient of the current block and its M-1 data coefficients."""
    return values[..., frame.k_pilots - 1 :]


def monte_carlo_mse(
    scenario: Scenario,
    kind: EstimatorKind,
    trials: int,
    seed: int,
    decision: Optional[Hypothesis] = None,
    estimator: Optional[ChannelEstimator] = None,
) -> Tuple[float, float]:
    """Empirical E{‖r - r̂‖²}/M over the current block, with its standard error."""
    estimator = estimator or ChannelEstimator(scenario)
    tag_decision = -1 if decision is None else decision.index
    per_trial = []
    for batch, size in batch_sizes(trials):
        rng = substream(seed, STREAM_MSE, tag_decision + 1, batch)
        sample = simulate_batch(estimator, kind, rng, size, decision)
        error = _current_block(scenario.frame, sample.r - sample.r_hat)
        per_trial.append(np.sum(np.abs(error) ** 2, axis=1) / scenario.frame.m)
    values = np.concatenate(per_trial)
    mse = float(np.mean(values))
    std_error = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    logger.debug(f"Monte Carlo MSE ({kind.value}, {trials} trials): {mse:.6g} ± {std_error:.2g}")
    return mse, std_error


def monte_carlo_error_variance(
    scenario: Scenario,
    kind: EstimatorKind,
    decision: Hypothesis,
    trials: int,
    seed: int,
    estimator: Optional[ChannelEstimator] = None,
) -> np.ndarray:
    """Per-symbol empirical error variance E{|r_k - r̂_k|² | Ĥ_j} over the whole vector r_l."""
    estimator = estimator or ChannelEstimator(scenario)
    total = np.zeros(scenario.frame.block_length)
    for batch, size in batch_sizes(trials):
        rng = substream(seed, STREAM_MSE, decision.index + 1, batch)
        sample = simulate_batch(estimator, kind, rng, size, decision)
        total += np.sum(np.abs(sample.r - sample.r_hat) ** 2, axis=0)
    return total / trials


def analytic_lmmse_mse(scenario: Scenario, decision: Optional[Hypothesis] = None) -> float:
    """Analytic MSE of the L-MMSE estimator over the current block, normalized by M.

    Without ``decision`` the error is averaged over Pr{H_i}Pr{Ĥ_j|H_i}; with it, the
    decision-conditioned MSE is returned.
    """
    estimator = ChannelEstimator(scenario)
    frame = scenario.frame

    first = frame.k_pilots - 1

    def block_trace(matrix: np.ndarray) -> float:
        return float(np.real(np.trace(matrix[first:, first:])))

    if decision is not None:
        return block_trace(estimator.model(decision).error_covariance) / frame.m

    total = 0.0
    for candidate, model in estimator.models.items():
        for true_state in HYPOTHESES:
            weight = joint_probability(scenario.sensing, true_state, candidate)
            error = model.hypothesis_error_covariances[true_state.index]
            total += weight * block_trace(error)
    return total / frame.m


def orthogonality_residual(
    scenario: Scenario, decision: Hypothesis, trials: int, seed: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Empirical E{(r - r̂) Y† | Ĥ_j} for the L-MMSE estimator.

    Returns (mean, standard error of the real part, standard error of the imaginary part),
    each of shape (block_length, K).
    """
    estimator = ChannelEstimator(scenario)
    products = []
    for batch, size in batch_sizes(trials):
        rng = substream(seed, STREAM_ORTHOGONALITY, decision.index, batch)
        sample = simulate_batch(estimator, EstimatorKind.LMMSE, rng, size, decision)
        error = sample.r - sample.r_hat
        products.append(error[:, :, None] * sample.y.conj()[:, None, :])
    stacked = np.concatenate(products)
    scale = math.sqrt(stacked.shape[0])
    mean = stacked.mean(axis=0)
    se_real = np.real(stacked).std(axis=0, ddof=1) / scale
    se_imag = np.imag(stacked).std(axis=0, ddof=1) / scale
    return mean, se_real, se_imag
