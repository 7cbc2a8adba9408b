"""Achievable rates with imperfect sensing and channel estimation.

BPSK rates are nested Monte Carlo estimates of the symbol-wise mutual information under the
Gaussian-mixture likelihood; Gaussian-input rates evaluate the closed-form lower bound
log2(1 + |r̂|²E_d / (σ²_r̃E_d + σ_n² + Pr{H1|Ĥj}σ_s²)) per channel estimate.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from app.core.estimation import ChannelEstimator, simulate_batch
from app.core.model import data_energy, decision_probability, hypothesis_posterior, noise_variance
from app.core.streams import STREAM_RATE, batch_sizes, complex_normal, substream
from app.models.results import RatePoint
from app.models.scenario import EstimatorKind, Hypothesis, InputKind, NoiseParams, Scenario

# Configure logging
logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)

# Monte Carlo defaults: outer channel-estimate draws and inner noise draws per data position
DEFAULT_OUTER_SAMPLES = 2000
DEFAULT_INNER_SAMPLES = 200


@dataclass(frozen=True)
class Constellation:
    points: np.ndarray
    priors: np.ndarray

    def __post_init__(self) -> None:
        if not math.isclose(float(np.sum(self.priors)), 1.0, abs_tol=1e-12):
            raise ValueError("constellation priors must sum to 1")

    @property
    def energy(self) -> float:
        return float(np.sum(self.priors * np.abs(self.points) ** 2))

    @property
    def bits(self) -> float:
        return math.log2(len(self.points))


def bpsk_constellation(e_d: float) -> Constellation:
    amplitude = math.sqrt(max(e_d, 0.0))
    return Constellation(
        points=np.array([-amplitude, amplitude], dtype=complex), priors=np.array([0.5, 0.5])
    )


@dataclass(frozen=True)
class InformationProfile:
    """Per-position symbol-wise information for one sensing decision.

    ``per_draw_total`` holds, for every outer draw, the inner-averaged information summed
    over the data positions; its spread gives the standard error of the block rate.
    """

    per_position: np.ndarray
    per_position_se: np.ndarray
    per_draw_total: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.per_position))

    @property
    def total_se(self) -> float:
        n = self.per_draw_total.size
        if n < 2:
            return 0.0
        return float(np.std(self.per_draw_total, ddof=1) / math.sqrt(n))


def _component_variances(
    n: NoiseParams, err_var: float, symbol_energy: Union[np.ndarray, float]
) -> Tuple[np.ndarray, np.ndarray]:
    idle = noise_variance(n, Hypothesis.IDLE) + err_var * np.asarray(symbol_energy)
    busy = noise_variance(n, Hypothesis.BUSY) + err_var * np.asarray(symbol_energy)
    return idle, busy


def mixture_likelihood(
    y: Union[np.ndarray, complex],
    x: Union[np.ndarray, complex],
    r_hat: Union[np.ndarray, complex],
    err_var: float,
    posterior: Tuple[float, float],
    n: NoiseParams,
) -> np.ndarray:
    """f(y | x, r̂, Ĥj): circular complex Gaussians centred at r̂x, weighted by Pr{H_i|Ĥj}."""
    x = np.asarray(x)
    distance = np.abs(np.asarray(y) - np.asarray(r_hat) * x) ** 2
    density = np.zeros(np.broadcast(distance, x).shape)
    for weight, variance in zip(posterior, _component_variances(n, err_var, np.abs(x) ** 2)):
        if weight > 0.0:
            density = density + weight * np.exp(-distance / variance) / (math.pi * variance)
    return density


def _log_mixture_likelihood(
    y: np.ndarray,
    mean: np.ndarray,
    variances: Tuple[np.ndarray, np.ndarray],
    log_weights: np.ndarray,
) -> np.ndarray:
    distance = np.abs(y - mean) ** 2
    terms = np.stack(
        [
            log_weights[i] - np.log(math.pi * variances[i]) - distance / variances[i]
            for i in range(2)
        ]
    )
    return logsumexp(terms, axis=0)


def _log_weights(posterior: Tuple[float, float]) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(posterior, dtype=float))


def _bpsk_information_draws(
    r_hat: np.ndarray,
    err_var: float,
    e_d: float,
    n: NoiseParams,
    posterior: Tuple[float, float],
    inner: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """log2 f(y|x_u)/f(y) for ``inner`` draws of (u, H_i, y) per channel estimate.

    Returns an array of shape (len(r_hat), inner).
    """
    constellation = bpsk_constellation(e_d)
    points = constellation.points
    log_priors = np.log(constellation.priors)
    shape = (r_hat.size, inner)
    sent = rng.choice(points.size, size=shape, p=constellation.priors)
    busy = rng.random(shape) < posterior[1]
    idle_var, busy_var = _component_variances(n, err_var, np.abs(points) ** 2)
    true_variance = np.where(busy, busy_var[sent], idle_var[sent])
    z = complex_normal(rng, true_variance, shape)
    estimate = r_hat.reshape(-1, 1)
    y = estimate * points[sent] + z

    log_weights = _log_weights(posterior)
    log_joint = np.stack(
        [
            log_priors[p]
            + _log_mixture_likelihood(
                y, estimate * points[p], (idle_var[p], busy_var[p]), log_weights
            )
            for p in range(points.size)
        ]
    )
    log_sent = np.take_along_axis(log_joint, sent[None], axis=0)[0] - log_priors[sent]
    return (log_sent - logsumexp(log_joint, axis=0)) / LOG2


def bpsk_information_given_estimate(
    r_hat: complex,
    err_var: float,
    e_d: float,
    n: NoiseParams,
    posterior: Tuple[float, float],
    samples: int,
    rng: np.random.Generator,
) -> Tuple[float, float]:
    """I(x; y | r̂, Ĥj) in bits for equiprobable BPSK and a fixed channel estimate."""
    draws = _bpsk_information_draws(
        np.array([r_hat], dtype=complex), err_var, e_d, n, posterior, samples, rng
    )[0]
    std_error = float(np.std(draws, ddof=1) / math.sqrt(draws.size)) if draws.size > 1 else 0.0
    return float(np.clip(np.mean(draws), 0.0, 1.0)), std_error


def gaussian_rate_bound(
    r_hat_sq: Union[np.ndarray, float],
    err_var: float,
    e_d: float,
    n: NoiseParams,
    posterior_busy: float,
) -> Union[np.ndarray, float]:
    """Closed-form Gaussian-input achievable rate in bits for one data symbol."""
    disturbance = err_var * e_d + n.sigma_n2 + posterior_busy * n.sigma_s2
    return np.log2(1.0 + np.asarray(r_hat_sq) * e_d / disturbance)


def bpsk_awgn_information(snr: float, nodes: int = 120) -> float:
    """Classical BPSK mutual information over complex AWGN, by Gauss-Hermite quadrature.

    ``snr`` is |r|²E_d/σ_n². Only the in-phase noise matters; with noise variance 1/2 per
    dimension the log-likelihood ratio is 4a(a + t).
    """
    if snr <= 0.0:
        return 0.0
    nodes_t, weights = np.polynomial.hermite.hermgauss(nodes)
    amplitude = math.sqrt(snr)
    penalty = np.logaddexp(0.0, -4.0 * amplitude * (amplitude + nodes_t)) / LOG2
    return float(1.0 - np.sum(weights * penalty) / math.sqrt(math.pi))


def gaussian_mutual_information(
    r_hat: complex,
    err_var: float,
    e_d: float,
    n: NoiseParams,
    posterior_busy: float,
    samples: int,
    rng: np.random.Generator,
    reference_samples: int = 2048,
    chunk: int = 512,
) -> Tuple[float, float]:
    """Direct Monte Carlo estimate of h(y|r̂) - h(z|x) for x ~ CN(0, E_d).

    The output density f(y|r̂) has no closed form; it is estimated by averaging f(y|x')
    over an independent reference sample of inputs.
    """
    if e_d <= 0.0:
        return 0.0, 0.0
    posterior = (1.0 - posterior_busy, posterior_busy)
    log_weights = _log_weights(posterior)

    x = complex_normal(rng, e_d, samples)
    busy = rng.random(samples) < posterior_busy
    idle_var, busy_var = _component_variances(n, err_var, np.abs(x) ** 2)
    z = complex_normal(rng, np.where(busy, busy_var, idle_var), samples)
    y = r_hat * x + z
    reference = complex_normal(rng, e_d, reference_samples)
    reference_vars = _component_variances(n, err_var, np.abs(reference) ** 2)

    log_conditional = _log_mixture_likelihood(y, r_hat * x, (idle_var, busy_var), log_weights)
    log_output = np.empty(samples)
    for start in range(0, samples, chunk):
        block = y[start : start + chunk, None]
        log_given_reference = _log_mixture_likelihood(
            block, r_hat * reference[None, :], reference_vars, log_weights
        )
        log_output[start : start + chunk] = logsumexp(log_given_reference, axis=1) - math.log(
            reference_samples
        )
    draws = (log_conditional - log_output) / LOG2
    return float(np.mean(draws)), float(np.std(draws, ddof=1) / math.sqrt(samples))


def _data_columns(scenario: Scenario) -> List[int]:
    first_data = scenario.frame.k_pilots
    return list(range(first_data, scenario.frame.block_length))


def information_profile(
    scenario: Scenario,
    decision: Hypothesis,
    input_kind: InputKind,
    outer_samples: int = DEFAULT_OUTER_SAMPLES,
    inner_samples: int = DEFAULT_INNER_SAMPLES,
    seed: int = 0,
    kind: EstimatorKind = EstimatorKind.MMSE,
    estimator: Optional[ChannelEstimator] = None,
) -> InformationProfile:
    """Symbol-wise information at each data position of a block, given decision Ĥ_j.

    Outer draws simulate the full training pipeline (true state, fading, pilot noise,
    estimate); the per-position error variance is the analytic L-MMSE mixture variance.
    """
    estimator = estimator or ChannelEstimator(scenario)
    posterior = hypothesis_posterior(scenario.sensing, decision)
    e_d = data_energy(scenario.energy, scenario.frame, scenario.noise, decision)
    columns = _data_columns(scenario)
    err_var = estimator.err_var(decision)
    if e_d <= 0.0:
        zeros = np.zeros(len(columns))
        return InformationProfile(
            per_position=zeros, per_position_se=zeros, per_draw_total=np.zeros(outer_samples)
        )

    per_draw = []
    for batch, size in batch_sizes(outer_samples):
        rng = substream(seed, STREAM_RATE, decision.index, batch)
        sample = simulate_batch(estimator, kind, rng, size, decision)
        values = np.empty((size, len(columns)))
        for position, column in enumerate(columns):
            r_hat = sample.r_hat[:, column]
            if input_kind is InputKind.GAUSSIAN:
                values[:, position] = gaussian_rate_bound(
                    np.abs(r_hat) ** 2, err_var[column], e_d, scenario.noise, posterior[1]
                )
            else:
                draws = _bpsk_information_draws(
                    r_hat, err_var[column], e_d, scenario.noise, posterior, inner_samples, rng
                )
                values[:, position] = draws.mean(axis=1)
        per_draw.append(values)

    stacked = np.concatenate(per_draw)
    means = stacked.mean(axis=0)
    if input_kind is InputKind.BPSK:
        means = np.clip(means, 0.0, 1.0)
    else:
        means = np.clip(means, 0.0, None)
    spread = stacked.std(axis=0, ddof=1) if stacked.shape[0] > 1 else np.zeros(len(columns))
    return InformationProfile(
        per_position=means,
        per_position_se=spread / math.sqrt(stacked.shape[0]),
        per_draw_total=stacked.sum(axis=1),
    )


def bpsk_mutual_information(
    scenario: Scenario,
    decision: Hypothesis,
    outer_samples: int = DEFAULT_OUTER_SAMPLES,
    inner_samples: int = DEFAULT_INNER_SAMPLES,
    seed: int = 0,
    kind: EstimatorKind = EstimatorKind.MMSE,
    estimator: Optional[ChannelEstimator] = None,
) -> InformationProfile:
    """E[I(x; y | r̂, Ĥj)] in bits for equiprobable BPSK at every data position."""
    return information_profile(
        scenario, decision, InputKind.BPSK, outer_samples, inner_samples, seed, kind, estimator
    )


def decision_rate_term(
    scenario: Scenario,
    decision: Hypothesis,
    input_kind: InputKind,
    outer_samples: int = DEFAULT_OUTER_SAMPLES,
    inner_samples: int = DEFAULT_INNER_SAMPLES,
    seed: int = 0,
    kind: EstimatorKind = EstimatorKind.MMSE,
    estimator: Optional[ChannelEstimator] = None,
) -> Tuple[float, float]:
    """Pr{Ĥj} (1/M) Σ_k E[I_k,j] and its standard error; zero for an impossible decision."""
    probability = decision_probability(scenario.sensing, decision)
    if probability <= 0.0:
        return 0.0, 0.0
    profile = information_profile(
        scenario, decision, input_kind, outer_samples, inner_samples, seed, kind, estimator
    )
    scale = probability / scenario.frame.m
    return scale * profile.total, scale * profile.total_se


def block_rate(
    scenario: Scenario,
    input_kind: InputKind,
    outer_samples: int = DEFAULT_OUTER_SAMPLES,
    inner_samples: int = DEFAULT_INNER_SAMPLES,
    seed: int = 0,
    kind: EstimatorKind = EstimatorKind.MMSE,
    decisions: Sequence[Hypothesis] = (Hypothesis.IDLE, Hypothesis.BUSY),
) -> RatePoint:
    """Achievable rate (1/M) Σ_k Σ_j Pr{Ĥj} E[I_k,j] in bits per symbol."""
    estimator = ChannelEstimator(scenario)
    rate = 0.0
    variance = 0.0
    for decision in decisions:
        term, std_error = decision_rate_term(
            scenario, decision, input_kind, outer_samples, inner_samples, seed, kind, estimator
        )
        rate += term
        variance += std_error**2
    logger.debug(
        f"Block rate ({input_kind.value}, M={scenario.frame.m}): {rate:.6g} bits/symbol"
    )
    return RatePoint(
        rate=rate,
        std_error=math.sqrt(variance),
        m=scenario.frame.m,
        mu_idle=scenario.energy.mu_idle,
        mu_busy=scenario.energy.mu_busy,
    )
