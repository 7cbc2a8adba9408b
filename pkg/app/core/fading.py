"""First-order Gauss-Markov fading: trajectories and block covariances."""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from app.core.streams import complex_normal
from app.models.scenario import FadingParams


@dataclass(frozen=True)
class FadingTrajectory:
    """Fading coefficients r_k indexed by symbol time; one row per path when batched."""

    samples: np.ndarray

    def __len__(self) -> int:
        return self.samples.shape[-1]

    def at(self, times: Sequence[int]) -> np.ndarray:
        return self.samples[..., list(times)]


@dataclass(frozen=True)
class CovarianceMatrix:
    """Covariance of the fading coefficients at ``times`` (Λ_r of the estimated vector)."""

    entries: np.ndarray
    times: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.times)


def autocorrelation(p: FadingParams, lag: int) -> float:
    """R_r(n) = α^n σ_r²."""
    if lag < 0:
        raise ValueError(f"lag must be non-negative, got {lag}")
    return float(p.sigma_r2 * p.alpha**lag)


def innovation_variance(p: FadingParams) -> float:
    """Variance (1-α²)σ_r² of the driving noise ζ_k."""
    return (1.0 - p.alpha**2) * p.sigma_r2


def generate_trajectory(
    p: FadingParams,
    length: int,
    rng: np.random.Generator,
    n_paths: Optional[int] = None,
) -> FadingTrajectory:
    """Simulate r_k = α r_{k-1} + ζ_k started from the stationary distribution.

    With ``n_paths`` set, independent paths are generated side by side and ``samples`` has
    shape (n_paths, length).
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    shape = (length,) if n_paths is None else (n_paths, length)
    samples = np.empty(shape, dtype=complex)
    samples[..., 0] = complex_normal(rng, p.sigma_r2, shape[:-1])
    if length > 1:
        innovations = complex_normal(rng, innovation_variance(p), shape[:-1] + (length - 1,))
        for k in range(1, length):
            samples[..., k] = p.alpha * samples[..., k - 1] + innovations[..., k - 1]
    return FadingTrajectory(samples=samples)


def block_covariance(p: FadingParams, times: Sequence[int]) -> CovarianceMatrix:
    """Entry (a, b) = σ_r² α^|t_a - t_b|."""
    times = tuple(int(t) for t in times)
    if not times:
        raise ValueError("times must be non-empty")
    if any(later <= earlier for earlier, later in zip(times, times[1:])):
        raise ValueError(f"times must be strictly increasing, got {times}")
    grid = np.asarray(times)
    lags = np.abs(grid[:, None] - grid[None, :])
    # integer lags keep the matrix exactly symmetric
    entries = (p.sigma_r2 * np.power(p.alpha, lags.astype(float))).astype(complex)
    return CovarianceMatrix(entries=entries, times=times)
