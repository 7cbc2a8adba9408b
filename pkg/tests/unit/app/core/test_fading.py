import math
from typing import Tuple

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.fading import (
    autocorrelation,
    block_covariance,
    generate_trajectory,
    innovation_variance,
)
from app.core.streams import substream
from app.models.scenario import FadingParams


def _lag_one_correlation(samples: np.ndarray) -> Tuple[float, float]:
    products = np.real(samples[1:] * np.conj(samples[:-1]))
    return float(products.mean()), float(products.std(ddof=1) / math.sqrt(products.size))


class TestAutocorrelation:
    """Tests for R_r(n) = α^n σ_r²."""

    def test_values(self):
        """Lag 0 is the power and lag 10 decays as α^10."""
        p = FadingParams(alpha=0.95, sigma_r2=1.0)
        assert autocorrelation(p, 0) == 1.0
        assert autocorrelation(p, 10) == pytest.approx(0.598737, abs=1e-6)
        assert autocorrelation(FadingParams(alpha=0.0), 1) == 0.0

    def test_negative_lag(self):
        """Negative lags are rejected."""
        with pytest.raises(ValueError):
            autocorrelation(FadingParams(), -1)

    def test_innovation_variance(self):
        """ζ_k carries (1-α²)σ_r²."""
        assert innovation_variance(FadingParams(alpha=0.95, sigma_r2=2.0)) == pytest.approx(
            (1 - 0.9025) * 2.0
        )


class TestGenerateTrajectory:
    """Tests for Gauss-Markov trajectory generation."""

    def test_constant_channel(self):
        """α=1 freezes the channel."""
        trajectory = generate_trajectory(FadingParams(alpha=1.0), 50, substream(1, "test"))
        assert np.allclose(trajectory.samples, trajectory.samples[0])

    def test_deterministic(self):
        """The same stream gives the same path."""
        p = FadingParams()
        first = generate_trajectory(p, 20, substream(5, "test"))
        second = generate_trajectory(p, 20, substream(5, "test"))
        assert np.array_equal(first.samples, second.samples)

    def test_statistics(self):
        """Long paths have unit variance and lag-1 correlation α."""
        p = FadingParams(alpha=0.95, sigma_r2=1.0)
        samples = generate_trajectory(p, 200_000, substream(11, "test")).samples
        power = np.abs(samples) ** 2
        # consecutive samples are correlated, so allow a wide band around the analytic value
        assert power.mean() == pytest.approx(1.0, abs=0.05)
        correlation, _ = _lag_one_correlation(samples)
        assert correlation == pytest.approx(0.95, abs=0.05)

    def test_independent_when_alpha_zero(self):
        """α=0 gives i.i.d. samples."""
        samples = generate_trajectory(FadingParams(alpha=0.0), 100_000, substream(2, "t")).samples
        correlation, std_error = _lag_one_correlation(samples)
        assert abs(correlation) < 4 * std_error

    def test_batched_paths(self):
        """n_paths stacks independent paths row by row."""
        trajectory = generate_trajectory(FadingParams(), 8, substream(3, "t"), n_paths=5)
        assert trajectory.samples.shape == (5, 8)
        assert len(trajectory) == 8
        assert trajectory.at([0, 7]).shape == (5, 2)

    def test_stationary_start(self):
        """The first and a late sample share their second moment."""
        trajectory = generate_trajectory(
            FadingParams(alpha=0.9), 200, substream(4, "t"), n_paths=20_000
        )
        early = np.mean(np.abs(trajectory.samples[:, 0]) ** 2)
        late = np.mean(np.abs(trajectory.samples[:, -1]) ** 2)
        assert early == pytest.approx(1.0, abs=0.05)
        assert late == pytest.approx(1.0, abs=0.05)

    def test_invalid_length(self):
        """Empty trajectories are rejected."""
        with pytest.raises(ValueError):
            generate_trajectory(FadingParams(), 0, substream(0, "t"))


class TestBlockCovariance:
    """Tests for the covariance of fading coefficients at given times."""

    def test_single_time(self):
        """One time gives the 1x1 power."""
        cov = block_covariance(FadingParams(sigma_r2=2.0), [0])
        assert cov.entries.shape == (1, 1)
        assert cov.entries[0, 0] == 2.0

    def test_off_diagonal(self):
        """Entries decay with the time gap."""
        cov = block_covariance(FadingParams(alpha=0.95), [0, 10])
        assert cov.entries[0, 1].real == pytest.approx(0.598737, abs=1e-6)
        assert cov.size == 2

    def test_rejects_unordered_times(self):
        """Times must be strictly increasing."""
        with pytest.raises(ValueError):
            block_covariance(FadingParams(), [0, 0])
        with pytest.raises(ValueError):
            block_covariance(FadingParams(), [])

    @settings(max_examples=50, deadline=None)
    @given(
        alpha=st.floats(min_value=0.01, max_value=0.99),
        gaps=st.lists(st.integers(min_value=1, max_value=20), min_size=1, max_size=12),
    )
    def test_hermitian_psd(self, alpha, gaps):
        """Any increasing time set gives a symmetric PSD matrix with σ_r² on the diagonal."""
        times = np.concatenate([[0], np.cumsum(gaps)]) - 30
        cov = block_covariance(FadingParams(alpha=alpha), times).entries
        assert np.array_equal(cov, cov.conj().T)
        assert np.allclose(np.diag(cov), 1.0)
        assert np.linalg.eigvalsh(cov).min() >= -1e-10
