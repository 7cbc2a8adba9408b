import pytest

from app.services.experiments import run_optimize

pytestmark = pytest.mark.slow


class TestTrainingSplit:
    """Rate-maximizing pilot energy fractions at M = 12, 10 dB."""

    def test_optimal_fractions(self, preset_config):
        """Both inputs put roughly 30% of the energy into training."""
        config = preset_config("training_split", trials=500, inner_samples=50)
        table = run_optimize(config)
        optima = table.where(record="optimum")
        expected = {"bpsk": (0.29, 0.31), "gaussian": (0.29, 0.30)}
        for input_kind, (mu0, mu1) in expected.items():
            row = optima.where(input=input_kind)
            assert row.column("m") == [12]
            assert abs(row.column("mu0")[0] - mu0) <= 0.07, input_kind
            assert abs(row.column("mu1")[0] - mu1) <= 0.07, input_kind

    def test_joint_matches_separable(self, preset_config):
        """A full (μ0, μ1) sweep lands within one grid step of the decoupled sweeps."""
        grid = {"m_values": [12], "mu_step": 0.1, "mu_min": 0.1, "mu_max": 0.6}
        separable = run_optimize(
            preset_config(
                "training_split", trials=300, inner_samples=30, inputs=["gaussian"], grid=grid
            )
        ).where(record="optimum")
        joint = run_optimize(
            preset_config(
                "training_split",
                trials=300,
                inner_samples=30,
                inputs=["gaussian"],
                grid={**grid, "joint": True},
            )
        ).where(record="optimum")
        for column in ("mu0", "mu1"):
            assert abs(separable.column(column)[0] - joint.column(column)[0]) <= 0.1 + 1e-9
